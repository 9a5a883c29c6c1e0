//! Named random streams derived from a single master seed.
//!
//! Each phase of a run draws from its own ChaCha stream, so changing how
//! often one phase consumes randomness never shifts another phase.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Initialization = 0,
    Collaborators = 1,
    Breeding = 2,
    InitialStates = 3,
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
