//! Multiobjective cooperative coevolution of fuzzy rule-based policies.
//!
//! Two species are evolved side by side: data bases (fuzzy partitions of the
//! state features) and rule bases (action advocacy per fuzzy subspace).
//! Individuals only ever cooperate with members of the opposite species that
//! carry the same subspecies tag. Paired FRBSs are scored on two objectives,
//! mean episodic return and rule-base complexity, and selection follows the
//! NSGA-II crowded-comparison ordering.
//!
//! Module map:
//!
//! * [`fuzzy`]: zero-order TSK inference over CNF rules.
//! * [`genotype`]: subspecies tags and both genetic encodings.
//! * [`environment`]: Mountain Car, rollouts, and the value-iteration oracle.
//! * [`nsga`]: dominance, non-dominated sorting, crowding.
//! * [`coevo`]: the generational engine.
//! * [`experiment`]: configs, on-disk artifacts, front merging.

pub mod coevo;
pub mod environment;
pub mod experiment;
pub mod fuzzy;
pub mod genotype;
pub mod nsga;
pub mod rng;

/// A discrete action index. Actions are numbered `1..=k`; `0` is reserved in
/// rule-base genotypes for "unspecified".
pub type Action = u8;
