//! Mountain Car testbed, policy rollouts and performance evaluation.

mod mountain_car;
pub mod oracle;

pub use mountain_car::{step, EnvError, McConfig, McState, Step, ACTION_LEFT, ACTION_RIGHT};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuzzy::{CoverageFailure, Frbs};
use crate::rng::{stream, Stream};
use crate::Action;

/// Anything that maps a Mountain Car state to an action.
pub trait Policy: Sync {
    fn act(&self, state: &McState) -> Result<Action, CoverageFailure>;
}

impl Policy for Frbs {
    fn act(&self, state: &McState) -> Result<Action, CoverageFailure> {
        self.select_action(&state.features())
    }
}

impl<F> Policy for F
where
    F: Fn(&McState) -> Result<Action, CoverageFailure> + Sync,
{
    fn act(&self, state: &McState) -> Result<Action, CoverageFailure> {
        self(state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum RolloutError {
    #[error(transparent)]
    Coverage(#[from] CoverageFailure),
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// Fixed set of start states shared by every evaluation in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialStateSet {
    pub seed: u64,
    pub states: Vec<McState>,
}

/// Start position range; velocity always starts at zero.
pub const START_POSITIONS: (f64, f64) = (-0.6, -0.4);

impl InitialStateSet {
    /// `count` i.i.d. states with `x ~ U[-0.6, -0.4]` and `v = 0`, drawn from
    /// the initial-state stream of `seed`. A run with the same seed evaluates
    /// every policy on exactly these states.
    pub fn sample(seed: u64, count: usize) -> Self {
        let mut rng = stream(seed, Stream::InitialStates);
        let states =
            (0..count).map(|_| McState::new(rng.random_range(START_POSITIONS.0..=START_POSITIONS.1), 0.0)).collect();
        Self { seed, states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Undiscounted return of one episode of at most `t_max` steps.
pub fn rollout<P: Policy + ?Sized>(policy: &P, start: McState, config: &McConfig) -> Result<f64, RolloutError> {
    let mut s = start;
    let mut ret = 0.0;
    for _ in 0..config.t_max {
        let a = policy.act(&s)?;
        let next = step(config, s, a)?;
        ret += next.reward;
        s = next.state;
        if next.done {
            break;
        }
    }
    Ok(ret)
}

/// Mean return over the initial-state set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerfResult {
    pub perf: f64,
    /// Some visited state was not covered by the policy. `perf` is then the
    /// environment's lower bound.
    pub failed: bool,
}

/// Mean return over `starts`. A coverage failure in any rollout scores the
/// whole evaluation at the lower bound.
pub fn evaluate_performance<P: Policy + ?Sized>(
    policy: &P,
    starts: &InitialStateSet,
    config: &McConfig,
) -> Result<PerfResult, EnvError> {
    let mut total = 0.0;
    for &s0 in &starts.states {
        match rollout(policy, s0, config) {
            Ok(g) => total += g,
            Err(RolloutError::Coverage(_)) => {
                return Ok(PerfResult { perf: config.min_return(), failed: true });
            }
            Err(RolloutError::Env(e)) => return Err(e),
        }
    }
    Ok(PerfResult { perf: total / starts.len() as f64, failed: false })
}
