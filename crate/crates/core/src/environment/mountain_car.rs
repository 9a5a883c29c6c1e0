use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuzzy::Interval;
use crate::Action;

pub const ACTION_LEFT: Action = 1;
pub const ACTION_RIGHT: Action = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("action {0} is not one of 1 (left) or 2 (right)")]
    InvalidAction(Action),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McState {
    pub x: f64,
    pub v: f64,
}

impl McState {
    pub const fn new(x: f64, v: f64) -> Self {
        Self { x, v }
    }

    pub fn features(&self) -> [f64; 2] {
        [self.x, self.v]
    }
}

/// Mountain Car constants. Defaults follow the classic Gym dynamics with the
/// position domain capped at the goal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct McConfig {
    pub position: Interval,
    pub velocity: Interval,
    pub goal_position: f64,
    pub force: f64,
    pub gravity: f64,
    pub t_max: u32,
    pub step_reward: f64,
    /// Best achievable mean return, estimated by value iteration. Only used
    /// to normalize crowding distances.
    pub perf_upper_bound: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            position: Interval::new(-1.2, 0.5),
            velocity: Interval::new(-0.07, 0.07),
            goal_position: 0.5,
            force: 0.001,
            gravity: 0.0025,
            t_max: 200,
            step_reward: -1.0,
            perf_upper_bound: -96.0,
        }
    }
}

impl McConfig {
    pub fn num_actions(&self) -> u8 {
        2
    }

    /// Feature domains in state-vector order (position, velocity).
    pub fn feature_domains(&self) -> [Interval; 2] {
        [self.position, self.velocity]
    }

    /// Return of an episode that never reaches the goal.
    pub fn min_return(&self) -> f64 {
        self.step_reward * f64::from(self.t_max)
    }

    pub fn is_goal(&self, x: f64) -> bool {
        x >= self.goal_position
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub state: McState,
    pub reward: f64,
    /// Goal reached. The step budget is the caller's business.
    pub done: bool,
}

/// One transition. Action 1 pushes left, action 2 pushes right.
pub fn step(config: &McConfig, s: McState, action: Action) -> Result<Step, EnvError> {
    let push = match action {
        ACTION_LEFT => -config.force,
        ACTION_RIGHT => config.force,
        other => return Err(EnvError::InvalidAction(other)),
    };
    let mut v = config.velocity.clamp(s.v + push - config.gravity * (3.0 * s.x).cos());
    let x = config.position.clamp(s.x + v);
    if x <= config.position.min {
        v = 0.0;
    }
    Ok(Step { state: McState { x, v }, reward: config.step_reward, done: config.is_goal(x) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_right_from_rest() {
        let cfg = McConfig::default();
        let s = step(&cfg, McState::new(-0.5, 0.0), ACTION_RIGHT).unwrap();
        // v' = 0.001 - 0.0025 cos(-1.5)
        let v = 0.001 - 0.0025 * (-1.5f64).cos();
        assert!((s.state.v - v).abs() < 1e-15);
        assert!((s.state.v - 0.000_823_2).abs() < 1e-7);
        assert!((s.state.x - (-0.499_176_8)).abs() < 1e-7);
        assert!(!s.done);
        assert_eq!(s.reward, -1.0);
    }

    #[test]
    fn reaching_goal_terminates() {
        let s = step(&McConfig::default(), McState::new(0.499, 0.07), ACTION_RIGHT).unwrap();
        assert!(s.state.x >= 0.5);
        assert!(s.done);
    }

    #[test]
    fn left_wall_resets_velocity() {
        let s = step(&McConfig::default(), McState::new(-1.2, -0.05), ACTION_LEFT).unwrap();
        assert_eq!(s.state.x, -1.2);
        assert_eq!(s.state.v, 0.0);
    }

    #[test]
    fn invalid_action_rejected() {
        let cfg = McConfig::default();
        assert_eq!(step(&cfg, McState::new(-0.5, 0.0), 0), Err(EnvError::InvalidAction(0)));
        assert_eq!(step(&cfg, McState::new(-0.5, 0.0), 3), Err(EnvError::InvalidAction(3)));
    }
}
