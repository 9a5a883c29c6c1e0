//! Value iteration on a discretized Mountain Car.
//!
//! Both features are cut into `bins` equal-width intervals. Transitions are
//! deterministic: the dynamics are applied at each bin center and the
//! successor is snapped to the bin containing it. Successors at the goal are
//! absorbing with value 0. The greedy policy acts on the continuous
//! environment by looking up the bin containing the current state.
//!
//! With no discounting, bins that cannot reach the goal would see their value
//! drift down forever, so values are floored at the return of an episode that
//! times out. The floor is below every value an episode can actually observe.
//!
//! ## Policy table file
//!
//! Little-endian binary:
//!
//! | bytes | content |
//! | ----- | ------- |
//! | 8     | magic `MCPOLICY` |
//! | 4     | format version (`1`, u32) |
//! | 4     | `bins` (u32) |
//! | 32    | position min, position max, velocity min, velocity max (f64) |
//! | bins² | actions (u8), position-major: entry `i * bins + j` is position bin `i`, velocity bin `j` |

use std::io::{self, Read, Write};

use super::{step, McConfig, McState, Policy};
use crate::fuzzy::{CoverageFailure, Interval};
use crate::Action;

const MAGIC: &[u8; 8] = b"MCPOLICY";
const VERSION: u32 = 1;
const GOAL: u32 = u32::MAX;

pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Greedy action per (position bin, velocity bin).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePolicy {
    pub bins: usize,
    pub position: Interval,
    pub velocity: Interval,
    pub actions: Vec<Action>,
}

fn bin_of(value: f64, domain: Interval, bins: usize) -> usize {
    let t = (value - domain.min) / domain.width();
    ((t * bins as f64).floor().max(0.0) as usize).min(bins - 1)
}

fn bin_center(i: usize, domain: Interval, bins: usize) -> f64 {
    domain.min + (i as f64 + 0.5) * domain.width() / bins as f64
}

impl DiscretePolicy {
    pub fn bin_index(&self, s: &McState) -> usize {
        bin_of(s.x, self.position, self.bins) * self.bins + bin_of(s.v, self.velocity, self.bins)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.bins as u32).to_le_bytes())?;
        for v in [self.position.min, self.position.max, self.velocity.min, self.velocity.max] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.actions)
    }

    pub fn read_from<R: Read>(mut r: R) -> io::Result<Self> {
        let invalid = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(invalid("not a policy table (bad magic)"));
        }
        let mut u = [0u8; 4];
        r.read_exact(&mut u)?;
        if u32::from_le_bytes(u) != VERSION {
            return Err(invalid("unsupported policy table version"));
        }
        r.read_exact(&mut u)?;
        let bins = u32::from_le_bytes(u) as usize;
        if bins < 2 {
            return Err(invalid("policy table needs at least 2 bins"));
        }
        let mut f = [0f64; 4];
        for slot in &mut f {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            *slot = f64::from_le_bytes(b);
        }
        let mut actions = vec![0u8; bins * bins];
        r.read_exact(&mut actions)?;
        Ok(Self { bins, position: Interval::new(f[0], f[1]), velocity: Interval::new(f[2], f[3]), actions })
    }
}

impl Policy for DiscretePolicy {
    fn act(&self, state: &McState) -> Result<Action, CoverageFailure> {
        Ok(self.actions[self.bin_index(state)])
    }
}

#[derive(Debug, Clone)]
pub struct ValueIteration {
    pub policy: DiscretePolicy,
    /// Optimal value per bin, same layout as the policy.
    pub values: Vec<f64>,
    /// Successor bin per (bin, action); `None` means the goal.
    successors: Vec<u32>,
    /// Max Bellman residual after each sweep.
    pub residuals: Vec<f64>,
}

impl ValueIteration {
    pub fn successor(&self, bin: usize, action: Action) -> Option<usize> {
        let s = self.successors[bin * 2 + usize::from(action - 1)];
        (s != GOAL).then_some(s as usize)
    }

    pub fn iterations(&self) -> usize {
        self.residuals.len()
    }
}

/// Solve the discretized problem by synchronous value iteration.
///
/// # Panics
///
/// If `bins < 2`.
pub fn value_iteration(bins: usize, tolerance: f64, config: &McConfig) -> ValueIteration {
    assert!(bins >= 2, "value iteration needs at least 2 bins per feature");
    let n = bins * bins;
    let (pos, vel) = (config.position, config.velocity);

    let mut successors = vec![GOAL; n * 2];
    for i in 0..bins {
        let x = bin_center(i, pos, bins);
        for j in 0..bins {
            let s = McState::new(x, bin_center(j, vel, bins));
            for a in 1..=2u8 {
                let next = step(config, s, a).expect("actions 1 and 2 are valid");
                if !next.done {
                    let b = bin_of(next.state.x, pos, bins) * bins + bin_of(next.state.v, vel, bins);
                    successors[(i * bins + j) * 2 + usize::from(a - 1)] = b as u32;
                }
            }
        }
    }

    let floor = config.min_return();
    let r = config.step_reward;
    let backup = |values: &[f64], succ: u32| if succ == GOAL { r } else { r + values[succ as usize] };

    let mut values = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut residuals = Vec::new();
    loop {
        let mut residual = 0.0f64;
        for (b, slot) in next.iter_mut().enumerate() {
            let q = backup(&values, successors[2 * b]).max(backup(&values, successors[2 * b + 1]));
            let v = q.max(floor);
            residual = residual.max((v - values[b]).abs());
            *slot = v;
        }
        std::mem::swap(&mut values, &mut next);
        residuals.push(residual);
        if residual < tolerance {
            break;
        }
    }

    let actions = (0..n)
        .map(|b| {
            let left = backup(&values, successors[2 * b]);
            let right = backup(&values, successors[2 * b + 1]);
            if right > left {
                2
            } else {
                1
            }
        })
        .collect();

    ValueIteration {
        policy: DiscretePolicy { bins, position: pos, velocity: vel, actions },
        values,
        successors,
        residuals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{evaluate_performance, InitialStateSet};

    #[test]
    fn binning_covers_domain_edges() {
        let d = Interval::new(-1.2, 0.5);
        assert_eq!(bin_of(-1.2, d, 10), 0);
        assert_eq!(bin_of(0.5, d, 10), 9);
        assert_eq!(bin_of(-5.0, d, 10), 0);
        assert_eq!(bin_of(bin_center(3, d, 10), d, 10), 3);
    }

    #[test]
    fn coarse_grid_cannot_escape() {
        let cfg = McConfig::default();
        let vi = value_iteration(2, DEFAULT_TOLERANCE, &cfg);
        let z = InitialStateSet::sample(0, 30);
        let r = evaluate_performance(&vi.policy, &z, &cfg).unwrap();
        assert_eq!(r.perf, -200.0);
    }

    #[test]
    fn residuals_shrink_below_tolerance() {
        let vi = value_iteration(60, DEFAULT_TOLERANCE, &McConfig::default());
        assert!(*vi.residuals.last().unwrap() < DEFAULT_TOLERANCE);
        assert!(vi.residuals.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn values_climb_by_one_along_greedy_paths() {
        let cfg = McConfig::default();
        let vi = value_iteration(80, DEFAULT_TOLERANCE, &cfg);
        let floor = cfg.min_return();
        for start in (0..vi.values.len()).step_by(97) {
            let mut b = start;
            if vi.values[b] <= floor {
                continue;
            }
            loop {
                let a = vi.policy.actions[b];
                match vi.successor(b, a) {
                    None => {
                        assert_eq!(vi.values[b], -1.0);
                        break;
                    }
                    Some(nb) => {
                        assert_eq!(vi.values[nb], vi.values[b] + 1.0);
                        b = nb;
                    }
                }
            }
        }
    }

    #[test]
    fn policy_table_round_trips() {
        let vi = value_iteration(12, DEFAULT_TOLERANCE, &McConfig::default());
        let mut buf = Vec::new();
        vi.policy.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 4 + 32 + 144);
        assert_eq!(DiscretePolicy::read_from(buf.as_slice()).unwrap(), vi.policy);
        buf[0] = b'X';
        assert!(DiscretePolicy::read_from(buf.as_slice()).is_err());
    }
}
