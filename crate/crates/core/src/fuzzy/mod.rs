//! Zero-order Takagi-Sugeno-Kang fuzzy rule-based systems.
//!
//! A [`DataBase`] holds one [`FuzzyPartition`] per state feature, a
//! [`RuleBase`] holds CNF rules whose clauses select linguistic values of
//! those partitions, and an [`Frbs`] pairs the two into an executable policy.

mod render;
mod rules;

pub use render::{default_value_names, LinguisticLabels, RenderError};
pub use rules::{argmax_action, CnfRule, CoverageFailure, Frbs, FrbsError, RuleBase};

use serde::{Deserialize, Serialize};

use crate::genotype::SubspeciesTag;

/// Closed real interval `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

impl Interval {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.min, self.max)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.min <= x && x <= self.max
    }
}

/// Piecewise-linear fuzzy set.
///
/// Breakpoints are in feature units. Trapezoids are open-ended towards the
/// domain edge they sit on; membership on their plateau is exactly 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FuzzySet {
    /// Membership 1 up to `plateau_end`, falling linearly to 0 at `zero_at`.
    LowerTrapezoid { plateau_end: f64, zero_at: f64 },
    /// Rises from 0 at `left` to 1 at `peak`, back to 0 at `right`.
    Triangle { left: f64, peak: f64, right: f64 },
    /// Rises from 0 at `zero_at` to 1 at `plateau_start`, 1 afterwards.
    UpperTrapezoid { zero_at: f64, plateau_start: f64 },
}

impl FuzzySet {
    pub fn membership(&self, x: f64) -> f64 {
        match *self {
            FuzzySet::LowerTrapezoid { plateau_end, zero_at } => {
                if x <= plateau_end {
                    1.0
                } else if x >= zero_at {
                    0.0
                } else {
                    (zero_at - x) / (zero_at - plateau_end)
                }
            }
            FuzzySet::Triangle { left, peak, right } => {
                if x <= left || x >= right {
                    0.0
                } else if x <= peak {
                    (x - left) / (peak - left)
                } else {
                    (right - x) / (right - peak)
                }
            }
            FuzzySet::UpperTrapezoid { zero_at, plateau_start } => {
                if x >= plateau_start {
                    1.0
                } else if x <= zero_at {
                    0.0
                } else {
                    (x - zero_at) / (plateau_start - zero_at)
                }
            }
        }
    }

    /// Open support of the set, clipped to `domain`.
    pub fn support(&self, domain: Interval) -> (f64, f64) {
        match *self {
            FuzzySet::LowerTrapezoid { zero_at, .. } => (domain.min, zero_at),
            FuzzySet::Triangle { left, right, .. } => (left, right),
            FuzzySet::UpperTrapezoid { zero_at, .. } => (zero_at, domain.max),
        }
    }

    /// A point of the domain where this set alone has membership 1: the
    /// plateau midpoint for trapezoids, the peak for triangles.
    pub fn prototype(&self, domain: Interval) -> f64 {
        match *self {
            FuzzySet::LowerTrapezoid { plateau_end, .. } => 0.5 * (domain.min + plateau_end),
            FuzzySet::Triangle { peak, .. } => peak,
            FuzzySet::UpperTrapezoid { plateau_start, .. } => 0.5 * (plateau_start + domain.max),
        }
    }
}

/// Fuzzy partition of one feature domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyPartition {
    pub domain: Interval,
    pub sets: Vec<FuzzySet>,
}

impl FuzzyPartition {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Membership degree of `x` in every set, in partition order. `x` is
    /// clamped to the domain first.
    pub fn memberships(&self, x: f64) -> Vec<f64> {
        let x = self.domain.clamp(x);
        self.sets.iter().map(|s| s.membership(x)).collect()
    }

    pub(crate) fn memberships_into(&self, x: f64, out: &mut [f64]) {
        let x = self.domain.clamp(x);
        for (slot, set) in out.iter_mut().zip(&self.sets) {
            *slot = set.membership(x);
        }
    }
}

/// Per-feature fuzzy partitions, shaped by a subspecies tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataBase {
    pub tag: SubspeciesTag,
    pub partitions: Vec<FuzzyPartition>,
}

impl DataBase {
    pub fn num_features(&self) -> usize {
        self.partitions.len()
    }

    /// Membership vectors for a full state vector, one per feature.
    pub fn memberships(&self, state: &[f64]) -> Vec<Vec<f64>> {
        self.partitions.iter().zip(state).map(|(p, &x)| p.memberships(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_lower() -> FuzzySet {
        FuzzySet::LowerTrapezoid { plateau_end: 0.25, zero_at: 0.75 }
    }

    #[test]
    fn lower_trapezoid_plateau_and_slope() {
        let s = unit_lower();
        assert_eq!(s.membership(0.1), 1.0);
        assert_eq!(s.membership(0.25), 1.0);
        assert!((s.membership(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(s.membership(0.75), 0.0);
        assert_eq!(s.membership(0.9), 0.0);
    }

    #[test]
    fn triangle_peak_is_one() {
        let s = FuzzySet::Triangle { left: 0.2, peak: 0.45, right: 0.8 };
        assert_eq!(s.membership(0.45), 1.0);
        assert_eq!(s.membership(0.2), 0.0);
        assert_eq!(s.membership(0.8), 0.0);
        assert!((s.membership(0.325) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn upper_trapezoid_mirrors_lower() {
        let s = FuzzySet::UpperTrapezoid { zero_at: 0.25, plateau_start: 0.75 };
        assert_eq!(s.membership(0.9), 1.0);
        assert_eq!(s.membership(0.1), 0.0);
        assert!((s.membership(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn partition_clamps_out_of_domain_inputs() {
        let p = FuzzyPartition {
            domain: Interval::new(0.0, 1.0),
            sets: vec![unit_lower(), FuzzySet::UpperTrapezoid { zero_at: 0.25, plateau_start: 0.75 }],
        };
        assert_eq!(p.memberships(-5.0), vec![1.0, 0.0]);
        assert_eq!(p.memberships(7.0), vec![0.0, 1.0]);
    }

    #[test]
    fn prototypes_sit_on_full_membership() {
        let dom = Interval::new(0.0, 1.0);
        for s in [
            unit_lower(),
            FuzzySet::Triangle { left: 0.2, peak: 0.45, right: 0.8 },
            FuzzySet::UpperTrapezoid { zero_at: 0.25, plateau_start: 0.75 },
        ] {
            assert_eq!(s.membership(s.prototype(dom)), 1.0);
        }
    }
}
