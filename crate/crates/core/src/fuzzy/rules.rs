use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::DataBase;
use crate::genotype::SubspeciesTag;
use crate::Action;

/// Raised when no rule fires for an input state (zero total firing strength).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no rule covers the input state")]
pub struct CoverageFailure;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrbsError {
    #[error("data base tag {db} does not match rule base tag {rb}")]
    TagMismatch { db: SubspeciesTag, rb: SubspeciesTag },
    #[error("rule {index}: {reason}")]
    InvalidRule { index: usize, reason: String },
}

/// CNF fuzzy rule in GABIL form: one bit mask per feature over that feature's
/// linguistic values (bit `j` selects value `j`), plus the single action the
/// rule votes for.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CnfRule {
    pub clauses: Vec<u64>,
    pub action: Action,
}

impl CnfRule {
    /// Elementary rule selecting exactly one linguistic value per feature.
    pub fn elementary(indices: &[usize], action: Action) -> Self {
        Self { clauses: indices.iter().map(|&j| 1u64 << j).collect(), action }
    }

    /// Number of fuzzy subspaces the antecedent spans.
    pub fn decision_points(&self) -> u64 {
        self.clauses.iter().map(|m| u64::from(m.count_ones())).product()
    }

    /// Overall antecedent truth value: `min` over clauses of the `max`
    /// membership among the selected values.
    pub fn firing_strength<M: AsRef<[f64]>>(&self, memberships: &[M]) -> f64 {
        self.clauses
            .iter()
            .zip(memberships)
            .map(|(&mask, mu)| clause_degree(mask, mu.as_ref()))
            .fold(f64::INFINITY, f64::min)
    }

    /// True if the antecedent covers the subspace given by one value index
    /// per feature.
    pub fn covers(&self, subspace: &[usize]) -> bool {
        self.clauses.iter().zip(subspace).all(|(&mask, &j)| mask & (1u64 << j) != 0)
    }
}

fn clause_degree(mut mask: u64, mu: &[f64]) -> f64 {
    let mut best = 0.0f64;
    while mask != 0 {
        let j = mask.trailing_zeros() as usize;
        best = best.max(mu[j]);
        mask &= mask - 1;
    }
    best
}

/// Ordered list of CNF rules over the partitions of a tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleBase {
    pub tag: SubspeciesTag,
    pub num_actions: u8,
    pub rules: Vec<CnfRule>,
}

impl RuleBase {
    pub fn new(tag: SubspeciesTag, num_actions: u8, rules: Vec<CnfRule>) -> Result<Self, FrbsError> {
        for (index, rule) in rules.iter().enumerate() {
            let bad = |reason: String| FrbsError::InvalidRule { index, reason };
            if rule.clauses.len() != tag.num_features() {
                return Err(bad(format!("{} clauses for {} features", rule.clauses.len(), tag.num_features())));
            }
            for (i, (&mask, &m)) in rule.clauses.iter().zip(tag.granularities()).enumerate() {
                if mask == 0 {
                    return Err(bad(format!("clause {i} selects no linguistic value")));
                }
                if m < 64 && mask >> m != 0 {
                    return Err(bad(format!("clause {i} selects values beyond the {m} defined")));
                }
            }
            if rule.action == 0 || rule.action > num_actions {
                return Err(bad(format!("action {} outside 1..={num_actions}", rule.action)));
            }
        }
        Ok(Self { tag, num_actions, rules })
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Total number of decision points: sum over rules of the product of
    /// per-clause selected-value counts.
    pub fn complexity(&self) -> u64 {
        self.rules.iter().map(CnfRule::decision_points).sum()
    }
}

/// Executable policy pairing a data base with a rule base of the same tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frbs {
    pub db: DataBase,
    pub rb: RuleBase,
}

impl Frbs {
    pub fn new(db: DataBase, rb: RuleBase) -> Result<Self, FrbsError> {
        if db.tag != rb.tag {
            return Err(FrbsError::TagMismatch { db: db.tag, rb: rb.tag });
        }
        Ok(Self { db, rb })
    }

    pub fn tag(&self) -> &SubspeciesTag {
        &self.rb.tag
    }

    /// Normalized vote `g_a` for every action `1..=k` (index `a - 1`).
    pub fn voting_strengths(&self, state: &[f64]) -> Result<Vec<f64>, CoverageFailure> {
        let memberships = self.db.memberships(state);
        let mut votes = vec![0.0; usize::from(self.rb.num_actions)];
        let mut total = 0.0;
        for rule in &self.rb.rules {
            let tau = rule.firing_strength(&memberships);
            votes[usize::from(rule.action) - 1] += tau;
            total += tau;
        }
        if total == 0.0 {
            return Err(CoverageFailure);
        }
        for g in &mut votes {
            *g /= total;
        }
        Ok(votes)
    }

    /// Arg-max of the voting strengths; ties go to the lowest action.
    pub fn select_action(&self, state: &[f64]) -> Result<Action, CoverageFailure> {
        // Normalization does not change the arg-max, so accumulate raw votes
        // into a flat buffer and skip the per-feature allocations.
        let sizes = self.db.tag.granularities();
        let mut flat = [0.0f64; 64];
        let mut heap;
        let total_sets: usize = sizes.iter().sum();
        let buf: &mut [f64] = if total_sets <= flat.len() {
            &mut flat[..total_sets]
        } else {
            heap = vec![0.0; total_sets];
            &mut heap
        };
        let mut offset = 0;
        for (p, &x) in self.db.partitions.iter().zip(state) {
            p.memberships_into(x, &mut buf[offset..offset + p.len()]);
            offset += p.len();
        }

        let mut votes = [0.0f64; 256];
        let mut total = 0.0;
        for rule in &self.rb.rules {
            let mut tau = f64::INFINITY;
            let mut offset = 0;
            for (&mask, &m) in rule.clauses.iter().zip(sizes) {
                tau = tau.min(clause_degree(mask, &buf[offset..offset + m]));
                offset += m;
            }
            votes[usize::from(rule.action)] += tau;
            total += tau;
        }
        if total == 0.0 {
            return Err(CoverageFailure);
        }
        Ok(argmax_action(&votes[1..=usize::from(self.rb.num_actions)]))
    }
}

/// Arg-max over a vote vector indexed `a - 1`, lowest action on ties.
pub fn argmax_action(votes: &[f64]) -> Action {
    let mut best = 0;
    for (i, &g) in votes.iter().enumerate().skip(1) {
        if g > votes[best] {
            best = i;
        }
    }
    (best + 1) as Action
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::{FuzzyPartition, FuzzySet, Interval};

    fn tag(g: &[usize]) -> SubspeciesTag {
        SubspeciesTag::new(g.to_vec()).unwrap()
    }

    #[test]
    fn firing_strength_is_min_of_max() {
        // 110 | 01
        let rule = CnfRule { clauses: vec![0b011, 0b10], action: 1 };
        let mu = vec![vec![0.2, 0.5, 0.3], vec![0.6, 0.4]];
        assert_eq!(rule.firing_strength(&mu), 0.4);
    }

    #[test]
    fn clause_with_zero_memberships_kills_rule() {
        let rule = CnfRule { clauses: vec![0b100, 0b11], action: 2 };
        let mu = vec![vec![0.7, 0.3, 0.0], vec![0.6, 0.4]];
        assert_eq!(rule.firing_strength(&mu), 0.0);
    }

    #[test]
    fn full_generalization_fires_positively() {
        let rule = CnfRule { clauses: vec![0b111, 0b11], action: 1 };
        let mu = vec![vec![0.0, 0.25, 0.75], vec![0.5, 0.5]];
        assert_eq!(rule.firing_strength(&mu), 0.5);
    }

    #[test]
    fn decision_points() {
        assert_eq!(CnfRule { clauses: vec![0b011, 0b111], action: 2 }.decision_points(), 6);
        assert_eq!(CnfRule::elementary(&[2, 0], 1).decision_points(), 1);
    }

    #[test]
    fn rule_base_validation() {
        let t = tag(&[3, 2]);
        assert!(RuleBase::new(t.clone(), 2, vec![CnfRule { clauses: vec![0, 1], action: 1 }]).is_err());
        assert!(RuleBase::new(t.clone(), 2, vec![CnfRule { clauses: vec![0b1000, 1], action: 1 }]).is_err());
        assert!(RuleBase::new(t.clone(), 2, vec![CnfRule { clauses: vec![1, 1], action: 3 }]).is_err());
        assert!(RuleBase::new(t, 2, vec![CnfRule { clauses: vec![1, 1], action: 2 }]).is_ok());
    }

    fn two_set_db() -> DataBase {
        let p = FuzzyPartition {
            domain: Interval::new(0.0, 1.0),
            sets: vec![
                FuzzySet::LowerTrapezoid { plateau_end: 0.25, zero_at: 0.75 },
                FuzzySet::UpperTrapezoid { zero_at: 0.25, plateau_start: 0.75 },
            ],
        };
        DataBase { tag: tag(&[2, 2]), partitions: vec![p.clone(), p] }
    }

    #[test]
    fn lone_general_rule_votes_fully() {
        let rb = RuleBase::new(tag(&[2, 2]), 2, vec![CnfRule { clauses: vec![0b11, 0b11], action: 2 }]).unwrap();
        let frbs = Frbs::new(two_set_db(), rb).unwrap();
        for x in [[0.0, 0.0], [0.3, 0.9], [1.0, 0.5]] {
            assert_eq!(frbs.voting_strengths(&x).unwrap(), vec![0.0, 1.0]);
            assert_eq!(frbs.select_action(&x).unwrap(), 2);
        }
    }

    #[test]
    fn weighted_vote() {
        // x1 = 0.4: mu_L = 0.7, mu_H = 0.3.
        let rb = RuleBase::new(
            tag(&[2, 2]),
            2,
            vec![CnfRule { clauses: vec![0b01, 0b11], action: 1 }, CnfRule { clauses: vec![0b10, 0b11], action: 2 }],
        )
        .unwrap();
        let frbs = Frbs::new(two_set_db(), rb).unwrap();
        let g = frbs.voting_strengths(&[0.4, 0.0]).unwrap();
        assert!((g[0] - 0.7).abs() < 1e-12 && (g[1] - 0.3).abs() < 1e-12);
        assert_eq!(frbs.select_action(&[0.4, 0.0]).unwrap(), 1);
    }

    #[test]
    fn uncovered_state_fails() {
        let rb = RuleBase::new(tag(&[2, 2]), 2, vec![CnfRule { clauses: vec![0b01, 0b01], action: 1 }]).unwrap();
        let frbs = Frbs::new(two_set_db(), rb).unwrap();
        assert_eq!(frbs.voting_strengths(&[0.9, 0.9]), Err(CoverageFailure));
        assert_eq!(frbs.select_action(&[0.9, 0.9]), Err(CoverageFailure));
        let empty = Frbs::new(two_set_db(), RuleBase::new(tag(&[2, 2]), 2, vec![]).unwrap()).unwrap();
        assert_eq!(empty.select_action(&[0.1, 0.1]), Err(CoverageFailure));
    }

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(argmax_action(&[0.7, 0.3]), 1);
        assert_eq!(argmax_action(&[0.5, 0.5]), 1);
        assert_eq!(argmax_action(&[0.0, 1.0]), 2);
    }

    #[test]
    fn tied_votes_select_lowest_action() {
        // x1 = 0.5 splits evenly between L and H.
        let rb = RuleBase::new(
            tag(&[2, 2]),
            2,
            vec![CnfRule { clauses: vec![0b10, 0b11], action: 2 }, CnfRule { clauses: vec![0b01, 0b11], action: 1 }],
        )
        .unwrap();
        let frbs = Frbs::new(two_set_db(), rb).unwrap();
        assert_eq!(frbs.select_action(&[0.5, 0.5]).unwrap(), 1);
    }

    #[test]
    fn mismatched_tags_rejected() {
        let rb = RuleBase::new(tag(&[3, 3]), 2, vec![]).unwrap();
        assert!(matches!(Frbs::new(two_set_db(), rb), Err(FrbsError::TagMismatch { .. })));
    }
}
