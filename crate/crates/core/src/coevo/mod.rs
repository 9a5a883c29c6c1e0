//! The cooperative-coevolution engine.
//!
//! Data-base individuals (species 1) and rule-base individuals (species 2)
//! are only ever scored by pairing them with collaborators of the opposite
//! species that carry the same subspecies tag. Each generation evaluates the
//! newest individuals against collaborators drawn from the current parents,
//! archives the best of parents and children, and breeds a new child
//! population.

mod engine;
pub mod operators;
mod pmf;

pub use engine::{
    archive_parent_pop, assign_credit, breed_children, build_solution_set, evaluate_solution_set, run_fuzzy_mococo,
    select_collaborators, CollaboratorMap, GenerationRecord, RunOutcome,
};
pub use pmf::{make_subspecies_dists, SubspeciesPmf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuzzy::Frbs;
use crate::genotype::{DbGenotype, RbGenotype, SubspeciesTag, DEFAULT_OMEGA};
use crate::nsga::{MoAnnotation, ObjectivePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Species {
    Db,
    Rb,
}

impl Species {
    pub fn opposite(self) -> Self {
        match self {
            Species::Db => Species::Rb,
            Species::Rb => Species::Db,
        }
    }
}

/// Common view of both genotype kinds.
pub trait Genome: Clone + Send + Sync {
    const SPECIES: Species;
    fn tag(&self) -> &SubspeciesTag;
}

impl Genome for DbGenotype {
    const SPECIES: Species = Species::Db;
    fn tag(&self) -> &SubspeciesTag {
        &self.tag
    }
}

impl Genome for RbGenotype {
    const SPECIES: Species = Species::Rb;
    fn tag(&self) -> &SubspeciesTag {
        &self.tag
    }
}

/// A genotype with a run-unique id and the objectives it was credited with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual<G> {
    pub id: u64,
    pub genotype: G,
    pub credit: Option<ObjectivePoint>,
}

impl<G: Genome> Individual<G> {
    pub fn tag(&self) -> &SubspeciesTag {
        self.genotype.tag()
    }
}

pub type DbIndividual = Individual<DbGenotype>;
pub type RbIndividual = Individual<RbGenotype>;

/// Indices of the members of `pop` carrying `tag`, in population order.
pub fn subpopulation<G: Genome>(pop: &[Individual<G>], tag: &SubspeciesTag) -> Vec<usize> {
    (0..pop.len()).filter(|&i| pop[i].tag() == tag).collect()
}

/// A paired and evaluated FRBS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub db_id: u64,
    pub rb_id: u64,
    pub db: DbGenotype,
    pub rb: RbGenotype,
    pub frbs: Frbs,
    pub perf: f64,
    /// Evaluation hit an uncovered state.
    pub failed: bool,
    pub complexity: u64,
    pub annotation: MoAnnotation,
}

impl Solution {
    pub fn tag(&self) -> &SubspeciesTag {
        &self.db.tag
    }

    pub fn objectives(&self) -> ObjectivePoint {
        ObjectivePoint::new(self.perf, self.complexity)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{name} = {value} must lie in [0, 1]")]
    Probability { name: &'static str, value: f64 },
    #[error("{name} must be positive")]
    NonPositive { name: &'static str },
    #[error("beta = {0} must be at least 1")]
    Beta(f64),
    #[error("omega = {0} must lie in (0, 1]")]
    Omega(f64),
    #[error("dbMutSigma = {0} must be finite and non-negative")]
    Sigma(f64),
    #[error("at least one subspecies tag is required")]
    NoTags,
    #[error("subspecies tag {0} is listed twice")]
    DuplicateTag(SubspeciesTag),
    #[error("subspecies tag {tag} has {got} components but the environment has {expected} features")]
    TagArity { tag: SubspeciesTag, expected: usize, got: usize },
}

/// Every knob of a run. Serialized keys are camelCase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Hyperparams {
    pub num_gens: usize,
    pub db_pop_size: usize,
    pub rb_pop_size: usize,
    pub db_p_cross: f64,
    pub db_mut_sigma: f64,
    pub rb_p_cross: f64,
    pub rb_p_mut: f64,
    pub rb_p_unspec: f64,
    pub beta: f64,
    /// Number of initial states each solution is rolled out from.
    pub eta: usize,
    #[serde(default = "default_omega")]
    pub omega: f64,
    /// Subspecies tags, in PMF order.
    pub subspecies: Vec<SubspeciesTag>,
}

fn default_omega() -> f64 {
    DEFAULT_OMEGA
}

impl Default for Hyperparams {
    /// Full-scale Mountain Car settings.
    fn default() -> Self {
        Self {
            num_gens: 50,
            db_pop_size: 300,
            rb_pop_size: 600,
            db_p_cross: 0.75,
            db_mut_sigma: 0.02,
            rb_p_cross: 0.25,
            rb_p_mut: 0.05,
            rb_p_unspec: 0.1,
            beta: 1.125,
            eta: 30,
            omega: DEFAULT_OMEGA,
            subspecies: [2, 3, 4, 5].iter().map(|&m| SubspeciesTag::new(vec![m, m]).expect("valid tag")).collect(),
        }
    }
}

impl Hyperparams {
    /// Small settings for quick checks: 10 generations, 60/120 individuals,
    /// 10 initial states.
    pub fn smoke() -> Self {
        Self { num_gens: 10, db_pop_size: 60, rb_pop_size: 120, eta: 10, ..Self::default() }
    }

    pub fn validate(&self, num_features: usize) -> Result<(), ConfigError> {
        for (name, value) in [
            ("dbPCross", self.db_p_cross),
            ("rbPCross", self.rb_p_cross),
            ("rbPMut", self.rb_p_mut),
            ("rbPUnspec", self.rb_p_unspec),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::Probability { name, value });
            }
        }
        for (name, value) in [
            ("numGens", self.num_gens),
            ("dbPopSize", self.db_pop_size),
            ("rbPopSize", self.rb_pop_size),
            ("eta", self.eta),
        ] {
            if value == 0 {
                return Err(ConfigError::NonPositive { name });
            }
        }
        if !(self.beta >= 1.0 && self.beta.is_finite()) {
            return Err(ConfigError::Beta(self.beta));
        }
        if !(self.omega > 0.0 && self.omega <= 1.0) {
            return Err(ConfigError::Omega(self.omega));
        }
        if !(self.db_mut_sigma >= 0.0 && self.db_mut_sigma.is_finite()) {
            return Err(ConfigError::Sigma(self.db_mut_sigma));
        }
        if self.subspecies.is_empty() {
            return Err(ConfigError::NoTags);
        }
        for (i, tag) in self.subspecies.iter().enumerate() {
            if self.subspecies[..i].contains(tag) {
                return Err(ConfigError::DuplicateTag(tag.clone()));
            }
            if tag.num_features() != num_features {
                return Err(ConfigError::TagArity {
                    tag: tag.clone(),
                    expected: num_features,
                    got: tag.num_features(),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        assert_eq!(Hyperparams::default().validate(2), Ok(()));
        assert_eq!(Hyperparams::smoke().validate(2), Ok(()));
    }

    #[test]
    fn validation_rejects_bad_values() {
        let bad = |f: fn(&mut Hyperparams)| {
            let mut h = Hyperparams::default();
            f(&mut h);
            h.validate(2).unwrap_err()
        };
        assert!(matches!(bad(|h| h.rb_p_mut = 1.5), ConfigError::Probability { name: "rbPMut", .. }));
        assert!(matches!(bad(|h| h.db_pop_size = 0), ConfigError::NonPositive { name: "dbPopSize" }));
        assert_eq!(bad(|h| h.beta = 0.9), ConfigError::Beta(0.9));
        assert_eq!(bad(|h| h.omega = 0.0), ConfigError::Omega(0.0));
        assert_eq!(bad(|h| h.db_mut_sigma = -1.0), ConfigError::Sigma(-1.0));
        assert_eq!(bad(|h| h.subspecies.clear()), ConfigError::NoTags);
        assert!(matches!(bad(|h| h.subspecies.push(h.subspecies[0].clone())), ConfigError::DuplicateTag(_)));
        assert!(matches!(Hyperparams::default().validate(3), Err(ConfigError::TagArity { expected: 3, got: 2, .. })));
    }

    #[test]
    fn hyperparams_toml_keys() {
        let text = toml::to_string(&Hyperparams::smoke()).unwrap();
        assert!(text.contains("numGens = 10"));
        assert!(text.contains("rbPUnspec = 0.1"));
        let back: Hyperparams = toml::from_str(&text).unwrap();
        assert_eq!(back, Hyperparams::smoke());
    }
}
