use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{CnfRule, RuleBase};
use crate::genotype::SubspeciesTag;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("{got} feature names given for a {expected}-feature tag")]
    FeatureCount { expected: usize, got: usize },
    #[error("feature {feature}: {got} linguistic values named but the partition has {expected}")]
    ValueCount { feature: String, expected: usize, got: usize },
    #[error("{got} action names given for {expected} actions")]
    ActionCount { expected: usize, got: usize },
}

/// Display names used when rendering rules as text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinguisticLabels {
    pub features: Vec<String>,
    /// Linguistic value names per feature, in partition order.
    pub values: Vec<Vec<String>>,
    /// Optional action names; when empty only the action number is printed.
    #[serde(default)]
    pub actions: Vec<String>,
}

/// Conventional value names for a partition of `m` sets.
pub fn default_value_names(m: usize) -> Vec<String> {
    let names: &[&str] = match m {
        2 => &["L", "H"],
        3 => &["L", "M", "H"],
        4 => &["VL", "L", "H", "VH"],
        5 => &["VL", "L", "M", "H", "VH"],
        _ => &[],
    };
    if names.is_empty() {
        (1..=m).map(|j| format!("V{j}")).collect()
    } else {
        names.iter().map(|s| s.to_string()).collect()
    }
}

impl LinguisticLabels {
    /// Generic labels `x1..xd` with conventional value names.
    pub fn generic(tag: &SubspeciesTag) -> Self {
        Self {
            features: (1..=tag.num_features()).map(|i| format!("x{i}")).collect(),
            values: tag.granularities().iter().map(|&m| default_value_names(m)).collect(),
            actions: Vec::new(),
        }
    }

    fn check(&self, tag: &SubspeciesTag, num_actions: u8) -> Result<(), RenderError> {
        if self.features.len() != tag.num_features() || self.values.len() != tag.num_features() {
            return Err(RenderError::FeatureCount {
                expected: tag.num_features(),
                got: self.features.len().min(self.values.len()),
            });
        }
        for ((name, vals), &m) in self.features.iter().zip(&self.values).zip(tag.granularities()) {
            if vals.len() != m {
                return Err(RenderError::ValueCount { feature: name.clone(), expected: m, got: vals.len() });
            }
        }
        if !self.actions.is_empty() && self.actions.len() != usize::from(num_actions) {
            return Err(RenderError::ActionCount { expected: usize::from(num_actions), got: self.actions.len() });
        }
        Ok(())
    }

    fn rule_line(&self, rule: &CnfRule, tag: &SubspeciesTag) -> String {
        let mut out = String::from("IF ");
        for (i, (&mask, &m)) in rule.clauses.iter().zip(tag.granularities()).enumerate() {
            if i > 0 {
                out.push_str(" and ");
            }
            let _ = write!(out, "{} is ", self.features[i]);
            let full = if m >= 64 { u64::MAX } else { (1u64 << m) - 1 };
            if mask == full {
                out.push('#');
                continue;
            }
            let selected: Vec<&str> =
                (0..m).filter(|&j| mask & (1u64 << j) != 0).map(|j| self.values[i][j].as_str()).collect();
            if selected.len() == 1 {
                out.push_str(selected[0]);
            } else {
                let _ = write!(out, "{{{}}}", selected.join(" or "));
            }
        }
        let _ = write!(out, " THEN a is {}", rule.action);
        if let Some(name) = self.actions.get(usize::from(rule.action) - 1) {
            let _ = write!(out, " ({name})");
        }
        out
    }

    pub fn render_rule(&self, rule: &CnfRule, tag: &SubspeciesTag, num_actions: u8) -> Result<String, RenderError> {
        self.check(tag, num_actions)?;
        Ok(self.rule_line(rule, tag))
    }

    /// One line per rule, in rule-base order.
    pub fn render(&self, rb: &RuleBase) -> Result<Vec<String>, RenderError> {
        self.check(&rb.tag, rb.num_actions)?;
        Ok(rb.rules.iter().map(|r| self.rule_line(r, &rb.tag)).collect())
    }
}
