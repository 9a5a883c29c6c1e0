//! Subspecies tags and the two genetic encodings.
//!
//! Data-base genotypes are real vectors in `[0, 1]`, one reference-coordinate
//! fraction per fuzzy set. Rule-base genotypes hold one allele per fuzzy
//! subspace: `0` leaves the subspace unspecified, `a` in `1..=k` advocates
//! action `a` there. Rule-base genes are laid out like nested loops over the
//! features with the first feature outermost (the last feature varies
//! fastest).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuzzy::{CnfRule, DataBase, FuzzyPartition, FuzzySet, Interval, RuleBase};
use crate::Action;

/// Default fraction of each subdomain in which a reference coordinate may sit.
pub const DEFAULT_OMEGA: f64 = 0.75;

/// Clause masks are `u64`, which caps the number of sets per feature.
pub const MAX_GRANULARITY: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenotypeError {
    #[error("invalid subspecies tag: {0}")]
    InvalidTag(String),
    #[error("genotype for tag {tag} needs {expected} alleles, got {got}")]
    Length { tag: SubspeciesTag, expected: usize, got: usize },
    #[error("allele {index} = {value} is outside {range}")]
    Allele { index: usize, value: String, range: String },
    #[error("{got} feature domains supplied for a {expected}-feature tag")]
    DomainCount { expected: usize, got: usize },
}

/// Number of fuzzy sets per feature. Every component is at least 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SubspeciesTag(Vec<usize>);

impl SubspeciesTag {
    pub fn new(granularities: Vec<usize>) -> Result<Self, GenotypeError> {
        if granularities.is_empty() {
            return Err(GenotypeError::InvalidTag("no features".into()));
        }
        if let Some(&g) = granularities.iter().find(|&&g| !(2..=MAX_GRANULARITY).contains(&g)) {
            return Err(GenotypeError::InvalidTag(format!("granularity {g} outside 2..={MAX_GRANULARITY}")));
        }
        Ok(Self(granularities))
    }

    pub fn granularities(&self) -> &[usize] {
        &self.0
    }

    pub fn num_features(&self) -> usize {
        self.0.len()
    }

    /// Data-base genotype length: sum of granularities.
    pub fn db_len(&self) -> usize {
        self.0.iter().sum()
    }

    /// Rule-base genotype length: number of fuzzy subspaces.
    pub fn rb_len(&self) -> usize {
        self.0.iter().product()
    }

    /// Per-feature set indices of the subspace addressed by rule-base gene
    /// `gene`.
    pub fn subspace(&self, mut gene: usize) -> Vec<usize> {
        let mut idx = vec![0; self.0.len()];
        for (slot, &m) in idx.iter_mut().zip(&self.0).rev() {
            *slot = gene % m;
            gene /= m;
        }
        idx
    }
}

impl TryFrom<Vec<usize>> for SubspeciesTag {
    type Error = GenotypeError;

    fn try_from(v: Vec<usize>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<SubspeciesTag> for Vec<usize> {
    fn from(t: SubspeciesTag) -> Self {
        t.0
    }
}

impl fmt::Display for SubspeciesTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{g}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for SubspeciesTag {
    type Err = GenotypeError;

    /// Accepts `(4,4)`, `4,4` and `4x4`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts = inner
            .split([',', 'x'])
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| GenotypeError::InvalidTag(format!("cannot parse {s:?}")))?;
        Self::new(parts)
    }
}

/// Data-base genotype: one fraction in `[0, 1]` per fuzzy set, grouped by
/// feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbGenotype {
    pub tag: SubspeciesTag,
    pub alleles: Vec<f64>,
}

impl DbGenotype {
    pub fn new(tag: SubspeciesTag, alleles: Vec<f64>) -> Result<Self, GenotypeError> {
        if alleles.len() != tag.db_len() {
            return Err(GenotypeError::Length { expected: tag.db_len(), got: alleles.len(), tag });
        }
        if let Some((index, v)) = alleles.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(GenotypeError::Allele { index, value: v.to_string(), range: "[0, 1]".into() });
        }
        Ok(Self { tag, alleles })
    }

    /// Decode into fuzzy partitions over `domains` (one per feature).
    ///
    /// Each domain is split into `m` equal subdomains of width `w`; the
    /// middle `omega * w` of each is the valid region and allele `j` places
    /// reference coordinate `r_j` at that fraction of its valid region. The
    /// outer sets are trapezoids with plateaus reaching the domain edges,
    /// inner sets are triangles peaking at `r_j` and vanishing at the
    /// neighbouring reference coordinates.
    pub fn decode(&self, domains: &[Interval], omega: f64) -> Result<DataBase, GenotypeError> {
        if domains.len() != self.tag.num_features() {
            return Err(GenotypeError::DomainCount { expected: self.tag.num_features(), got: domains.len() });
        }
        let mut offset = 0;
        let partitions = self
            .tag
            .granularities()
            .iter()
            .zip(domains)
            .map(|(&m, &domain)| {
                let refs = reference_coordinates(&self.alleles[offset..offset + m], domain, omega);
                offset += m;
                FuzzyPartition { domain, sets: sets_from_references(&refs) }
            })
            .collect();
        Ok(DataBase { tag: self.tag.clone(), partitions })
    }
}

/// Reference coordinates for one feature.
pub fn reference_coordinates(alleles: &[f64], domain: Interval, omega: f64) -> Vec<f64> {
    let m = alleles.len() as f64;
    let w = domain.width() / m;
    let margin = 0.5 * (1.0 - omega) * w;
    alleles.iter().enumerate().map(|(j, &a)| domain.min + j as f64 * w + margin + a * omega * w).collect()
}

fn sets_from_references(r: &[f64]) -> Vec<FuzzySet> {
    let m = r.len();
    (0..m)
        .map(|j| {
            if j == 0 {
                FuzzySet::LowerTrapezoid { plateau_end: r[0], zero_at: r[1] }
            } else if j == m - 1 {
                FuzzySet::UpperTrapezoid { zero_at: r[m - 2], plateau_start: r[m - 1] }
            } else {
                FuzzySet::Triangle { left: r[j - 1], peak: r[j], right: r[j + 1] }
            }
        })
        .collect()
}

/// Rule-base genotype: one allele in `0..=k` per fuzzy subspace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RbGenotype {
    pub tag: SubspeciesTag,
    pub alleles: Vec<Action>,
}

impl RbGenotype {
    pub fn new(tag: SubspeciesTag, alleles: Vec<Action>, num_actions: u8) -> Result<Self, GenotypeError> {
        if alleles.len() != tag.rb_len() {
            return Err(GenotypeError::Length { expected: tag.rb_len(), got: alleles.len(), tag });
        }
        if let Some((index, &v)) = alleles.iter().enumerate().find(|(_, &v)| v > num_actions) {
            return Err(GenotypeError::Allele { index, value: v.to_string(), range: format!("0..={num_actions}") });
        }
        Ok(Self { tag, alleles })
    }

    /// Number of specified (non-zero) alleles.
    pub fn complexity(&self) -> u64 {
        self.alleles.iter().filter(|&&a| a != 0).count() as u64
    }

    /// Decode into CNF rules.
    ///
    /// Every specified allele becomes an elementary rule. Rules are then
    /// merged to a fixpoint: pairs are scanned in ascending index order and
    /// two rules with the same action whose masks agree on all clauses but
    /// one are fused (the differing clause is OR-ed), the earlier rule
    /// absorbing the later. The scan restarts after every merge.
    pub fn decode(&self, num_actions: u8) -> RuleBase {
        let mut rules: Vec<CnfRule> = self
            .alleles
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0)
            .map(|(gene, &a)| CnfRule::elementary(&self.tag.subspace(gene), a))
            .collect();

        'restart: loop {
            for i in 0..rules.len() {
                for j in i + 1..rules.len() {
                    if let Some(clause) = merge_site(&rules[i], &rules[j]) {
                        let absorbed = rules.remove(j);
                        rules[i].clauses[clause] |= absorbed.clauses[clause];
                        continue 'restart;
                    }
                }
            }
            break;
        }

        RuleBase { tag: self.tag.clone(), num_actions, rules }
    }
}

/// Index of the single clause in which two same-action rules differ.
fn merge_site(a: &CnfRule, b: &CnfRule) -> Option<usize> {
    if a.action != b.action {
        return None;
    }
    let mut site = None;
    for (i, (x, y)) in a.clauses.iter().zip(&b.clauses).enumerate() {
        if x != y {
            if site.is_some() {
                return None;
            }
            site = Some(i);
        }
    }
    site
}

/// Objective range of rule-base complexity over a set of tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityBounds {
    pub min: u64,
    pub max: u64,
}

impl ComplexityBounds {
    /// Minimum is one decision point per action; maximum is the longest
    /// rule-base genotype.
    pub fn new(tags: &[SubspeciesTag], num_actions: u8) -> Self {
        let max = tags.iter().map(|t| t.rb_len() as u64).max().unwrap_or(0);
        Self { min: u64::from(num_actions), max }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tag(g: &[usize]) -> SubspeciesTag {
        SubspeciesTag::new(g.to_vec()).unwrap()
    }

    #[test]
    fn tag_validation_and_lengths() {
        assert!(SubspeciesTag::new(vec![1, 3]).is_err());
        assert!(SubspeciesTag::new(vec![]).is_err());
        assert_eq!(tag(&[2, 2]).db_len(), 4);
        assert_eq!(tag(&[4, 4]).db_len(), 8);
        assert_eq!(tag(&[5, 5]).db_len(), 10);
        assert_eq!(tag(&[3, 2]).rb_len(), 6);
        assert_eq!(tag(&[5, 5]).rb_len(), 25);
        assert_eq!(tag(&[2, 2]).rb_len(), 4);
    }

    #[test]
    fn tag_text_forms() {
        let t = tag(&[4, 5]);
        assert_eq!(t.to_string(), "(4,5)");
        assert_eq!("(4,5)".parse::<SubspeciesTag>().unwrap(), t);
        assert_eq!("4x5".parse::<SubspeciesTag>().unwrap(), t);
        assert!("(4,1)".parse::<SubspeciesTag>().is_err());
        assert!("(a,b)".parse::<SubspeciesTag>().is_err());
    }

    #[test]
    fn gene_order_is_nested_loops() {
        let t = tag(&[3, 2]);
        let order: Vec<_> = (0..6).map(|g| t.subspace(g)).collect();
        assert_eq!(order, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1], vec![2, 0], vec![2, 1]]);
    }

    #[test]
    fn two_set_decode_by_hand() {
        let g = DbGenotype::new(tag(&[2, 2]), vec![0.5, 0.5, 0.5, 0.5]).unwrap();
        let db = g.decode(&[Interval::new(0.0, 1.0); 2], DEFAULT_OMEGA).unwrap();
        let sets = &db.partitions[0].sets;
        assert_eq!(sets[0], FuzzySet::LowerTrapezoid { plateau_end: 0.25, zero_at: 0.75 });
        assert_eq!(sets[1], FuzzySet::UpperTrapezoid { zero_at: 0.25, plateau_start: 0.75 });
    }

    #[test]
    fn extreme_alleles_hit_valid_region_edges() {
        let dom = Interval::new(-1.2, 0.5);
        let w = dom.width() / 3.0;
        let r = reference_coordinates(&[0.0, 1.0, 0.0], dom, 0.75);
        assert!((r[0] - (dom.min + 0.125 * w)).abs() < 1e-12);
        assert!((r[1] - (dom.min + w + 0.875 * w)).abs() < 1e-12);
        assert!((r[2] - (dom.min + 2.0 * w + 0.125 * w)).abs() < 1e-12);
    }

    #[test]
    fn db_genotype_validation() {
        assert!(DbGenotype::new(tag(&[2, 2]), vec![0.5; 3]).is_err());
        assert!(DbGenotype::new(tag(&[2, 2]), vec![0.5, 0.5, 1.5, 0.5]).is_err());
        let g = DbGenotype::new(tag(&[2, 2]), vec![0.5; 4]).unwrap();
        assert!(g.decode(&[Interval::new(0.0, 1.0)], 0.75).is_err());
    }

    fn rb(t: &[usize], alleles: &[u8]) -> RbGenotype {
        RbGenotype::new(tag(t), alleles.to_vec(), 2).unwrap()
    }

    #[test]
    fn worked_example_decodes_to_five_decision_points() {
        let g = rb(&[3, 2], &[2, 0, 1, 1, 2, 1]);
        assert_eq!(g.complexity(), 5);
        let base = g.decode(2);
        assert_eq!(base.complexity(), 5);
        // x1 is M and x2 is # THEN 1
        assert!(base.rules.contains(&CnfRule { clauses: vec![0b010, 0b11], action: 1 }));
        assert_eq!(
            base.rules,
            vec![
                CnfRule { clauses: vec![0b101, 0b01], action: 2 },
                CnfRule { clauses: vec![0b010, 0b11], action: 1 },
                CnfRule { clauses: vec![0b100, 0b10], action: 1 },
            ]
        );
    }

    #[test]
    fn single_specified_allele_is_one_elementary_rule() {
        let base = rb(&[3, 3], &[0, 0, 0, 0, 2, 0, 0, 0, 0]).decode(2);
        assert_eq!(base.rules, vec![CnfRule::elementary(&[1, 1], 2)]);
        assert_eq!(base.complexity(), 1);
    }

    #[test]
    fn uniform_genotype_collapses_to_dont_care() {
        let base = rb(&[2, 2], &[1, 1, 1, 1]).decode(2);
        assert_eq!(base.rules, vec![CnfRule { clauses: vec![0b11, 0b11], action: 1 }]);
        assert_eq!(base.complexity(), 4);
    }

    #[test]
    fn unspecified_genotype_decodes_to_empty_rule_base() {
        let g = rb(&[2, 2], &[0, 0, 0, 0]);
        assert_eq!(g.complexity(), 0);
        assert!(g.decode(2).is_empty());
    }

    #[test]
    fn rb_genotype_validation() {
        assert!(RbGenotype::new(tag(&[2, 2]), vec![0, 1, 2], 2).is_err());
        assert!(RbGenotype::new(tag(&[2, 2]), vec![0, 1, 3, 0], 2).is_err());
    }

    #[test]
    fn complexity_of_full_genotype() {
        assert_eq!(rb(&[4, 4], &[1; 16]).complexity(), 16);
    }

    #[test]
    fn complexity_bounds() {
        let defaults: Vec<_> = [[2, 2], [3, 3], [4, 4], [5, 5]].iter().map(|g| tag(g)).collect();
        assert_eq!(ComplexityBounds::new(&defaults, 2), ComplexityBounds { min: 2, max: 25 });
        assert_eq!(ComplexityBounds::new(&[tag(&[2, 2])], 2), ComplexityBounds { min: 2, max: 4 });
        assert_eq!(ComplexityBounds::new(&[tag(&[3, 3])], 3), ComplexityBounds { min: 3, max: 9 });
    }

    #[test]
    fn tag_serde_rejects_invalid() {
        assert!(serde_json::from_str::<SubspeciesTag>("[4,4]").is_ok());
        assert!(serde_json::from_str::<SubspeciesTag>("[4,1]").is_err());
    }
}
