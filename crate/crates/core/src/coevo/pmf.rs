use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::genotype::SubspeciesTag;

/// Probability mass over subspecies tags, in the order the tags were given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspeciesPmf {
    pub tags: Vec<SubspeciesTag>,
    pub probabilities: Vec<f64>,
}

impl SubspeciesPmf {
    /// Mass proportional to `beta ^ len(tag)`.
    pub fn from_lengths(tags: &[SubspeciesTag], beta: f64, len: impl Fn(&SubspeciesTag) -> usize) -> Self {
        // Normalize in log space so large genotypes cannot overflow.
        let logs: Vec<f64> = tags.iter().map(|t| len(t) as f64 * beta.ln()).collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        Self { tags: tags.to_vec(), probabilities: weights.iter().map(|w| w / total).collect() }
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn probability(&self, tag: &SubspeciesTag) -> Option<f64> {
        self.tags.iter().position(|t| t == tag).map(|i| self.probabilities[i])
    }

    /// Draw a tag index.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_weighted(&self.probabilities, rng)
    }
}

/// Draw an index proportionally to `weights` (not necessarily normalized).
pub(crate) fn sample_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        if u < w {
            return i;
        }
        u -= w;
        last = i;
    }
    last
}

/// Subspecies distributions for the data-base and rule-base species.
pub fn make_subspecies_dists(tags: &[SubspeciesTag], beta: f64) -> (SubspeciesPmf, SubspeciesPmf) {
    (
        SubspeciesPmf::from_lengths(tags, beta, SubspeciesTag::db_len),
        SubspeciesPmf::from_lengths(tags, beta, SubspeciesTag::rb_len),
    )
}

/// Tag sampler that gives up on tags found empty too often in a row.
///
/// After `MAX_MISSES` consecutive draws of tags the caller reported empty,
/// the mass is renormalized over the tags that still have members.
pub(crate) struct TagSampler<'a> {
    pmf: &'a SubspeciesPmf,
    weights: Vec<f64>,
    misses: usize,
}

pub(crate) const MAX_MISSES: usize = 100;

impl<'a> TagSampler<'a> {
    pub fn new(pmf: &'a SubspeciesPmf) -> Self {
        Self { pmf, weights: pmf.probabilities.clone(), misses: 0 }
    }

    /// Draw a tag index whose subpopulation is non-empty according to
    /// `is_empty`. Returns `None` only if every tag is empty.
    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R, is_empty: impl Fn(usize) -> bool) -> Option<usize> {
        loop {
            if (0..self.pmf.len()).all(&is_empty) {
                return None;
            }
            let i = sample_weighted(&self.weights, rng);
            if !is_empty(i) {
                self.misses = 0;
                return Some(i);
            }
            self.misses += 1;
            if self.misses >= MAX_MISSES {
                for (j, w) in self.weights.iter_mut().enumerate() {
                    *w = if is_empty(j) { 0.0 } else { self.pmf.probabilities[j] };
                }
                self.misses = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    fn default_tags() -> Vec<SubspeciesTag> {
        [2, 3, 4, 5].iter().map(|&m| SubspeciesTag::new(vec![m, m]).unwrap()).collect()
    }

    #[test]
    fn unit_beta_is_uniform() {
        let (d1, d2) = make_subspecies_dists(&default_tags(), 1.0);
        for d in [d1, d2] {
            assert!(d.probabilities.iter().all(|&p| (p - 0.25).abs() < 1e-15));
        }
    }

    #[test]
    fn rule_base_mass_follows_genotype_length() {
        let (d1, d2) = make_subspecies_dists(&default_tags(), 1.125);
        // Direct evaluation of beta^len / sum.
        let raw: Vec<f64> = [4, 9, 16, 25].iter().map(|&l| 1.125f64.powi(l)).collect();
        let total: f64 = raw.iter().sum();
        for (p, r) in d2.probabilities.iter().zip(&raw) {
            assert!((p - r / total).abs() < 1e-12);
        }
        let rounded: Vec<f64> = d2.probabilities.iter().map(|p| (p * 1000.0).round() / 1000.0).collect();
        assert_eq!(rounded, vec![0.053, 0.096, 0.219, 0.632]);
        assert!((d1.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((d2.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singleton_tag_set() {
        let (d1, d2) = make_subspecies_dists(&default_tags()[..1], 1.125);
        assert_eq!(d1.probabilities, vec![1.0]);
        assert_eq!(d2.probabilities, vec![1.0]);
    }

    #[test]
    fn sampling_tracks_mass() {
        let (_, d2) = make_subspecies_dists(&default_tags(), 1.125);
        let mut rng = stream(5, Stream::Breeding);
        let mut counts = [0usize; 4];
        for _ in 0..20_000 {
            counts[d2.sample(&mut rng)] += 1;
        }
        for (c, p) in counts.iter().zip(&d2.probabilities) {
            assert!((*c as f64 / 20_000.0 - p).abs() < 0.015);
        }
    }

    #[test]
    fn tag_sampler_skips_empty_tags() {
        let (_, d2) = make_subspecies_dists(&default_tags(), 1.125);
        let mut sampler = TagSampler::new(&d2);
        let mut rng = stream(1, Stream::Breeding);
        // Only the rarest tag has members.
        for _ in 0..50 {
            assert_eq!(sampler.draw(&mut rng, |i| i != 0), Some(0));
        }
        assert_eq!(sampler.draw(&mut rng, |_| true), None);
    }
}
