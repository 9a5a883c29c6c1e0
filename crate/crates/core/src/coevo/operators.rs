//! Initialization and variation operators for both species.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::genotype::{DbGenotype, RbGenotype, SubspeciesTag};
use crate::Action;

/// Lower and upper limits of the line-recombination coefficient.
pub const LINE_RECOMBINATION_RANGE: (f64, f64) = (-0.25, 1.25);

pub fn random_db_genotype<R: Rng + ?Sized>(tag: &SubspeciesTag, rng: &mut R) -> DbGenotype {
    DbGenotype { tag: tag.clone(), alleles: (0..tag.db_len()).map(|_| rng.random::<f64>()).collect() }
}

/// Each allele is unspecified with probability `p_unspec`, otherwise a
/// uniformly chosen action. The result is repaired to at least `k`
/// specified alleles.
pub fn random_rb_genotype<R: Rng + ?Sized>(tag: &SubspeciesTag, p_unspec: f64, k: u8, rng: &mut R) -> RbGenotype {
    let alleles =
        (0..tag.rb_len()).map(|_| if rng.random::<f64>() < p_unspec { 0 } else { rng.random_range(1..=k) }).collect();
    let mut g = RbGenotype { tag: tag.clone(), alleles };
    repair(&mut g, k, rng);
    g
}

/// Genewise `t * a + (1 - t) * b` and its mirror.
pub fn line_recombination(a: &[f64], b: &[f64], t: f64) -> (Vec<f64>, Vec<f64>) {
    let c1 = a.iter().zip(b).map(|(x, y)| t * x + (1.0 - t) * y).collect();
    let c2 = a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect();
    (c1, c2)
}

/// Real-coded variation: line recombination with probability `p_cross`
/// (one coefficient per pair), then zero-mean Gaussian noise on every gene,
/// then clamping to `[0, 1]`.
pub fn db_cross_mutate<R: Rng + ?Sized>(
    a: &DbGenotype,
    b: &DbGenotype,
    p_cross: f64,
    mut_sigma: f64,
    rng: &mut R,
) -> (DbGenotype, DbGenotype) {
    debug_assert_eq!(a.tag, b.tag);
    let (mut c1, mut c2) = if rng.random::<f64>() < p_cross {
        let t = rng.random_range(LINE_RECOMBINATION_RANGE.0..LINE_RECOMBINATION_RANGE.1);
        line_recombination(&a.alleles, &b.alleles, t)
    } else {
        (a.alleles.clone(), b.alleles.clone())
    };
    if mut_sigma > 0.0 {
        let noise = Normal::new(0.0, mut_sigma).expect("sigma is finite and positive");
        for g in c1.iter_mut().chain(c2.iter_mut()) {
            *g += noise.sample(rng);
        }
    }
    for g in c1.iter_mut().chain(c2.iter_mut()) {
        *g = g.clamp(0.0, 1.0);
    }
    (DbGenotype { tag: a.tag.clone(), alleles: c1 }, DbGenotype { tag: a.tag.clone(), alleles: c2 })
}

/// Switch an allele to one of the other `k` values of `0..=k`, uniformly.
pub fn mutate_allele<R: Rng + ?Sized>(allele: Action, k: u8, rng: &mut R) -> Action {
    let draw = rng.random_range(0..k);
    if draw >= allele {
        draw + 1
    } else {
        draw
    }
}

/// Raise the number of specified alleles to `k` by assigning random actions
/// to randomly chosen unspecified alleles.
pub fn repair<R: Rng + ?Sized>(g: &mut RbGenotype, k: u8, rng: &mut R) {
    let target = usize::from(k).min(g.alleles.len());
    loop {
        let specified = g.alleles.iter().filter(|&&a| a != 0).count();
        if specified >= target {
            return;
        }
        let unspecified: Vec<usize> = (0..g.alleles.len()).filter(|&i| g.alleles[i] == 0).collect();
        let i = unspecified[rng.random_range(0..unspecified.len())];
        g.alleles[i] = rng.random_range(1..=k);
    }
}

/// Categorical variation: per-allele uniform crossover (swap with
/// probability `p_cross`), per-allele mutation with probability `p_mut`,
/// then repair.
pub fn rb_cross_mutate_repair<R: Rng + ?Sized>(
    a: &RbGenotype,
    b: &RbGenotype,
    p_cross: f64,
    p_mut: f64,
    k: u8,
    rng: &mut R,
) -> (RbGenotype, RbGenotype) {
    debug_assert_eq!(a.tag, b.tag);
    let mut c1 = a.clone();
    let mut c2 = b.clone();
    for i in 0..c1.alleles.len() {
        if rng.random::<f64>() < p_cross {
            std::mem::swap(&mut c1.alleles[i], &mut c2.alleles[i]);
        }
    }
    for child in [&mut c1, &mut c2] {
        for allele in child.alleles.iter_mut() {
            if rng.random::<f64>() < p_mut {
                *allele = mutate_allele(*allele, k, rng);
            }
        }
        repair(child, k, rng);
    }
    (c1, c2)
}
