//! Two-objective NSGA-II machinery: Pareto dominance, fast non-dominated
//! sorting, crowding distance and the crowded-comparison order.
//!
//! Performance is maximized and complexity minimized. Crowding distances are
//! normalized by fixed, known objective bounds rather than by the spread of
//! each front.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::genotype::ComplexityBounds;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectivePoint {
    pub perf: f64,
    pub complexity: u64,
}

impl ObjectivePoint {
    pub const fn new(perf: f64, complexity: u64) -> Self {
        Self { perf, complexity }
    }
}

/// `a` is at least as good as `b` on both objectives and strictly better on
/// one.
pub fn dominates(a: &ObjectivePoint, b: &ObjectivePoint) -> bool {
    a.perf >= b.perf && a.complexity <= b.complexity && (a.perf > b.perf || a.complexity < b.complexity)
}

/// Known objective ranges used to normalize crowding distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBounds {
    pub perf_min: f64,
    pub perf_max: f64,
    pub complexity_min: u64,
    pub complexity_max: u64,
}

impl ObjectiveBounds {
    pub fn new(perf_min: f64, perf_max: f64, complexity: ComplexityBounds) -> Self {
        Self { perf_min, perf_max, complexity_min: complexity.min, complexity_max: complexity.max }
    }

    pub fn perf_width(&self) -> f64 {
        self.perf_max - self.perf_min
    }

    pub fn complexity_width(&self) -> f64 {
        (self.complexity_max - self.complexity_min) as f64
    }

    /// Worst corner of the objective space.
    pub fn worst(&self) -> ObjectivePoint {
        ObjectivePoint::new(self.perf_min, self.complexity_max)
    }
}

/// Pareto rank (1 = non-dominated) and crowding distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoAnnotation {
    pub rank: usize,
    pub crowding: f64,
}

/// Deb's fast non-dominated sort. Returns the 1-based front rank of every
/// point.
pub fn fast_non_dominated_sort(points: &[ObjectivePoint]) -> Vec<usize> {
    let n = points.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for p in 0..n {
        for q in p + 1..n {
            if dominates(&points[p], &points[q]) {
                dominated_by_me[p].push(q);
                domination_count[q] += 1;
            } else if dominates(&points[q], &points[p]) {
                dominated_by_me[q].push(p);
                domination_count[p] += 1;
            }
        }
    }

    let mut ranks = vec![0usize; n];
    let mut front: Vec<usize> = (0..n).filter(|&p| domination_count[p] == 0).collect();
    let mut rank = 1;
    while !front.is_empty() {
        let mut next = Vec::new();
        for &p in &front {
            ranks[p] = rank;
            for &q in &dominated_by_me[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        front = next;
        rank += 1;
    }
    ranks
}

/// Crowding distance of every point of a single front.
///
/// Per objective, points are ordered by value (input order on ties); the two
/// extremes get `+inf`, interior points add the gap between their neighbours
/// divided by the objective's bound width.
pub fn crowding_distances(front: &[ObjectivePoint], bounds: &ObjectiveBounds) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        return dist;
    }
    let mut order: Vec<usize> = (0..n).collect();

    order.sort_by(|&a, &b| front[a].perf.total_cmp(&front[b].perf));
    accumulate(&mut dist, &order, |i| front[i].perf, bounds.perf_width());

    order.sort_by_key(|&i| front[i].complexity);
    accumulate(&mut dist, &order, |i| front[i].complexity as f64, bounds.complexity_width());

    dist
}

fn accumulate(dist: &mut [f64], order: &[usize], value: impl Fn(usize) -> f64, width: f64) {
    let last = order.len() - 1;
    dist[order[0]] = f64::INFINITY;
    dist[order[last]] = f64::INFINITY;
    if width <= 0.0 {
        return;
    }
    for k in 1..last {
        let gap = value(order[k + 1]) - value(order[k - 1]);
        dist[order[k]] += gap / width;
    }
}

/// Ranks and crowding distances for a whole collection; crowding is computed
/// within each front.
pub fn annotate(points: &[ObjectivePoint], bounds: &ObjectiveBounds) -> Vec<MoAnnotation> {
    let ranks = fast_non_dominated_sort(points);
    let mut out: Vec<MoAnnotation> = ranks.iter().map(|&rank| MoAnnotation { rank, crowding: 0.0 }).collect();
    let max_rank = ranks.iter().copied().max().unwrap_or(0);
    for r in 1..=max_rank {
        let members: Vec<usize> = (0..points.len()).filter(|&i| ranks[i] == r).collect();
        let front: Vec<ObjectivePoint> = members.iter().map(|&i| points[i]).collect();
        for (&i, d) in members.iter().zip(crowding_distances(&front, bounds)) {
            out[i].crowding = d;
        }
    }
    out
}

/// Crowded-comparison order: lower rank first, then larger crowding distance.
pub fn crowded_cmp(a: &MoAnnotation, b: &MoAnnotation) -> Ordering {
    a.rank.cmp(&b.rank).then_with(|| b.crowding.total_cmp(&a.crowding))
}

/// Indices of `annotations` in crowded-comparison order. Stable: exact ties
/// keep input order.
pub fn crowded_order(annotations: &[MoAnnotation]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..annotations.len()).collect();
    order.sort_by(|&a, &b| crowded_cmp(&annotations[a], &annotations[b]));
    order
}

/// Annotate `points` among themselves and return them in crowded-comparison
/// order.
pub fn crowded_comparison_sort(points: &[ObjectivePoint], bounds: &ObjectiveBounds) -> Vec<usize> {
    crowded_order(&annotate(points, bounds))
}

/// Index of the crowded-comparison best, first occurrence on ties.
pub fn crowded_best(annotations: &[MoAnnotation]) -> Option<usize> {
    (0..annotations.len()).reduce(|best, i| {
        if crowded_cmp(&annotations[i], &annotations[best]) == Ordering::Less {
            i
        } else {
            best
        }
    })
}
