use std::collections::{HashMap, HashSet};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operators::{db_cross_mutate, random_db_genotype, random_rb_genotype, rb_cross_mutate_repair};
use super::pmf::{make_subspecies_dists, SubspeciesPmf, TagSampler};
use super::{
    subpopulation, ConfigError, DbIndividual, Genome, Hyperparams, Individual, RbIndividual, Solution, Species,
};
use crate::environment::{evaluate_performance, InitialStateSet, McConfig};
use crate::fuzzy::Frbs;
use crate::genotype::{ComplexityBounds, SubspeciesTag};
use crate::nsga::{annotate, crowded_best, crowded_cmp, MoAnnotation, ObjectiveBounds, ObjectivePoint};
use crate::rng::{stream, Stream};

fn credits<G>(pop: &[Individual<G>], members: &[usize], worst: ObjectivePoint) -> Vec<ObjectivePoint> {
    members.iter().map(|&i| pop[i].credit.unwrap_or(worst)).collect()
}

/// Two collaborators from a subpopulation, as indices into `pop`.
///
/// Generation 0 picks two distinct members at random. Later generations take
/// the crowded-comparison best (annotated within the subpopulation) and a
/// random member of the rest. A singleton is returned twice; an empty
/// subpopulation yields no collaborators.
pub fn select_collaborators<G, R: Rng + ?Sized>(
    pop: &[Individual<G>],
    members: &[usize],
    generation: usize,
    bounds: &ObjectiveBounds,
    rng: &mut R,
) -> Vec<usize> {
    match members.len() {
        0 => Vec::new(),
        1 => vec![members[0], members[0]],
        n => {
            let first = if generation == 0 {
                rng.random_range(0..n)
            } else {
                let ann = annotate(&credits(pop, members, bounds.worst()), bounds);
                crowded_best(&ann).expect("non-empty")
            };
            let mut second = rng.random_range(0..n - 1);
            if second >= first {
                second += 1;
            }
            vec![members[first], members[second]]
        }
    }
}

/// Collaborators per subspecies tag (in tag order) for both species.
#[derive(Debug, Clone, PartialEq)]
pub struct CollaboratorMap {
    pub db: Vec<Vec<DbIndividual>>,
    pub rb: Vec<Vec<RbIndividual>>,
}

impl CollaboratorMap {
    pub fn build<R: Rng + ?Sized>(
        p1: &[DbIndividual],
        p2: &[RbIndividual],
        tags: &[SubspeciesTag],
        generation: usize,
        bounds: &ObjectiveBounds,
        rng: &mut R,
    ) -> Self {
        fn pick<G: Genome, R: Rng + ?Sized>(
            pop: &[Individual<G>],
            tag: &SubspeciesTag,
            generation: usize,
            bounds: &ObjectiveBounds,
            rng: &mut R,
        ) -> Vec<Individual<G>> {
            let members = subpopulation(pop, tag);
            select_collaborators(pop, &members, generation, bounds, rng).into_iter().map(|i| pop[i].clone()).collect()
        }
        let db = tags.iter().map(|t| pick(p1, t, generation, bounds, rng)).collect();
        let rb = tags.iter().map(|t| pick(p2, t, generation, bounds, rng)).collect();
        Self { db, rb }
    }
}

/// A data-base and rule-base individual paired for evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Pairing<'a> {
    pub db: &'a DbIndividual,
    pub rb: &'a RbIndividual,
}

/// Pair every individual of `o1` and `o2` with the opposite species'
/// collaborators of its tag. Pairs are unique by component ids; the first
/// occurrence wins.
pub fn build_solution_set<'a>(
    o1: &'a [DbIndividual],
    o2: &'a [RbIndividual],
    tags: &[SubspeciesTag],
    chi: &'a CollaboratorMap,
) -> Vec<Pairing<'a>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut push = |p: Pairing<'a>| {
        if seen.insert((p.db.id, p.rb.id)) {
            out.push(p);
        }
    };
    for (t, tag) in tags.iter().enumerate() {
        for i in subpopulation(o1, tag) {
            for rb in &chi.rb[t] {
                push(Pairing { db: &o1[i], rb });
            }
        }
    }
    for (t, tag) in tags.iter().enumerate() {
        for i in subpopulation(o2, tag) {
            for db in &chi.db[t] {
                push(Pairing { db, rb: &o2[i] });
            }
        }
    }
    out
}

/// Decode, roll out and score every pairing, then annotate the whole set
/// with front ranks and crowding distances. Rollouts run in parallel; the
/// result keeps input order.
pub fn evaluate_solution_set(
    pairs: &[Pairing<'_>],
    hp: &Hyperparams,
    config: &McConfig,
    starts: &InitialStateSet,
    bounds: &ObjectiveBounds,
) -> Vec<Solution> {
    let k = config.num_actions();
    let domains = config.feature_domains();
    let mut solutions: Vec<Solution> = pairs
        .par_iter()
        .map(|p| {
            let db = p.db.genotype.decode(&domains, hp.omega).expect("tag arity checked at validation");
            let rb = p.rb.genotype.decode(k);
            let frbs = Frbs::new(db, rb).expect("paired individuals share a tag");
            let result = evaluate_performance(&frbs, starts, config).expect("rule actions lie in 1..=k");
            Solution {
                db_id: p.db.id,
                rb_id: p.rb.id,
                db: p.db.genotype.clone(),
                rb: p.rb.genotype.clone(),
                frbs,
                perf: result.perf,
                failed: result.failed,
                complexity: p.rb.genotype.complexity(),
                annotation: MoAnnotation { rank: 0, crowding: 0.0 },
            }
        })
        .collect();
    let points: Vec<ObjectivePoint> = solutions.iter().map(Solution::objectives).collect();
    for (s, a) in solutions.iter_mut().zip(annotate(&points, bounds)) {
        s.annotation = a;
    }
    solutions
}

/// Credit each individual with the objectives of the crowded-comparison best
/// solution containing it (first in solution order on ties). Individuals in
/// no solution get `orphan`.
pub fn assign_credit<G: Genome>(pop: &mut [Individual<G>], solutions: &[Solution], orphan: ObjectivePoint) {
    let mut best: HashMap<u64, usize> = HashMap::new();
    for (i, s) in solutions.iter().enumerate() {
        let id = match G::SPECIES {
            Species::Db => s.db_id,
            Species::Rb => s.rb_id,
        };
        best.entry(id)
            .and_modify(|b| {
                if crowded_cmp(&s.annotation, &solutions[*b].annotation).is_lt() {
                    *b = i;
                }
            })
            .or_insert(i);
    }
    for idv in pop.iter_mut() {
        idv.credit = Some(best.get(&idv.id).map_or(orphan, |&i| solutions[i].objectives()));
    }
}

/// Fill a parent population of `num_parents` from `r`: repeatedly draw a
/// tag from `pmf` and move the crowded-comparison best remaining member of
/// that subpopulation (annotated within the subpopulation) into the result.
pub fn archive_parent_pop<G: Genome, R: Rng + ?Sized>(
    r: Vec<Individual<G>>,
    pmf: &SubspeciesPmf,
    num_parents: usize,
    bounds: &ObjectiveBounds,
    rng: &mut R,
) -> Vec<Individual<G>> {
    assert!(r.len() >= num_parents, "cannot archive {num_parents} parents from {} candidates", r.len());
    let mut groups: Vec<Vec<Individual<G>>> = vec![Vec::new(); pmf.len()];
    for idv in r {
        let t = pmf.tags.iter().position(|t| t == idv.tag()).expect("individual tag belongs to the run");
        groups[t].push(idv);
    }
    let mut sampler = TagSampler::new(pmf);
    let mut parents = Vec::with_capacity(num_parents);
    while parents.len() < num_parents {
        let Some(t) = sampler.draw(rng, |t| groups[t].is_empty()) else {
            break;
        };
        let all: Vec<usize> = (0..groups[t].len()).collect();
        let ann = annotate(&credits(&groups[t], &all, bounds.worst()), bounds);
        let best = crowded_best(&ann).expect("non-empty");
        parents.push(groups[t].remove(best));
    }
    parents
}

/// Breed `parents.len()` children. Each round draws a tag from `pmf`, picks
/// two parents from that subpopulation by binary tournament under the
/// crowded comparison, and appends both children of `vary`. Children get
/// fresh ids from `next_id`; a surplus child from an odd target is dropped
/// before ids are handed out.
pub fn breed_children<G: Genome, R: Rng + ?Sized>(
    parents: &[Individual<G>],
    pmf: &SubspeciesPmf,
    bounds: &ObjectiveBounds,
    next_id: &mut u64,
    rng: &mut R,
    mut vary: impl FnMut(&G, &G, &mut R) -> (G, G),
) -> Vec<Individual<G>> {
    let groups: Vec<Vec<usize>> = pmf.tags.iter().map(|t| subpopulation(parents, t)).collect();
    let mut cached: Vec<Option<Vec<MoAnnotation>>> = vec![None; pmf.len()];
    let mut sampler = TagSampler::new(pmf);
    let mut children: Vec<G> = Vec::with_capacity(parents.len() + 1);
    while children.len() < parents.len() {
        let t = sampler.draw(rng, |t| groups[t].is_empty()).expect("parent population is non-empty");
        let members = &groups[t];
        let ann = cached[t].get_or_insert_with(|| annotate(&credits(parents, members, bounds.worst()), bounds));
        let tournament = |rng: &mut R| {
            let a = rng.random_range(0..members.len());
            let b = rng.random_range(0..members.len());
            let winner = if crowded_cmp(&ann[b], &ann[a]).is_lt() { b } else { a };
            &parents[members[winner]].genotype
        };
        let pa = tournament(rng);
        let pb = tournament(rng);
        let (ca, cb) = vary(pa, pb, rng);
        children.push(ca);
        children.push(cb);
    }
    children.truncate(parents.len());
    children
        .into_iter()
        .map(|genotype| {
            let id = *next_id;
            *next_id += 1;
            Individual { id, genotype, credit: None }
        })
        .collect()
}

/// Summary of one generation's evaluation phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    /// Evaluated data-base individuals per tag, in tag order.
    pub db_counts: Vec<usize>,
    /// Evaluated rule-base individuals per tag, in tag order.
    pub rb_counts: Vec<usize>,
    pub num_solutions: usize,
    pub num_failed: usize,
    pub best_perf: f64,
    pub mean_perf: f64,
    pub front_size: usize,
}

impl GenerationRecord {
    fn new(
        generation: usize,
        tags: &[SubspeciesTag],
        o1: &[DbIndividual],
        o2: &[RbIndividual],
        s: &[Solution],
    ) -> Self {
        let count = |f: &dyn Fn(&SubspeciesTag) -> usize| tags.iter().map(f).collect::<Vec<_>>();
        let perfs = s.iter().map(|s| s.perf);
        Self {
            generation,
            db_counts: count(&|t| subpopulation(o1, t).len()),
            rb_counts: count(&|t| subpopulation(o2, t).len()),
            num_solutions: s.len(),
            num_failed: s.iter().filter(|s| s.failed).count(),
            best_perf: perfs.clone().fold(f64::NEG_INFINITY, f64::max),
            mean_perf: if s.is_empty() { f64::NAN } else { perfs.sum::<f64>() / s.len() as f64 },
            front_size: s.iter().filter(|s| s.annotation.rank == 1).count(),
        }
    }
}

/// Everything a finished run produces.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Final combined data-base population (parents and last children).
    pub r1: Vec<DbIndividual>,
    /// Final combined rule-base population.
    pub r2: Vec<RbIndividual>,
    /// Last evaluated solution set.
    pub solutions: Vec<Solution>,
    pub generations: Vec<GenerationRecord>,
    pub initial_states: InitialStateSet,
    pub bounds: ObjectiveBounds,
    /// Number of times each individual id was credited. Ids are dense from 0.
    pub evaluation_counts: Vec<u32>,
}

impl RunOutcome {
    /// Rank-1 solutions of the last evaluated set, in solution order.
    pub fn front(&self) -> Vec<&Solution> {
        self.solutions.iter().filter(|s| s.annotation.rank == 1).collect()
    }

    pub fn individuals_created(&self) -> usize {
        self.evaluation_counts.len()
    }
}

/// Run the full generational loop on Mountain Car.
///
/// Generation 0 evaluates the initial parents against each other. Every
/// later generation evaluates the children of the previous one against
/// collaborators chosen from the current parents, so each individual is
/// credited exactly once. Parents and children are then merged, archived
/// into new parents, and bred. The last generation stops after evaluation:
/// children bred there could never be scored.
pub fn run_fuzzy_mococo(
    hp: &Hyperparams,
    config: &McConfig,
    seed: u64,
    mut observer: impl FnMut(&GenerationRecord),
) -> Result<RunOutcome, ConfigError> {
    hp.validate(config.feature_domains().len())?;
    let k = config.num_actions();
    let tags = &hp.subspecies;
    let bounds = ObjectiveBounds::new(config.min_return(), config.perf_upper_bound, ComplexityBounds::new(tags, k));
    let worst = bounds.worst();
    let (delta1, delta2) = make_subspecies_dists(tags, hp.beta);
    let starts = InitialStateSet::sample(seed, hp.eta);

    let mut init_rng = stream(seed, Stream::Initialization);
    let mut collab_rng = stream(seed, Stream::Collaborators);
    let mut breed_rng = stream(seed, Stream::Breeding);

    let n1 = hp.db_pop_size as u64;
    let n2 = hp.rb_pop_size as u64;
    let mut p1: Vec<DbIndividual> = (0..n1)
        .map(|id| {
            let tag = &tags[delta1.sample(&mut init_rng)];
            Individual { id, genotype: random_db_genotype(tag, &mut init_rng), credit: None }
        })
        .collect();
    let mut p2: Vec<RbIndividual> = (n1..n1 + n2)
        .map(|id| {
            let tag = &tags[delta2.sample(&mut init_rng)];
            Individual { id, genotype: random_rb_genotype(tag, hp.rb_p_unspec, k, &mut init_rng), credit: None }
        })
        .collect();
    let mut next_id = n1 + n2;
    let mut q1: Vec<DbIndividual> = Vec::new();
    let mut q2: Vec<RbIndividual> = Vec::new();

    let mut evaluation_counts: Vec<u32> = Vec::new();
    let mut generations = Vec::with_capacity(hp.num_gens);
    let mut gen = 0;
    loop {
        let chi = CollaboratorMap::build(&p1, &p2, tags, gen, &bounds, &mut collab_rng);
        let (o1, o2) = if gen == 0 { (&mut p1, &mut p2) } else { (&mut q1, &mut q2) };
        let solutions = {
            let pairs = build_solution_set(o1, o2, tags, &chi);
            evaluate_solution_set(&pairs, hp, config, &starts, &bounds)
        };
        assign_credit(o1, &solutions, worst);
        assign_credit(o2, &solutions, worst);
        evaluation_counts.resize(next_id as usize, 0);
        for id in o1.iter().map(|i| i.id).chain(o2.iter().map(|i| i.id)) {
            evaluation_counts[id as usize] += 1;
        }
        let record = GenerationRecord::new(gen, tags, o1, o2, &solutions);
        observer(&record);
        generations.push(record);

        let mut r1 = std::mem::take(&mut p1);
        r1.append(&mut q1);
        let mut r2 = std::mem::take(&mut p2);
        r2.append(&mut q2);
        gen += 1;
        if gen == hp.num_gens {
            return Ok(RunOutcome {
                r1,
                r2,
                solutions,
                generations,
                initial_states: starts,
                bounds,
                evaluation_counts,
            });
        }

        p1 = archive_parent_pop(r1, &delta1, hp.db_pop_size, &bounds, &mut breed_rng);
        p2 = archive_parent_pop(r2, &delta2, hp.rb_pop_size, &bounds, &mut breed_rng);
        q1 = breed_children(&p1, &delta1, &bounds, &mut next_id, &mut breed_rng, |a, b, rng| {
            db_cross_mutate(a, b, hp.db_p_cross, hp.db_mut_sigma, rng)
        });
        q2 = breed_children(&p2, &delta2, &bounds, &mut next_id, &mut breed_rng, |a, b, rng| {
            rb_cross_mutate_repair(a, b, hp.rb_p_cross, hp.rb_p_mut, k, rng)
        });
    }
}
