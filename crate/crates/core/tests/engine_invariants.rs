use std::collections::HashMap;

use fuzzy_mococo::coevo::{run_fuzzy_mococo, Hyperparams, RunOutcome};
use fuzzy_mococo::environment::McConfig;
use fuzzy_mococo::nsga::crowded_cmp;

fn small() -> Hyperparams {
    Hyperparams { num_gens: 6, db_pop_size: 40, rb_pop_size: 71, eta: 5, ..Hyperparams::default() }
}

fn run(seed: u64) -> RunOutcome {
    run_fuzzy_mococo(&small(), &McConfig::default(), seed, |_| {}).unwrap()
}

#[test]
fn populations_keep_their_sizes_and_tags() {
    let hp = small();
    let out = run(11);
    assert_eq!(out.r1.len(), 2 * hp.db_pop_size);
    assert_eq!(out.r2.len(), 2 * hp.rb_pop_size);
    for r in &out.generations[1..] {
        assert_eq!(r.db_counts.iter().sum::<usize>(), hp.db_pop_size);
        assert_eq!(r.rb_counts.iter().sum::<usize>(), hp.rb_pop_size);
    }
    assert!(out.r1.iter().all(|i| hp.subspecies.contains(&i.genotype.tag)));
    assert!(out.r2.iter().all(|i| hp.subspecies.contains(&i.genotype.tag) && i.genotype.complexity() >= 2));
    for s in &out.solutions {
        assert_eq!(s.db.tag, s.rb.tag);
        assert_eq!(s.frbs.tag(), &s.db.tag);
        assert_eq!(s.complexity, s.rb.complexity());
    }
}

#[test]
fn every_individual_is_credited_once() {
    let hp = small();
    let out = run(12);
    let per_gen = hp.db_pop_size + hp.rb_pop_size;
    assert_eq!(out.individuals_created(), per_gen * hp.num_gens);
    assert!(out.evaluation_counts.iter().all(|&c| c == 1));
    assert!(out.r1.iter().all(|i| i.credit.is_some()));
    assert!(out.r2.iter().all(|i| i.credit.is_some()));
}

#[test]
fn credits_replay_against_the_last_solution_set() {
    let hp = small();
    let out = run(13);
    // Only the last generation's children were credited from this set.
    let first_child = (out.individuals_created() - hp.db_pop_size - hp.rb_pop_size) as u64;
    let worst = out.bounds.worst();
    let mut best_db: HashMap<u64, usize> = HashMap::new();
    let mut best_rb: HashMap<u64, usize> = HashMap::new();
    for (i, s) in out.solutions.iter().enumerate() {
        for (map, id) in [(&mut best_db, s.db_id), (&mut best_rb, s.rb_id)] {
            let e = map.entry(id).or_insert(i);
            if crowded_cmp(&s.annotation, &out.solutions[*e].annotation).is_lt() {
                *e = i;
            }
        }
    }
    let expect = |map: &HashMap<u64, usize>, id: u64| map.get(&id).map_or(worst, |&i| out.solutions[i].objectives());
    for i in out.r1.iter().filter(|i| i.id >= first_child) {
        assert_eq!(i.credit, Some(expect(&best_db, i.id)));
    }
    for i in out.r2.iter().filter(|i| i.id >= first_child) {
        assert_eq!(i.credit, Some(expect(&best_rb, i.id)));
    }
}

#[test]
fn same_seed_same_run() {
    let a = run(21);
    let b = run(21);
    assert_eq!(a.solutions, b.solutions);
    assert_eq!(a.generations, b.generations);
    assert_eq!(a.r1, b.r1);
    assert_eq!(a.r2, b.r2);
    let c = run(22);
    assert_ne!(a.r2, c.r2);
}

#[test]
fn single_subspecies_run() {
    let hp = Hyperparams { subspecies: vec!["(3,3)".parse().unwrap()], ..small() };
    let out = run_fuzzy_mococo(&hp, &McConfig::default(), 4, |_| {}).unwrap();
    assert!(out.evaluation_counts.iter().all(|&c| c == 1));
    assert!(out.front().iter().all(|s| s.tag().to_string() == "(3,3)"));
}
