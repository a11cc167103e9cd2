mod common;

use latsched::generator::{generate_single_instance, random_dag, GeneratorSpec};
use latsched::{allocate, allocate_pair, check_parallelism_optimality, LatencyConstraint, DEFAULT_PATH_CAP};
use proptest::prelude::*;

#[test]
fn fig1_needs_three_processors() {
    let g = common::fig1();
    let alloc = allocate(&g, &LatencyConstraint::new("t1", "t7", 9), DEFAULT_PATH_CAP).unwrap();
    assert_eq!(alloc.m, 3);
    let doc = alloc.to_doc(&g);
    assert_eq!(
        doc.selected_paths,
        vec![
            vec!["t1", "t2", "t3", "t4", "t5", "t6", "t7"],
            vec!["t1", "t8", "t9", "t4", "t5", "t10", "t7"],
            vec!["t1", "t2", "t11", "t4", "t5", "t6", "t7"],
        ]
    );
    let proc_of = |id: &str| doc.assignment[id];
    for id in ["t1", "t2", "t3", "t4", "t5", "t6", "t7"] {
        assert_eq!(proc_of(id), 0);
    }
    for id in ["t8", "t9", "t10"] {
        assert_eq!(proc_of(id), 1);
    }
    assert_eq!(proc_of("t11"), 2);
    assert!(check_parallelism_optimality(&g, &alloc).is_empty());
}

#[test]
fn adversarial_allocation_is_caught() {
    let g = common::fig1();
    let mut alloc = allocate(&g, &LatencyConstraint::new("t1", "t7", 9), DEFAULT_PATH_CAP).unwrap();
    let t3 = g.index_of("t3").unwrap();
    let t8 = g.index_of("t8").unwrap();
    alloc.assignment[t3] = Some(7);
    alloc.assignment[t8] = Some(7);
    assert_eq!(check_parallelism_optimality(&g, &alloc), vec![(t3, t8)]);
}

#[test]
fn crossed_pair_counts() {
    let g = common::crossed();
    let pair = allocate_pair(
        &g,
        &LatencyConstraint::new("t1", "t4", 9),
        &LatencyConstraint::new("t9", "t11", 9),
        DEFAULT_PATH_CAP,
    )
    .unwrap();
    assert_eq!((pair.first.m, pair.second.m, pair.m), (2, 2, 4));
    let doc = pair.joint_doc(&g);
    assert_eq!(doc.m, 4);
    // t3 stays where the first constraint put it
    assert_eq!(doc.assignment["t3"], 0);
    assert_eq!(doc.assignment.len(), 11);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn allocation_invariants(n in 3usize..=12, density in 0.2f64..0.6, seed in any::<u64>()) {
        let Ok(inst) = generate_single_instance(&GeneratorSpec::new(n, density, seed)) else {
            return Ok(());
        };
        let g = &inst.graph;
        let alloc = allocate(g, &inst.constraint, DEFAULT_PATH_CAP).unwrap();
        prop_assert_eq!(alloc.m, alloc.selected.len());
        prop_assert!(alloc.m >= 1 && alloc.m <= alloc.paths.len());
        // everything under the constraint is placed, nothing else
        let (a, b) = inst.constraint.endpoints(g).unwrap();
        let under = common::brute_between(g, a, b);
        for t in 0..g.len() {
            prop_assert_eq!(alloc.assignment[t].is_some(), under.contains(&t));
        }
        // processor k hosts a subset of the k-th selected path
        for (t, p) in alloc.assignment.iter().enumerate() {
            let p = p.unwrap_or(0);
            if alloc.assignment[t].is_some() {
                prop_assert!(alloc.paths.paths[alloc.selected[p]].contains(t));
            }
        }
        // tasks sharing a processor are linked by a path
        for u in 0..g.len() {
            for v in u + 1..g.len() {
                if alloc.assignment[u].is_some() && alloc.assignment[u] == alloc.assignment[v] {
                    prop_assert!(common::brute_reaches(g, u, v) || common::brute_reaches(g, v, u));
                }
            }
        }
        prop_assert!(check_parallelism_optimality(g, &alloc).is_empty());
        // the first pick is a longest path
        let first = &alloc.paths.paths[alloc.selected[0]];
        prop_assert_eq!(Some(first.length), alloc.paths.max_length());
    }

    #[test]
    fn arbitrary_dags(n in 3usize..=10, p in 0.2f64..0.7, seed in any::<u64>()) {
        let g = random_dag(n, p, seed, (1, 6));
        if !common::brute_reaches(&g, 0, n - 1) {
            return Ok(());
        }
        let c = LatencyConstraint::new(g.id(0), g.id(n - 1), 1);
        let alloc = allocate(&g, &c, DEFAULT_PATH_CAP).unwrap();
        prop_assert!(check_parallelism_optimality(&g, &alloc).is_empty());
    }
}
