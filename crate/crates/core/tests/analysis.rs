mod common;

use latsched::analysis::{evaluate_allocation, lower_bound_single, lower_bounds_x};
use latsched::generator::{generate_single_instance, generate_x_instance, GeneratorSpec};
use latsched::rational::{self, Rational};
use latsched::{
    allocate, analyze_system, check_single, check_x_pair, CommModel, LatencyConstraint, Mode,
    PairKind, DEFAULT_PATH_CAP,
};
use proptest::prelude::*;

fn int(v: i64) -> Rational {
    Rational::from_integer(v)
}

#[test]
fn fig1_single_verdicts() {
    let g = common::fig1();
    let c = LatencyConstraint::new("t1", "t7", 9);
    let free = CommModel::free();
    let v = check_single(&g, &c, &free, Mode::Literal, DEFAULT_PATH_CAP).unwrap();
    assert_eq!((v.m, v.shared_sum, v.exclusive_max), (3, 4, 3));
    assert_eq!(v.lhs, int(7));
    assert_eq!(v.slack, int(2));
    assert!(v.schedulable);

    let strict = check_single(&g, &c, &free, Mode::Strict, DEFAULT_PATH_CAP).unwrap();
    assert_eq!(strict.lhs, int(6));

    let linear = check_single(&g, &c, &CommModel::linear(int(5)), Mode::Literal, DEFAULT_PATH_CAP).unwrap();
    assert_eq!(linear.lhs, int(17));
    assert!(!linear.schedulable);

    let log = check_single(&g, &c, &CommModel::log(int(4)), Mode::Literal, DEFAULT_PATH_CAP).unwrap();
    let expected = 7.0 + 4.0 * 3f64.log2();
    assert!((rational::to_f64(&log.lhs) - expected).abs() < 1e-6);

    let tight = check_single(&g, &c.with_bound(6), &free, Mode::Literal, DEFAULT_PATH_CAP).unwrap();
    assert_eq!(tight.slack, int(-1));
    assert!(!tight.schedulable);
}

#[test]
fn crossed_bounds() {
    let g = common::crossed();
    let c1 = LatencyConstraint::new("t1", "t4", 4);
    let c2 = LatencyConstraint::new("t9", "t11", 4);
    let free = CommModel::free();
    let lit = check_x_pair(&g, &c1, &c2, &free, Mode::Literal, DEFAULT_PATH_CAP).unwrap();
    assert_eq!((lit.m1, lit.m2, lit.m), (2, 2, 4));
    assert_eq!((lit.cross1, lit.cross2), (int(3), int(5)));
    assert_eq!((lit.cross1_paths, lit.cross2_paths), (1, 1));
    let lb = lit.lower_bounds();
    assert_eq!((lb.bounds[0].value, lb.bounds[1].value), (int(4), int(5)));
    assert!(!lb.bounds[0].necessarily_unschedulable);
    assert!(lb.bounds[1].necessarily_unschedulable);
    assert!(!lit.schedulable);

    let strict = lower_bounds_x(&g, &c1, &c2, &free, Mode::Strict, DEFAULT_PATH_CAP).unwrap();
    assert_eq!((strict.bounds[0].value, strict.bounds[1].value), (int(3), int(4)));

    let q = check_x_pair(&g, &c1, &c2, &CommModel::linear(int(1)), Mode::Literal, DEFAULT_PATH_CAP).unwrap();
    // joint overhead uses m = 4
    assert_eq!(q.cross2, int(5 + 3));
    assert_eq!(q.first.lhs, int(4 + 1));
}

#[test]
fn fully_overlapping_pair_reduces_to_single() {
    let g = common::fig1();
    let c = LatencyConstraint::new("t1", "t7", 9);
    for (mode, want) in [(Mode::Literal, 7), (Mode::Strict, 6)] {
        let lb = lower_bounds_x(&g, &c, &c, &CommModel::free(), mode, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(lb.bounds[0].value, int(want));
        assert_eq!(lb.bounds[1].value, int(want));
    }
}

#[test]
fn generated_system_report() {
    let inst = generate_x_instance(&GeneratorSpec::new(12, 0.4, 42)).unwrap();
    let report = analyze_system(
        &inst.graph,
        &[inst.c1.clone(), inst.c2.clone()],
        &CommModel::free(),
        Mode::Literal,
        DEFAULT_PATH_CAP,
    );
    assert!(report.errors.is_empty());
    assert_eq!(report.constraints.len(), 2);
    assert!(report.constraints.iter().all(|c| c.verdict.is_some()));
    assert_eq!(report.pairs.len(), 1);
    assert_eq!(report.pairs[0].kind, Some(PairKind::X));
    let x = report.pairs[0].x.as_ref().unwrap();
    assert!(x.m >= x.m1.max(x.m2));
    assert!(x.m <= x.m1 + x.m2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn single_expression_matches_set_oracle(
        n in 3usize..=12, density in 0.2f64..0.6, seed in any::<u64>(), q in 0i64..4,
    ) {
        let Ok(inst) = generate_single_instance(&GeneratorSpec::new(n, density, seed)) else {
            return Ok(());
        };
        let g = &inst.graph;
        let alloc = allocate(g, &inst.constraint, DEFAULT_PATH_CAP).unwrap();
        let chosen: Vec<Vec<usize>> = alloc.selected.iter().map(|&i| alloc.paths.paths[i].tasks.clone()).collect();
        let comm = CommModel::linear(int(q));
        let overhead = int(q * (alloc.m as i64 - 1));
        for (mode, drop) in [(Mode::Literal, false), (Mode::Strict, true)] {
            let v = evaluate_allocation(g, &alloc, &comm, mode);
            prop_assert_eq!(v.lhs, int(common::set_expression(g, &chosen, drop) as i64) + overhead);
            let lb = lower_bound_single(g, &inst.constraint, &comm, mode, DEFAULT_PATH_CAP).unwrap();
            prop_assert_eq!(lb.bounds[0].value, v.lhs);
        }
    }

    #[test]
    fn verdict_is_monotone_in_bound(n in 3usize..=10, seed in any::<u64>(), bound in 0u64..80) {
        let Ok(inst) = generate_single_instance(&GeneratorSpec::new(n, 0.4, seed)) else {
            return Ok(());
        };
        let c = inst.constraint.with_bound(bound);
        let v = check_single(&inst.graph, &c, &CommModel::free(), Mode::Literal, DEFAULT_PATH_CAP).unwrap();
        prop_assert_eq!(v.schedulable, v.lhs <= int(bound as i64));
        if v.schedulable {
            let looser = check_single(&inst.graph, &c.with_bound(bound + 1), &CommModel::free(), Mode::Literal, DEFAULT_PATH_CAP).unwrap();
            prop_assert!(looser.schedulable);
        }
        let strict = check_single(&inst.graph, &c, &CommModel::free(), Mode::Strict, DEFAULT_PATH_CAP).unwrap();
        let (_, b) = c.endpoints(&inst.graph).unwrap();
        prop_assert_eq!(strict.lhs + int(inst.graph.wcet(b) as i64), v.lhs);
    }

    #[test]
    fn x_bounds_match_longest_cross_paths(n in 6usize..=14, density in 0.3f64..0.6, seed in any::<u64>()) {
        let Ok(inst) = generate_x_instance(&GeneratorSpec::new(n, density, seed)) else {
            return Ok(());
        };
        let g = &inst.graph;
        let (a, b) = inst.c1.endpoints(g).unwrap();
        let (c, d) = inst.c2.endpoints(g).unwrap();
        let longest = |from, to| {
            common::brute_paths(g, from, to)
                .iter()
                .map(|p| p.iter().map(|&t| g.wcet(t)).sum::<u64>())
                .max()
                .unwrap()
        };
        let x = check_x_pair(g, &inst.c1, &inst.c2, &CommModel::free(), Mode::Strict, DEFAULT_PATH_CAP).unwrap();
        prop_assert_eq!(x.cross1, int((longest(c, b) - g.wcet(b)) as i64));
        prop_assert_eq!(x.cross2, int((longest(a, d) - g.wcet(d)) as i64));
        let lb = x.lower_bounds();
        prop_assert_eq!(lb.bounds[0].value, x.first.lhs.max(x.cross1));
        prop_assert_eq!(lb.bounds[1].value, x.second.lhs.max(x.cross2));
    }
}
