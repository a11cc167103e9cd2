//! Fixtures and brute-force reference implementations shared by the
//! integration tests. Nothing here calls into the code under test beyond
//! graph accessors.

#![allow(dead_code)]

use std::collections::BTreeSet;

use latsched::graph::{TaskGraph, TaskIdx};

/// The 11-task graph with unit WCETs, latency constraint on (t1, t7).
pub fn fig1() -> TaskGraph {
    let tasks: Vec<(String, u64)> = (1..=11).map(|i| (format!("t{i}"), 1)).collect();
    let tasks: Vec<(&str, u64)> = tasks.iter().map(|(s, w)| (s.as_str(), *w)).collect();
    TaskGraph::from_lists(
        &tasks,
        &[
            ("t1", "t2"),
            ("t2", "t3"),
            ("t3", "t4"),
            ("t4", "t5"),
            ("t5", "t6"),
            ("t6", "t7"),
            ("t1", "t8"),
            ("t8", "t9"),
            ("t9", "t4"),
            ("t5", "t10"),
            ("t10", "t7"),
            ("t2", "t11"),
            ("t11", "t4"),
            ("t11", "t6"),
        ],
    )
    .unwrap()
}

pub fn fig1_paths() -> Vec<Vec<String>> {
    let raw: [&[u32]; 7] = [
        &[1, 2, 3, 4, 5, 6, 7],
        &[1, 8, 9, 4, 5, 6, 7],
        &[1, 2, 3, 4, 5, 10, 7],
        &[1, 8, 9, 4, 5, 10, 7],
        &[1, 2, 11, 4, 5, 6, 7],
        &[1, 2, 11, 4, 5, 10, 7],
        &[1, 2, 11, 6, 7],
    ];
    raw.iter()
        .map(|p| p.iter().map(|i| format!("t{i}")).collect())
        .collect()
}

/// Graph with two latency constraints (t1, t4) and (t9, t11) in X.
pub fn crossed() -> TaskGraph {
    let tasks: Vec<String> = (1..=11).map(|i| format!("t{i}")).collect();
    let tasks: Vec<(&str, u64)> = tasks.iter().map(|s| (s.as_str(), 1)).collect();
    TaskGraph::from_lists(
        &tasks,
        &[
            ("t1", "t2"),
            ("t2", "t3"),
            ("t3", "t4"),
            ("t1", "t5"),
            ("t5", "t7"),
            ("t7", "t4"),
            ("t9", "t3"),
            ("t3", "t10"),
            ("t10", "t11"),
            ("t9", "t6"),
            ("t6", "t8"),
            ("t8", "t11"),
        ],
    )
    .unwrap()
}

/// Every source-to-sink path by plain recursion over successor lists.
pub fn brute_paths(g: &TaskGraph, from: TaskIdx, to: TaskIdx) -> BTreeSet<Vec<TaskIdx>> {
    fn walk(g: &TaskGraph, at: TaskIdx, to: TaskIdx, prefix: &mut Vec<TaskIdx>, out: &mut BTreeSet<Vec<TaskIdx>>) {
        prefix.push(at);
        if at == to {
            out.insert(prefix.clone());
        } else {
            for &s in g.successors(at) {
                walk(g, s, to, prefix, out);
            }
        }
        prefix.pop();
    }
    let mut out = BTreeSet::new();
    walk(g, from, to, &mut Vec::new(), &mut out);
    out
}

/// Reachability by depth-first search, at least one edge.
pub fn brute_reaches(g: &TaskGraph, from: TaskIdx, to: TaskIdx) -> bool {
    let mut stack: Vec<TaskIdx> = g.successors(from).to_vec();
    let mut seen = vec![false; g.len()];
    while let Some(u) = stack.pop() {
        if u == to {
            return true;
        }
        if !seen[u] {
            seen[u] = true;
            stack.extend_from_slice(g.successors(u));
        }
    }
    false
}

/// Tasks on some `from -> to` path, via the brute path list.
pub fn brute_between(g: &TaskGraph, from: TaskIdx, to: TaskIdx) -> BTreeSet<TaskIdx> {
    brute_paths(g, from, to).into_iter().flatten().collect()
}

/// Path-sum expression over a chosen list of paths, from set operations:
/// WCET of tasks on every path, plus the largest WCET sum of tasks found on
/// exactly one path. `drop_sink` removes the sink's WCET.
pub fn set_expression(g: &TaskGraph, paths: &[Vec<TaskIdx>], drop_sink: bool) -> u64 {
    let sets: Vec<BTreeSet<TaskIdx>> = paths.iter().map(|p| p.iter().copied().collect()).collect();
    let mut common = sets[0].clone();
    for s in &sets[1..] {
        common = common.intersection(s).copied().collect();
    }
    let shared: u64 = common.iter().map(|&t| g.wcet(t)).sum();
    let exclusive = if sets.len() == 1 {
        0
    } else {
        sets.iter()
            .enumerate()
            .map(|(i, s)| {
                s.iter()
                    .filter(|t| sets.iter().enumerate().all(|(j, o)| j == i || !o.contains(t)))
                    .map(|&t| g.wcet(t))
                    .sum::<u64>()
            })
            .max()
            .unwrap()
    };
    let sink = *paths[0].last().unwrap();
    shared + exclusive - if drop_sink { g.wcet(sink) } else { 0 }
}

/// Best (primary, secondary) start values over every list schedule: each
/// step appends any ready task to the end of any processor. Processors are
/// labelled by first use. No bounding.
pub fn exhaustive_best(
    g: &TaskGraph,
    procs: usize,
    primary: TaskIdx,
    secondary: Option<TaskIdx>,
    q_edge: u64,
) -> (u64, u64) {
    struct St<'a> {
        g: &'a TaskGraph,
        procs: usize,
        q: u64,
        start: Vec<Option<(u64, usize)>>,
        avail: Vec<u64>,
        used: usize,
        best: (u64, u64),
        primary: TaskIdx,
        secondary: Option<TaskIdx>,
    }
    fn go(s: &mut St, placed: usize) {
        let n = s.g.len();
        if placed == n {
            let p = s.start[s.primary].unwrap().0;
            let q = s.secondary.map_or(0, |t| s.start[t].unwrap().0);
            s.best = s.best.min((p, q));
            return;
        }
        for t in 0..n {
            if s.start[t].is_some() || s.g.predecessors(t).iter().any(|&p| s.start[p].is_none()) {
                continue;
            }
            for proc in 0..(s.used + 1).min(s.procs) {
                let mut at = s.avail[proc];
                for &p in s.g.predecessors(t) {
                    let (ps, pp) = s.start[p].unwrap();
                    let delay = if pp == proc { 0 } else { s.q };
                    at = at.max(ps + s.g.wcet(p) + delay);
                }
                let saved = (s.avail[proc], s.used);
                s.start[t] = Some((at, proc));
                s.avail[proc] = at + s.g.wcet(t);
                s.used = s.used.max(proc + 1);
                go(s, placed + 1);
                s.start[t] = None;
                s.avail[proc] = saved.0;
                s.used = saved.1;
            }
        }
    }
    let mut s = St {
        g,
        procs,
        q: q_edge,
        start: vec![None; g.len()],
        avail: vec![0; procs],
        used: 0,
        best: (u64::MAX, u64::MAX),
        primary,
        secondary,
    };
    go(&mut s, 0);
    s.best
}
