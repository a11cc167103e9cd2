//! Seeded random instances.
//!
//! X instances: tasks are split into an L1-only group, an L2-only group and a
//! shared group. Each group's endpoints (`t_a, t_b` and `t_c, t_d`) belong to
//! their constraint's own group. Tasks are laid out along one global order
//!
//! ```text
//! t_a t_c | F1 ∪ F2 | B | K1 ∪ K2 | t_b t_d
//! ```
//!
//! where F/K split each exclusive interior into an early and a late part and
//! B is the shared group. All edges point forward in that order. Edges are
//! only drawn inside `U1 = {t_a} ∪ F1 ∪ B ∪ K1 ∪ {t_b}`, inside the matching
//! `U2`, or from F1 to K2 and from F2 to K1, which keeps every group exactly
//! under its constraint(s). Tasks are named `t1..tn` in layout order.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Task, TaskGraph, TaskIdx};
use crate::instance::LatencyConstraint;
use crate::pairs::{classify_pair, constrained_tasks, PairKind};
use crate::paths::{enumerate_paths, DEFAULT_PATH_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    pub density: f64,
    pub seed: u64,
    pub wcet_min: u64,
    pub wcet_max: u64,
}

impl GeneratorSpec {
    pub fn new(n: usize, density: f64, seed: u64) -> Self {
        GeneratorSpec {
            n,
            density,
            seed,
            wcet_min: 1,
            wcet_max: 10,
        }
    }

    pub fn with_wcet(self, lo: u64, hi: u64) -> Self {
        GeneratorSpec {
            wcet_min: lo,
            wcet_max: hi,
            ..self
        }
    }

    pub fn unit(self) -> Self {
        self.with_wcet(1, 1)
    }

    /// `round(density · n(n−1)/2)`.
    pub fn edge_budget(&self) -> usize {
        edge_budget(self.n, self.density)
    }

    fn check(&self, min_n: usize) -> Result<()> {
        if self.n < min_n {
            return Err(Error::InfeasibleSpec(format!(
                "need at least {min_n} tasks, got {}",
                self.n
            )));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::InfeasibleSpec(format!(
                "density must lie in (0, 1], got {}",
                self.density
            )));
        }
        if self.wcet_min == 0 || self.wcet_min > self.wcet_max {
            return Err(Error::InfeasibleSpec(format!(
                "bad WCET range [{}, {}]",
                self.wcet_min, self.wcet_max
            )));
        }
        Ok(())
    }
}

pub fn edge_budget(n: usize, density: f64) -> usize {
    let possible = (n * n.saturating_sub(1) / 2) as f64;
    (density * possible).round() as usize
}

/// Group sizes (L1-only, L2-only, shared) for `n` tasks. The two exclusive
/// groups take 40% each, rounded to nearest, and include their endpoints.
pub fn group_sizes(n: usize) -> (usize, usize, usize) {
    let g = (2 * n + 2) / 5; // round(0.4 n), halves up
    (g, g, n - 2 * g)
}

#[derive(Debug, Clone)]
pub struct XInstance {
    pub graph: TaskGraph,
    pub c1: LatencyConstraint,
    pub c2: LatencyConstraint,
    pub l1_only: Vec<TaskIdx>,
    pub l2_only: Vec<TaskIdx>,
    pub both: Vec<TaskIdx>,
}

#[derive(Debug, Clone)]
pub struct SingleInstance {
    pub graph: TaskGraph,
    pub constraint: LatencyConstraint,
}

fn draw_wcets(rng: &mut ChaCha8Rng, spec: &GeneratorSpec) -> Vec<u64> {
    (0..spec.n)
        .map(|_| rng.gen_range(spec.wcet_min..=spec.wcet_max))
        .collect()
}

fn build_graph(wcets: &[u64], edges: &BTreeSet<(usize, usize)>) -> Result<TaskGraph> {
    let tasks = wcets
        .iter()
        .enumerate()
        .map(|(i, &w)| Task::new(format!("t{}", i + 1), w))
        .collect();
    let edges = edges
        .iter()
        .map(|&(u, v)| (format!("t{}", u + 1), format!("t{}", v + 1)))
        .collect();
    TaskGraph::new(tasks, edges)
}

/// Splits `interior` (sorted by position) into `k` non-empty chains and
/// links each from `source` to `sink`.
fn chain_edges(
    rng: &mut ChaCha8Rng,
    source: usize,
    sink: usize,
    interior: &[usize],
    k: usize,
) -> Vec<(usize, usize)> {
    if interior.is_empty() {
        return vec![(source, sink)];
    }
    let mut shuffled = interior.to_vec();
    shuffled.shuffle(rng);
    let mut chains: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &t) in shuffled.iter().enumerate() {
        let c = if i < k { i } else { rng.gen_range(0..k) };
        chains[c].push(t);
    }
    let mut out = Vec::new();
    for mut chain in chains {
        chain.sort_unstable();
        let mut prev = source;
        for t in chain {
            out.push((prev, t));
            prev = t;
        }
        out.push((prev, sink));
    }
    out
}

/// Spanning structure for the given universes: chains through each interior
/// with `k_i` drawn at random and reduced until the budget fits.
fn spanning(
    rng: &mut ChaCha8Rng,
    universes: &[(usize, usize, Vec<usize>)],
    budget: usize,
) -> Result<BTreeSet<(usize, usize)>> {
    let mut ks: Vec<usize> = universes
        .iter()
        .map(|(_, _, interior)| rng.gen_range(1..=interior.len().div_ceil(2).max(1)))
        .collect();
    loop {
        let mut edges = BTreeSet::new();
        for ((s, t, interior), &k) in universes.iter().zip(&ks) {
            edges.extend(chain_edges(rng, *s, *t, interior, k));
        }
        if edges.len() <= budget {
            return Ok(edges);
        }
        let (largest, &k) = ks
            .iter()
            .enumerate()
            .max_by_key(|&(i, &k)| (k, std::cmp::Reverse(i)))
            .expect("at least one universe");
        if k == 1 {
            return Err(Error::InfeasibleSpec(format!(
                "edge budget {budget} is below the {} edges needed to connect all groups",
                edges.len()
            )));
        }
        ks[largest] -= 1;
    }
}

fn fill(
    rng: &mut ChaCha8Rng,
    edges: &mut BTreeSet<(usize, usize)>,
    pool: BTreeSet<(usize, usize)>,
    budget: usize,
) -> Result<()> {
    let mut free: Vec<(usize, usize)> = pool.difference(edges).copied().collect();
    let missing = budget - edges.len();
    if free.len() < missing {
        return Err(Error::InfeasibleSpec(format!(
            "edge budget {budget} exceeds the {} admissible edges",
            edges.len() + free.len()
        )));
    }
    free.shuffle(rng);
    edges.extend(free.into_iter().take(missing));
    Ok(())
}

fn forward_pairs(members: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    members
        .iter()
        .enumerate()
        .flat_map(move |(i, &u)| members[i + 1..].iter().map(move |&v| (u, v)))
}

/// Random X instance. Both constraint bounds are set to the WCET sum of the
/// tasks under the constraint.
pub fn generate_x_instance(spec: &GeneratorSpec) -> Result<XInstance> {
    spec.check(6)?;
    let n = spec.n;
    let budget = spec.edge_budget();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (g1, g2, nb) = group_sizes(n);

    // interiors split into early (F) and late (K) parts
    let mut split = |len: usize| -> (usize, usize) {
        let early = (0..len).filter(|_| rng.gen_bool(0.5)).count();
        (early, len - early)
    };
    let (f1n, k1n) = split(g1 - 2);
    let (f2n, k2n) = split(g2 - 2);

    // role of each layout phase, shuffled within the phase
    #[derive(Clone, Copy, PartialEq)]
    enum Role {
        F1,
        F2,
        B,
        K1,
        K2,
    }
    let mut early: Vec<Role> = [vec![Role::F1; f1n], vec![Role::F2; f2n]].concat();
    early.shuffle(&mut rng);
    let mut late: Vec<Role> = [vec![Role::K1; k1n], vec![Role::K2; k2n]].concat();
    late.shuffle(&mut rng);
    let middle = vec![Role::B; nb];

    let (ta, tc) = (0, 1);
    let (tb, td) = (n - 2, n - 1);
    let mut f1 = Vec::new();
    let mut f2 = Vec::new();
    let mut b = Vec::new();
    let mut k1 = Vec::new();
    let mut k2 = Vec::new();
    for (pos, role) in early.iter().chain(&middle).chain(&late).enumerate() {
        let t = pos + 2;
        match role {
            Role::F1 => f1.push(t),
            Role::F2 => f2.push(t),
            Role::B => b.push(t),
            Role::K1 => k1.push(t),
            Role::K2 => k2.push(t),
        }
    }

    let interior1: Vec<usize> = [&f1[..], &b[..], &k1[..]].concat();
    let interior2: Vec<usize> = [&f2[..], &b[..], &k2[..]].concat();
    let mut u1 = interior1.clone();
    u1.insert(0, ta);
    u1.push(tb);
    let mut u2 = interior2.clone();
    u2.insert(0, tc);
    u2.push(td);
    u1.sort_unstable();
    u2.sort_unstable();

    let mut edges = spanning(
        &mut rng,
        &[(ta, tb, sorted(interior1)), (tc, td, sorted(interior2))],
        budget,
    )?;

    // one cross edge per direction between the exclusive interiors
    for (from, to) in [(&f1, &k2), (&f2, &k1)] {
        if from.is_empty() || to.is_empty() || edges.len() >= budget {
            continue;
        }
        let u = from[rng.gen_range(0..from.len())];
        let v = to[rng.gen_range(0..to.len())];
        edges.insert((u, v));
    }

    let mut pool: BTreeSet<(usize, usize)> = forward_pairs(&u1).collect();
    pool.extend(forward_pairs(&u2));
    for (from, to) in [(&f1, &k2), (&f2, &k1)] {
        for &u in from {
            for &v in to {
                pool.insert((u, v));
            }
        }
    }
    fill(&mut rng, &mut edges, pool, budget)?;

    let wcets = draw_wcets(&mut rng, spec);
    let graph = build_graph(&wcets, &edges)?;
    let bound_of = |members: &[usize]| members.iter().map(|&t| wcets[t]).sum::<u64>();
    let c1 = LatencyConstraint::new(graph.id(ta), graph.id(tb), bound_of(&u1));
    let c2 = LatencyConstraint::new(graph.id(tc), graph.id(td), bound_of(&u2));

    let mut l1_only = [&[ta][..], &f1, &k1, &[tb]].concat();
    let mut l2_only = [&[tc][..], &f2, &k2, &[td]].concat();
    l1_only.sort_unstable();
    l2_only.sort_unstable();
    Ok(XInstance {
        graph,
        c1,
        c2,
        l1_only,
        l2_only,
        both: b,
    })
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// Random single-constraint instance: `t1` is the only source, `tn` the only
/// sink and every task lies on a `t1 → tn` path.
pub fn generate_single_instance(spec: &GeneratorSpec) -> Result<SingleInstance> {
    spec.check(3)?;
    let n = spec.n;
    let budget = spec.edge_budget();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let all: Vec<usize> = (0..n).collect();
    let mut edges = spanning(&mut rng, &[(0, n - 1, all[1..n - 1].to_vec())], budget)?;
    fill(&mut rng, &mut edges, forward_pairs(&all).collect(), budget)?;
    let wcets = draw_wcets(&mut rng, spec);
    let graph = build_graph(&wcets, &edges)?;
    let constraint = LatencyConstraint::new(graph.id(0), graph.id(n - 1), wcets.iter().sum());
    Ok(SingleInstance { graph, constraint })
}

/// Unstructured random DAG: each forward pair of `t1..tn` becomes an edge
/// with probability `edge_prob`.
pub fn random_dag(n: usize, edge_prob: f64, seed: u64, wcet: (u64, u64)) -> TaskGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = BTreeSet::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(edge_prob) {
                edges.insert((u, v));
            }
        }
    }
    let wcets: Vec<u64> = (0..n).map(|_| rng.gen_range(wcet.0..=wcet.1)).collect();
    build_graph(&wcets, &edges).expect("forward edges form a DAG")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceStats {
    pub tasks: usize,
    pub edges: usize,
    pub density: f64,
    pub l1_only: usize,
    pub l2_only: usize,
    pub both: usize,
    pub paths1: usize,
    pub paths2: usize,
    pub kind: PairKind,
}

pub fn instance_stats(
    graph: &TaskGraph,
    c1: &LatencyConstraint,
    c2: &LatencyConstraint,
) -> Result<InstanceStats> {
    let (a, b) = c1.endpoints(graph)?;
    let (c, d) = c2.endpoints(graph)?;
    let under1 = constrained_tasks(graph, c1)?;
    let under2 = constrained_tasks(graph, c2)?;
    let both = under1.iter().filter(|t| under2.contains(t)).count();
    let n = graph.len();
    let possible = n * n.saturating_sub(1) / 2;
    Ok(InstanceStats {
        tasks: n,
        edges: graph.edge_count(),
        density: if possible == 0 {
            0.0
        } else {
            graph.edge_count() as f64 / possible as f64
        },
        l1_only: under1.len() - both,
        l2_only: under2.len() - both,
        both,
        paths1: enumerate_paths(graph, a, b, DEFAULT_PATH_CAP)?.len(),
        paths2: enumerate_paths(graph, c, d, DEFAULT_PATH_CAP)?.len(),
        kind: classify_pair(graph, c1, c2)?.kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_sizes_for_twelve() {
        assert_eq!(group_sizes(12), (5, 5, 2));
        assert_eq!(group_sizes(6), (2, 2, 2));
        assert_eq!(group_sizes(16), (6, 6, 4));
    }

    #[test]
    fn budget_examples() {
        assert_eq!(edge_budget(12, 0.25), 17);
        assert_eq!(edge_budget(12, 0.5), 33);
    }

    #[test]
    fn x_instance_shape() {
        let inst = generate_x_instance(&GeneratorSpec::new(12, 0.25, 42)).unwrap();
        let stats = instance_stats(&inst.graph, &inst.c1, &inst.c2).unwrap();
        assert_eq!(stats.edges, 17);
        assert_eq!((stats.l1_only, stats.l2_only, stats.both), (5, 5, 2));
        assert_eq!(stats.kind, PairKind::X);
    }

    #[test]
    fn too_sparse_is_infeasible() {
        let err = generate_x_instance(&GeneratorSpec::new(8, 0.2, 1)).unwrap_err();
        assert!(matches!(err, Error::InfeasibleSpec(_)));
        assert!(generate_x_instance(&GeneratorSpec::new(5, 0.9, 1)).is_err());
    }

    #[test]
    fn single_instance_covers_everything() {
        let inst = generate_single_instance(&GeneratorSpec::new(10, 0.3, 7)).unwrap();
        let (a, b) = inst.constraint.endpoints(&inst.graph).unwrap();
        assert_eq!(inst.graph.between(a, b).len(), 10);
        assert_eq!(inst.graph.edge_count(), edge_budget(10, 0.3));
    }
}
