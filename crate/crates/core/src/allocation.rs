//! Path-based task-to-processor allocation.
//!
//! Paths are taken greedily: first the longest one, then repeatedly the path
//! bringing the largest WCET of not-yet-allocated tasks. Each selected path
//! gets its own processor, which hosts the tasks that path claims first.
//! Ties are broken by the lexicographically smallest task sequence.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;
use crate::graph::{Reachability, TaskGraph, TaskIdx};
use crate::instance::LatencyConstraint;
use crate::paths::{enumerate_paths, PathSet};

#[derive(Debug, Clone)]
pub struct Allocation {
    pub constraint: LatencyConstraint,
    /// All enumerated paths, lexicographic order.
    pub paths: PathSet,
    /// Indices into `paths.paths`, in selection order.
    pub selected: Vec<usize>,
    /// Processor of each task under the constraint; `None` elsewhere.
    pub assignment: Vec<Option<usize>>,
    /// Number of selected paths, i.e. processors used.
    pub m: usize,
}

impl Allocation {
    /// The selected paths with their own shared/exclusive decomposition.
    pub fn selected_set(&self) -> PathSet {
        self.paths.restrict(self.assignment.len(), &self.selected)
    }

    pub fn to_doc(&self, graph: &TaskGraph) -> AllocationDoc {
        AllocationDoc {
            m: self.m,
            assignment: assignment_doc(graph, &self.assignment),
            selected_paths: self
                .selected
                .iter()
                .map(|&i| graph.id_vec(&self.paths.paths[i].tasks))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AllocationDoc {
    pub m: usize,
    pub assignment: BTreeMap<String, usize>,
    pub selected_paths: Vec<Vec<String>>,
}

fn assignment_doc(graph: &TaskGraph, assignment: &[Option<usize>]) -> BTreeMap<String, usize> {
    assignment
        .iter()
        .enumerate()
        .filter_map(|(t, p)| p.map(|p| (graph.id(t).to_string(), p)))
        .collect()
}

/// Runs the selection loop over `paths`. Tasks already in `claimed` count as
/// allocated; newly selected paths get processors `next_proc, next_proc+1, ..`.
/// Returns the selected path indices.
pub(crate) fn select_paths(
    graph: &TaskGraph,
    paths: &PathSet,
    claimed: &mut [Option<usize>],
    next_proc: usize,
) -> Vec<usize> {
    let mut selected = Vec::new();
    let mut taken = vec![false; paths.len()];
    loop {
        let uncovered = paths.members.iter().any(|&t| claimed[t].is_none());
        if !uncovered {
            break;
        }
        let mut best: Option<(u64, usize)> = None;
        for (i, p) in paths.paths.iter().enumerate() {
            if taken[i] {
                continue;
            }
            let gain: u64 = p
                .tasks
                .iter()
                .filter(|&&t| claimed[t].is_none())
                .map(|&t| graph.wcet(t))
                .sum();
            // strict `>` keeps the earliest, i.e. lexicographically smallest
            if best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, i));
            }
        }
        let (gain, pick) = best.expect("an uncovered member lies on an unselected path");
        debug_assert!(gain > 0);
        let proc = next_proc + selected.len();
        for &t in &paths.paths[pick].tasks {
            if claimed[t].is_none() {
                claimed[t] = Some(proc);
            }
        }
        taken[pick] = true;
        selected.push(pick);
    }
    selected
}

/// Allocates the tasks under `constraint` to processors.
pub fn allocate(graph: &TaskGraph, constraint: &LatencyConstraint, cap: usize) -> Result<Allocation> {
    let (a, b) = constraint.endpoints(graph)?;
    let paths = enumerate_paths(graph, a, b, cap)?;
    let mut assignment = vec![None; graph.len()];
    let selected = select_paths(graph, &paths, &mut assignment, 0);
    Ok(Allocation {
        constraint: constraint.clone(),
        m: selected.len(),
        paths,
        selected,
        assignment,
    })
}

/// Allocation of two constraints: each one alone (`first.m` = m1,
/// `second.m` = m2) plus a joint run where the second constraint's selection
/// starts from the tasks the first already placed.
#[derive(Debug, Clone)]
pub struct PairAllocation {
    pub first: Allocation,
    pub second: Allocation,
    /// Path indices (into `second.paths`) selected during the joint run.
    pub joint_selected: Vec<usize>,
    pub joint_assignment: Vec<Option<usize>>,
    /// Total processors of the joint run.
    pub m: usize,
}

impl PairAllocation {
    pub fn joint_doc(&self, graph: &TaskGraph) -> AllocationDoc {
        let mut selected_paths: Vec<Vec<String>> = self
            .first
            .selected
            .iter()
            .map(|&i| graph.id_vec(&self.first.paths.paths[i].tasks))
            .collect();
        selected_paths.extend(
            self.joint_selected
                .iter()
                .map(|&i| graph.id_vec(&self.second.paths.paths[i].tasks)),
        );
        AllocationDoc {
            m: self.m,
            assignment: assignment_doc(graph, &self.joint_assignment),
            selected_paths,
        }
    }
}

pub fn allocate_pair(
    graph: &TaskGraph,
    c1: &LatencyConstraint,
    c2: &LatencyConstraint,
    cap: usize,
) -> Result<PairAllocation> {
    let first = allocate(graph, c1, cap)?;
    let second = allocate(graph, c2, cap)?;
    let mut joint = first.assignment.clone();
    let joint_selected = select_paths(graph, &second.paths, &mut joint, first.m);
    Ok(PairAllocation {
        m: first.m + joint_selected.len(),
        first,
        second,
        joint_selected,
        joint_assignment: joint,
    })
}

/// Pairs of mutually unreachable tasks placed on the same processor. An
/// empty result means every bit of available parallelism is exploited.
pub fn check_parallelism_optimality(
    graph: &TaskGraph,
    allocation: &Allocation,
) -> Vec<(TaskIdx, TaskIdx)> {
    let reach = Reachability::new(graph);
    let placed: Vec<(TaskIdx, usize)> = allocation
        .assignment
        .iter()
        .enumerate()
        .filter_map(|(t, p)| p.map(|p| (t, p)))
        .collect();
    let mut bad = Vec::new();
    for (i, &(u, pu)) in placed.iter().enumerate() {
        for &(v, pv) in &placed[i + 1..] {
            if pu == pv && !reach.comparable(u, v) {
                bad.push((u, v));
            }
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::DEFAULT_PATH_CAP;

    #[test]
    fn chain_uses_one_processor() {
        let g = TaskGraph::from_lists(&[("a", 1), ("b", 1), ("c", 1)], &[("a", "b"), ("b", "c")])
            .unwrap();
        let alloc = allocate(&g, &LatencyConstraint::new("a", "c", 3), DEFAULT_PATH_CAP).unwrap();
        assert_eq!(alloc.m, 1);
        assert_eq!(alloc.assignment, vec![Some(0); 3]);
        assert!(check_parallelism_optimality(&g, &alloc).is_empty());
    }

    #[test]
    fn heavier_branch_goes_first() {
        // s -> x(5) -> t, s -> y(2) -> t
        let g = TaskGraph::from_lists(
            &[("s", 1), ("y", 2), ("x", 5), ("t", 1)],
            &[("s", "x"), ("s", "y"), ("x", "t"), ("y", "t")],
        )
        .unwrap();
        let alloc = allocate(&g, &LatencyConstraint::new("s", "t", 3), DEFAULT_PATH_CAP).unwrap();
        assert_eq!(alloc.m, 2);
        let first = &alloc.paths.paths[alloc.selected[0]];
        assert_eq!(g.id_vec(&first.tasks), vec!["s", "x", "t"]);
        assert_eq!(alloc.assignment[g.index_of("y").unwrap()], Some(1));
    }

    #[test]
    fn path_adding_nothing_is_never_selected() {
        // the direct edge s -> t adds no task once s..t are covered
        let g = TaskGraph::from_lists(
            &[("s", 1), ("x", 1), ("t", 1)],
            &[("s", "x"), ("x", "t"), ("s", "t")],
        )
        .unwrap();
        let alloc = allocate(&g, &LatencyConstraint::new("s", "t", 3), DEFAULT_PATH_CAP).unwrap();
        assert_eq!(alloc.paths.len(), 2);
        assert_eq!(alloc.m, 1);
    }

    #[test]
    fn joint_run_reuses_shared_tasks() {
        // identical constraints: the joint run adds nothing
        let g = TaskGraph::from_lists(
            &[("s", 1), ("x", 1), ("y", 1), ("t", 1)],
            &[("s", "x"), ("s", "y"), ("x", "t"), ("y", "t")],
        )
        .unwrap();
        let c = LatencyConstraint::new("s", "t", 3);
        let pair = allocate_pair(&g, &c, &c, DEFAULT_PATH_CAP).unwrap();
        assert_eq!((pair.first.m, pair.second.m, pair.m), (2, 2, 2));
        assert!(pair.joint_selected.is_empty());
    }
}
