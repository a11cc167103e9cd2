//! How two latency constraints relate: parallel, Z or X.

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use crate::error::Result;
use crate::graph::{TaskGraph, TaskIdx};
use crate::instance::LatencyConstraint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PairKind {
    Parallel,
    Z,
    X,
}

impl fmt::Display for PairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            PairKind::Parallel => "parallel",
            PairKind::Z => "Z",
            PairKind::X => "X",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairConfiguration {
    pub kind: PairKind,
    /// A path from a task under the first constraint to a task under the second.
    pub forward: Option<Vec<TaskIdx>>,
    /// A path from a task under the second constraint to a task under the first.
    pub backward: Option<Vec<TaskIdx>>,
}

impl PairConfiguration {
    pub fn swapped(&self) -> PairConfiguration {
        PairConfiguration {
            kind: self.kind,
            forward: self.backward.clone(),
            backward: self.forward.clone(),
        }
    }
}

/// Tasks on at least one path of the constraint, i.e. the tasks under it.
pub fn constrained_tasks(graph: &TaskGraph, c: &LatencyConstraint) -> Result<Vec<TaskIdx>> {
    let (a, b) = c.endpoints(graph)?;
    Ok(graph.between(a, b))
}

/// Classifies `c1` against `c2` by searching for a linking path (at least
/// one edge) in each direction between the two constrained task sets.
pub fn classify_pair(
    graph: &TaskGraph,
    c1: &LatencyConstraint,
    c2: &LatencyConstraint,
) -> Result<PairConfiguration> {
    let under1 = constrained_tasks(graph, c1)?;
    let under2 = constrained_tasks(graph, c2)?;
    let forward = linking_path(graph, &under1, &under2);
    let backward = linking_path(graph, &under2, &under1);
    let kind = match (&forward, &backward) {
        (Some(_), Some(_)) => PairKind::X,
        (None, None) => PairKind::Parallel,
        _ => PairKind::Z,
    };
    Ok(PairConfiguration {
        kind,
        forward,
        backward,
    })
}

/// First (by source index, then BFS) path of at least one edge from a member
/// of `from` to a member of `to`.
fn linking_path(graph: &TaskGraph, from: &[TaskIdx], to: &[TaskIdx]) -> Option<Vec<TaskIdx>> {
    let mut target = vec![false; graph.len()];
    for &t in to {
        target[t] = true;
    }
    for &start in from {
        let mut parent: Vec<Option<TaskIdx>> = vec![None; graph.len()];
        let mut seen = vec![false; graph.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for &v in graph.successors(u) {
                if seen[v] {
                    continue;
                }
                seen[v] = true;
                parent[v] = Some(u);
                if target[v] {
                    let mut path = vec![v];
                    let mut cur = v;
                    while let Some(p) = parent[cur] {
                        path.push(p);
                        cur = p;
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(v);
            }
        }
    }
    None
}
