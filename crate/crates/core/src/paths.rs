//! Path enumeration between the endpoints of a latency constraint.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{TaskGraph, TaskIdx};

pub const DEFAULT_PATH_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    pub tasks: Vec<TaskIdx>,
    /// Sum of member WCETs.
    pub length: u64,
}

impl Path {
    pub fn new(graph: &TaskGraph, tasks: Vec<TaskIdx>) -> Self {
        let length = tasks.iter().map(|&t| graph.wcet(t)).sum();
        Path { tasks, length }
    }

    pub fn contains(&self, t: TaskIdx) -> bool {
        self.tasks.contains(&t)
    }
}

/// A set of `source -> sink` paths with its shared/exclusive decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSet {
    pub source: TaskIdx,
    pub sink: TaskIdx,
    pub paths: Vec<Path>,
    /// Tasks present in every path, ascending.
    pub shared: Vec<TaskIdx>,
    /// Per path: tasks present in that path only (never shared), ascending.
    pub exclusive: Vec<Vec<TaskIdx>>,
    /// Union of all member paths, ascending.
    pub members: Vec<TaskIdx>,
}

impl PathSet {
    pub fn from_paths(n_tasks: usize, source: TaskIdx, sink: TaskIdx, paths: Vec<Path>) -> Self {
        let mut count = vec![0usize; n_tasks];
        for p in &paths {
            for &t in &p.tasks {
                count[t] += 1;
            }
        }
        let total = paths.len();
        let shared: Vec<TaskIdx> = (0..n_tasks)
            .filter(|&t| total > 0 && count[t] == total)
            .collect();
        let members: Vec<TaskIdx> = (0..n_tasks).filter(|&t| count[t] > 0).collect();
        let exclusive = paths
            .iter()
            .map(|p| {
                let mut only: Vec<TaskIdx> = p
                    .tasks
                    .iter()
                    .copied()
                    .filter(|&t| count[t] == 1 && total > 1)
                    .collect();
                only.sort_unstable();
                only
            })
            .collect();
        PathSet {
            source,
            sink,
            paths,
            shared,
            exclusive,
            members,
        }
    }

    /// Decomposition recomputed over a subset of the paths, in the given order.
    pub fn restrict(&self, n_tasks: usize, indices: &[usize]) -> PathSet {
        let paths = indices.iter().map(|&i| self.paths[i].clone()).collect();
        PathSet::from_paths(n_tasks, self.source, self.sink, paths)
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn max_length(&self) -> Option<u64> {
        self.paths.iter().map(|p| p.length).max()
    }

    pub fn to_doc(&self, graph: &TaskGraph) -> PathSetDoc {
        PathSetDoc {
            source: graph.id(self.source).to_string(),
            sink: graph.id(self.sink).to_string(),
            paths: self
                .paths
                .iter()
                .map(|p| PathDoc {
                    tasks: graph.id_vec(&p.tasks),
                    length: p.length,
                })
                .collect(),
            shared: graph.id_vec(&self.shared),
            exclusive: self.exclusive.iter().map(|e| graph.id_vec(e)).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PathDoc {
    pub tasks: Vec<String>,
    pub length: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathSetDoc {
    pub source: String,
    pub sink: String,
    pub paths: Vec<PathDoc>,
    pub shared: Vec<String>,
    pub exclusive: Vec<Vec<String>>,
}

/// Every directed path from `source` to `sink`, in lexicographic order of
/// task sequences (tasks compared by declaration index).
///
/// Fails with `PathExplosion` once more than `cap` paths exist and with
/// `NoPath` when the sink is unreachable.
pub fn enumerate_paths(
    graph: &TaskGraph,
    source: TaskIdx,
    sink: TaskIdx,
    cap: usize,
) -> Result<PathSet> {
    let useful = graph.ancestors_of(sink);
    if !useful[source] || source == sink {
        return Err(Error::NoPath {
            source_task: graph.id(source).to_string(),
            sink: graph.id(sink).to_string(),
        });
    }

    let mut found = Vec::new();
    let mut current = vec![source];
    // (task, next successor position)
    let mut stack: Vec<(TaskIdx, usize)> = vec![(source, 0)];
    while let Some(&mut (u, ref mut next)) = stack.last_mut() {
        let succ = graph.successors(u);
        let mut advanced = false;
        while *next < succ.len() {
            let v = succ[*next];
            *next += 1;
            if !useful[v] {
                continue;
            }
            if v == sink {
                if found.len() == cap {
                    return Err(Error::PathExplosion {
                        source_task: graph.id(source).to_string(),
                        sink: graph.id(sink).to_string(),
                        cap,
                    });
                }
                let mut tasks = current.clone();
                tasks.push(sink);
                found.push(Path::new(graph, tasks));
                continue;
            }
            current.push(v);
            stack.push((v, 0));
            advanced = true;
            break;
        }
        if !advanced {
            stack.pop();
            current.pop();
        }
    }
    Ok(PathSet::from_paths(graph.len(), source, sink, found))
}

/// `enumerate_paths` by task id.
pub fn enumerate_paths_by_id(
    graph: &TaskGraph,
    source: &str,
    sink: &str,
    cap: usize,
) -> Result<PathSet> {
    enumerate_paths(graph, graph.require(source)?, graph.require(sink)?, cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> TaskGraph {
        TaskGraph::from_lists(&[("a", 1), ("b", 2), ("c", 3)], &[("a", "b"), ("b", "c")]).unwrap()
    }

    #[test]
    fn single_chain() {
        let g = chain();
        let set = enumerate_paths_by_id(&g, "a", "c", 10).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.paths[0].tasks, vec![0, 1, 2]);
        assert_eq!(set.paths[0].length, 6);
        assert_eq!(set.shared, vec![0, 1, 2]);
        assert_eq!(set.exclusive, vec![Vec::<TaskIdx>::new()]);
    }

    #[test]
    fn no_path_and_cap() {
        let g = chain();
        assert!(matches!(
            enumerate_paths_by_id(&g, "c", "a", 10),
            Err(Error::NoPath { .. })
        ));
        let diamond = TaskGraph::from_lists(
            &[("s", 1), ("x", 1), ("y", 1), ("t", 1)],
            &[("s", "x"), ("s", "y"), ("x", "t"), ("y", "t")],
        )
        .unwrap();
        assert!(matches!(
            enumerate_paths_by_id(&diamond, "s", "t", 1),
            Err(Error::PathExplosion { cap: 1, .. })
        ));
        let set = enumerate_paths_by_id(&diamond, "s", "t", 2).unwrap();
        assert_eq!(set.shared, vec![0, 3]);
        assert_eq!(set.exclusive, vec![vec![1], vec![2]]);
    }

    #[test]
    fn partial_members_are_neither_shared_nor_exclusive() {
        // s -> x -> t, s -> x -> y -> t, s -> t
        let g = TaskGraph::from_lists(
            &[("s", 1), ("x", 1), ("y", 1), ("t", 1)],
            &[("s", "x"), ("x", "t"), ("x", "y"), ("y", "t"), ("s", "t")],
        )
        .unwrap();
        let set = enumerate_paths_by_id(&g, "s", "t", 10).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(set.paths[0].tasks, vec![0, 1, 2, 3]);
        assert_eq!(set.paths[1].tasks, vec![0, 1, 3]);
        assert_eq!(set.paths[2].tasks, vec![0, 3]);
        assert_eq!(set.shared, vec![0, 3]);
        // x sits on two of three paths: in no set
        assert_eq!(set.exclusive, vec![vec![2], vec![], vec![]]);
    }
}
