//! Task graph model and structural validation.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense index of a task inside a [`TaskGraph`], in declaration order.
pub type TaskIdx = usize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub wcet: u64,
}

impl Task {
    pub fn new(id: impl Into<String>, wcet: u64) -> Self {
        Task { id: id.into(), wcet }
    }
}

/// Unvalidated graph as read from a file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawGraph {
    pub tasks: Vec<Task>,
    pub edges: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Violation {
    EmptyId { position: usize },
    ZeroWcet { task: String },
    DuplicateTask { task: String },
    UnknownEndpoint { from: String, to: String, missing: String },
    SelfLoop { task: String },
    DuplicateEdge { from: String, to: String },
    Cycle { tasks: Vec<String> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyId { position } => write!(f, "task #{position} has an empty id"),
            Violation::ZeroWcet { task } => write!(f, "task `{task}` has wcet 0 (must be >= 1)"),
            Violation::DuplicateTask { task } => write!(f, "task id `{task}` is declared twice"),
            Violation::UnknownEndpoint { from, to, missing } => {
                write!(f, "edge ({from}, {to}) names unknown task `{missing}`")
            }
            Violation::SelfLoop { task } => write!(f, "self-loop on `{task}`"),
            Violation::DuplicateEdge { from, to } => write!(f, "duplicate edge ({from}, {to})"),
            Violation::Cycle { tasks } => write!(f, "cycle through {}", tasks.join(" -> ")),
        }
    }
}

/// Outcome of [`validate_graph`]. Violations are data, not failures.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Legal but unusual situations worth surfacing.
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks every structural invariant of a task graph: unique non-empty ids,
/// positive WCETs, known edge endpoints, no self-loops, no duplicate edges,
/// and acyclicity.
pub fn validate_graph(raw: &RawGraph) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut index: HashMap<&str, TaskIdx> = HashMap::new();
    for (pos, task) in raw.tasks.iter().enumerate() {
        if task.id.is_empty() {
            report.violations.push(Violation::EmptyId { position: pos });
        }
        if task.wcet == 0 {
            report.violations.push(Violation::ZeroWcet { task: task.id.clone() });
        }
        if index.insert(task.id.as_str(), pos).is_some() {
            report.violations.push(Violation::DuplicateTask { task: task.id.clone() });
        }
    }

    let mut seen = HashSet::new();
    let mut succ: Vec<Vec<TaskIdx>> = vec![Vec::new(); raw.tasks.len()];
    for (from, to) in &raw.edges {
        let mut known = true;
        for end in [from, to] {
            if !index.contains_key(end.as_str()) {
                report.violations.push(Violation::UnknownEndpoint {
                    from: from.clone(),
                    to: to.clone(),
                    missing: end.clone(),
                });
                known = false;
            }
        }
        if from == to {
            report.violations.push(Violation::SelfLoop { task: from.clone() });
            continue;
        }
        if !seen.insert((from.as_str(), to.as_str())) {
            report.violations.push(Violation::DuplicateEdge {
                from: from.clone(),
                to: to.clone(),
            });
            continue;
        }
        if known {
            succ[index[from.as_str()]].push(index[to.as_str()]);
        }
    }

    if let Some(cycle) = find_cycle(&succ) {
        report.violations.push(Violation::Cycle {
            tasks: cycle.into_iter().map(|i| raw.tasks[i].id.clone()).collect(),
        });
    }
    report
}

/// Kahn's algorithm; if nodes are left over, walk predecessors inside the
/// leftover set until a node repeats.
fn find_cycle(succ: &[Vec<TaskIdx>]) -> Option<Vec<TaskIdx>> {
    let n = succ.len();
    let mut indeg = vec![0usize; n];
    for targets in succ {
        for &t in targets {
            indeg[t] += 1;
        }
    }
    let mut stack: Vec<TaskIdx> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut removed = vec![false; n];
    while let Some(u) = stack.pop() {
        removed[u] = true;
        for &v in &succ[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                stack.push(v);
            }
        }
    }
    let start = (0..n).find(|&i| !removed[i])?;
    let mut pred_in_rest: Vec<Option<TaskIdx>> = vec![None; n];
    for (u, targets) in succ.iter().enumerate() {
        if removed[u] {
            continue;
        }
        for &v in targets {
            if !removed[v] && pred_in_rest[v].is_none() {
                pred_in_rest[v] = Some(u);
            }
        }
    }
    let mut order = Vec::new();
    let mut pos = vec![usize::MAX; n];
    let mut cur = start;
    while pos[cur] == usize::MAX {
        pos[cur] = order.len();
        order.push(cur);
        cur = pred_in_rest[cur].expect("leftover node has a leftover predecessor");
    }
    let mut cycle = order[pos[cur]..].to_vec();
    cycle.reverse();
    Some(cycle)
}

/// A validated DAG of tasks. Immutable once built.
#[derive(Debug, Clone)]
pub struct TaskGraph {
    tasks: Vec<Task>,
    edges: Vec<(TaskIdx, TaskIdx)>,
    index: HashMap<String, TaskIdx>,
    succ: Vec<Vec<TaskIdx>>,
    pred: Vec<Vec<TaskIdx>>,
    topo: Vec<TaskIdx>,
}

impl TaskGraph {
    pub fn new(tasks: Vec<Task>, edges: Vec<(String, String)>) -> Result<Self> {
        Self::from_raw(RawGraph { tasks, edges })
    }

    pub fn from_raw(raw: RawGraph) -> Result<Self> {
        let report = validate_graph(&raw);
        if !report.is_ok() {
            return Err(Error::InvalidGraph(report));
        }
        let index: HashMap<String, TaskIdx> = raw
            .tasks
            .iter()
            .enumerate()
            .map(|(i, t)| (t.id.clone(), i))
            .collect();
        let n = raw.tasks.len();
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(raw.edges.len());
        for (from, to) in &raw.edges {
            let (u, v) = (index[from], index[to]);
            succ[u].push(v);
            pred[v].push(u);
            edges.push((u, v));
        }
        for list in succ.iter_mut().chain(pred.iter_mut()) {
            list.sort_unstable();
        }
        let topo = topological_order(&succ, &pred);
        Ok(TaskGraph {
            tasks: raw.tasks,
            edges,
            index,
            succ,
            pred,
            topo,
        })
    }

    /// Builds a graph from `(id, wcet)` pairs and `(from, to)` id pairs.
    pub fn from_lists(tasks: &[(&str, u64)], edges: &[(&str, &str)]) -> Result<Self> {
        Self::new(
            tasks.iter().map(|&(id, w)| Task::new(id, w)).collect(),
            edges
                .iter()
                .map(|&(a, b)| (a.to_string(), b.to_string()))
                .collect(),
        )
    }

    pub fn to_raw(&self) -> RawGraph {
        RawGraph {
            tasks: self.tasks.clone(),
            edges: self
                .edges
                .iter()
                .map(|&(u, v)| (self.tasks[u].id.clone(), self.tasks[v].id.clone()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn edges(&self) -> &[(TaskIdx, TaskIdx)] {
        &self.edges
    }

    pub fn id(&self, t: TaskIdx) -> &str {
        &self.tasks[t].id
    }

    pub fn wcet(&self, t: TaskIdx) -> u64 {
        self.tasks[t].wcet
    }

    pub fn index_of(&self, id: &str) -> Option<TaskIdx> {
        self.index.get(id).copied()
    }

    pub fn require(&self, id: &str) -> Result<TaskIdx> {
        self.index_of(id)
            .ok_or_else(|| Error::UnknownTask(id.to_string()))
    }

    pub fn successors(&self, t: TaskIdx) -> &[TaskIdx] {
        &self.succ[t]
    }

    pub fn predecessors(&self, t: TaskIdx) -> &[TaskIdx] {
        &self.pred[t]
    }

    /// A topological order; among ready tasks the lowest index goes first.
    pub fn topological_order(&self) -> &[TaskIdx] {
        &self.topo
    }

    pub fn ids<'a>(&'a self, seq: &'a [TaskIdx]) -> impl Iterator<Item = &'a str> + 'a {
        seq.iter().map(move |&t| self.id(t))
    }

    pub fn id_vec(&self, seq: &[TaskIdx]) -> Vec<String> {
        self.ids(seq).map(str::to_string).collect()
    }

    pub fn total_wcet(&self) -> u64 {
        self.tasks.iter().map(|t| t.wcet).sum()
    }

    /// Tasks reachable from `from` (inclusive).
    pub fn descendants_of(&self, from: TaskIdx) -> Vec<bool> {
        self.sweep(from, &self.succ)
    }

    /// Tasks that reach `to` (inclusive).
    pub fn ancestors_of(&self, to: TaskIdx) -> Vec<bool> {
        self.sweep(to, &self.pred)
    }

    fn sweep(&self, start: TaskIdx, adj: &[Vec<TaskIdx>]) -> Vec<bool> {
        let mut mark = vec![false; self.len()];
        let mut stack = vec![start];
        mark[start] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !mark[v] {
                    mark[v] = true;
                    stack.push(v);
                }
            }
        }
        mark
    }

    /// Tasks lying on at least one `source -> sink` path, endpoints included.
    /// Empty when the sink is unreachable.
    pub fn between(&self, source: TaskIdx, sink: TaskIdx) -> Vec<TaskIdx> {
        let down = self.descendants_of(source);
        if !down[sink] {
            return Vec::new();
        }
        let up = self.ancestors_of(sink);
        (0..self.len()).filter(|&t| down[t] && up[t]).collect()
    }

    /// Longest `source -> sink` path length (sum of WCETs, endpoints
    /// included) by dynamic programming over the topological order.
    pub fn longest_path_len(&self, source: TaskIdx, sink: TaskIdx) -> Option<u64> {
        let mut best: Vec<Option<u64>> = vec![None; self.len()];
        best[source] = Some(self.wcet(source));
        for &u in &self.topo {
            let Some(here) = best[u] else { continue };
            for &v in &self.succ[u] {
                let cand = here + self.wcet(v);
                if best[v].is_none_or(|b| cand > b) {
                    best[v] = Some(cand);
                }
            }
        }
        best[sink]
    }
}

fn topological_order(succ: &[Vec<TaskIdx>], pred: &[Vec<TaskIdx>]) -> Vec<TaskIdx> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let mut indeg: Vec<usize> = pred.iter().map(Vec::len).collect();
    let mut heap: BinaryHeap<Reverse<TaskIdx>> = (0..succ.len())
        .filter(|&i| indeg[i] == 0)
        .map(Reverse)
        .collect();
    let mut order = Vec::with_capacity(succ.len());
    while let Some(Reverse(u)) = heap.pop() {
        order.push(u);
        for &v in &succ[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                heap.push(Reverse(v));
            }
        }
    }
    order
}

/// Transitive closure as bit rows; `reaches(u, v)` means a path of at least
/// one edge leads from `u` to `v`.
#[derive(Debug, Clone)]
pub struct Reachability {
    words: usize,
    rows: Vec<u64>,
}

impl Reachability {
    pub fn new(graph: &TaskGraph) -> Self {
        let n = graph.len();
        let words = n.div_ceil(64).max(1);
        let mut rows = vec![0u64; n * words];
        for &u in graph.topological_order().iter().rev() {
            for &v in graph.successors(u) {
                rows[u * words + v / 64] |= 1 << (v % 64);
                for w in 0..words {
                    let bits = rows[v * words + w];
                    rows[u * words + w] |= bits;
                }
            }
        }
        Reachability { words, rows }
    }

    pub fn reaches(&self, from: TaskIdx, to: TaskIdx) -> bool {
        self.rows[from * self.words + to / 64] & (1 << (to % 64)) != 0
    }

    pub fn comparable(&self, a: TaskIdx, b: TaskIdx) -> bool {
        a == b || self.reaches(a, b) || self.reaches(b, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(tasks: &[&str], edges: &[(&str, &str)]) -> RawGraph {
        RawGraph {
            tasks: tasks.iter().map(|id| Task::new(*id, 1)).collect(),
            edges: edges
                .iter()
                .map(|&(a, b)| (a.to_string(), b.to_string()))
                .collect(),
        }
    }

    #[test]
    fn self_loop_is_reported() {
        let report = validate_graph(&raw(&["t1"], &[("t1", "t1")]));
        assert_eq!(
            report.violations,
            vec![Violation::SelfLoop { task: "t1".into() }]
        );
    }

    #[test]
    fn two_cycle_is_reported() {
        let report = validate_graph(&raw(&["a", "b"], &[("a", "b"), ("b", "a")]));
        assert_eq!(report.violations.len(), 1);
        match &report.violations[0] {
            Violation::Cycle { tasks } => {
                let mut sorted = tasks.clone();
                sorted.sort();
                assert_eq!(sorted, vec!["a", "b"]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn longer_cycle_names_its_members() {
        let report = validate_graph(&raw(
            &["s", "a", "b", "c"],
            &[("s", "a"), ("a", "b"), ("b", "c"), ("c", "a")],
        ));
        let Violation::Cycle { tasks } = &report.violations[0] else {
            panic!("expected a cycle");
        };
        let mut sorted = tasks.clone();
        sorted.sort();
        assert_eq!(sorted, vec!["a", "b", "c"]);
    }

    #[test]
    fn other_violations() {
        let mut g = raw(&["a", "b", "a"], &[("a", "b"), ("a", "b"), ("a", "zz")]);
        g.tasks[1].wcet = 0;
        let report = validate_graph(&g);
        assert!(report
            .violations
            .contains(&Violation::DuplicateTask { task: "a".into() }));
        assert!(report
            .violations
            .contains(&Violation::ZeroWcet { task: "b".into() }));
        assert!(report.violations.contains(&Violation::DuplicateEdge {
            from: "a".into(),
            to: "b".into()
        }));
        assert!(report.violations.contains(&Violation::UnknownEndpoint {
            from: "a".into(),
            to: "zz".into(),
            missing: "zz".into()
        }));
        assert!(TaskGraph::from_raw(g).is_err());
    }

    #[test]
    fn reachability_and_between() {
        let g = TaskGraph::from_lists(
            &[("a", 1), ("b", 2), ("c", 3), ("d", 4), ("e", 1)],
            &[("a", "b"), ("b", "c"), ("a", "d"), ("e", "c")],
        )
        .unwrap();
        let r = Reachability::new(&g);
        assert!(r.reaches(0, 2));
        assert!(!r.reaches(2, 0));
        assert!(!r.reaches(0, 0));
        assert!(!r.comparable(3, 2));
        assert_eq!(g.between(0, 2), vec![0, 1, 2]);
        assert!(g.between(3, 2).is_empty());
        assert_eq!(g.longest_path_len(0, 2), Some(6));
        assert_eq!(g.longest_path_len(3, 2), None);
    }
}
