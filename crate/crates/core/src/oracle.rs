//! Exact non-preemptive scheduler on identical processors.
//!
//! Depth-first branch and bound. A node fixes the next task in start-time
//! order together with its processor; the task starts as early as its
//! processor and its predecessors allow. Every semi-active schedule is
//! generated exactly once up to processor relabeling:
//!
//! * starts are non-decreasing along a branch, ties ordered by task index;
//! * an unused processor is only opened if it is the first unused one;
//! * with `q_edge = 0`, processors idle before the current start are
//!   interchangeable, so only one of them is tried.
//!
//! Only the objective sinks and their ancestors are searched; other tasks
//! cannot delay them and are appended afterwards. A node is cut when a
//! critical-path/workload bound on the objective cannot beat the incumbent.

use std::cmp::Reverse;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{TaskGraph, TaskIdx};
use crate::schedule::{Schedule, Slot};

pub const DEFAULT_TIME_BUDGET: Duration = Duration::from_secs(60);

/// Minimize the start of `primary`, then the start of `secondary`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Objective {
    pub primary: String,
    pub secondary: Option<String>,
}

impl Objective {
    pub fn single(primary: impl Into<String>) -> Self {
        Objective {
            primary: primary.into(),
            secondary: None,
        }
    }

    pub fn lexicographic(primary: impl Into<String>, secondary: impl Into<String>) -> Self {
        Objective {
            primary: primary.into(),
            secondary: Some(secondary.into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    pub num_procs: usize,
    /// Delay added to an edge whose endpoints run on different processors.
    pub q_edge: u64,
    pub time_budget: Duration,
}

impl OracleConfig {
    pub fn new(num_procs: usize) -> Self {
        OracleConfig {
            num_procs,
            q_edge: 0,
            time_budget: DEFAULT_TIME_BUDGET,
        }
    }

    pub fn with_budget(self, time_budget: Duration) -> Self {
        OracleConfig {
            time_budget,
            ..self
        }
    }

    pub fn with_q_edge(self, q_edge: u64) -> Self {
        OracleConfig { q_edge, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleOutcome {
    pub schedule: Schedule,
    pub primary: u64,
    pub secondary: Option<u64>,
    /// False when the time budget ran out; `schedule` is then the best found.
    pub optimal: bool,
    pub nodes: u64,
}

pub fn optimal_schedule(
    graph: &TaskGraph,
    objective: &Objective,
    config: &OracleConfig,
) -> Result<OracleOutcome> {
    if config.num_procs == 0 {
        return Err(crate::Error::InvalidArgument(
            "processor count must be positive".into(),
        ));
    }
    let primary = graph.require(&objective.primary)?;
    let secondary = objective
        .secondary
        .as_deref()
        .map(|id| graph.require(id))
        .transpose()?;

    let mut search = Search::new(graph, primary, secondary, config);
    search.seed_incumbent();
    search.dfs();
    let best = search.best.take().expect("greedy seed provides an incumbent");

    let slots = complete(graph, &search.relevant, best.slots, config);
    let schedule = Schedule::from_slots(graph, config.num_procs, &slots);
    Ok(OracleOutcome {
        schedule,
        primary: best.value.0,
        secondary: secondary.map(|_| best.value.1),
        optimal: !search.aborted,
        nodes: search.nodes,
    })
}

#[derive(Debug, Clone)]
struct Incumbent {
    value: (u64, u64),
    slots: Vec<Option<Slot>>,
}

struct Search<'g> {
    graph: &'g TaskGraph,
    procs: usize,
    q_edge: u64,
    deadline: Instant,
    primary: TaskIdx,
    secondary: Option<TaskIdx>,
    relevant: Vec<bool>,
    /// Relevant tasks in topological order.
    order: Vec<TaskIdx>,
    /// Ancestor flags of each objective sink.
    before_primary: Vec<bool>,
    before_secondary: Vec<bool>,
    /// Longest WCET sum from a task to the primary sink, sink excluded.
    tail: Vec<u64>,
    slots: Vec<Option<Slot>>,
    waiting: Vec<usize>,
    avail: Vec<u64>,
    opened: usize,
    placed: usize,
    last: Option<(u64, TaskIdx)>,
    best: Option<Incumbent>,
    nodes: u64,
    aborted: bool,
}

impl<'g> Search<'g> {
    fn new(
        graph: &'g TaskGraph,
        primary: TaskIdx,
        secondary: Option<TaskIdx>,
        config: &OracleConfig,
    ) -> Self {
        let before_primary = graph.ancestors_of(primary);
        let before_secondary = match secondary {
            Some(s) => graph.ancestors_of(s),
            None => vec![false; graph.len()],
        };
        let relevant: Vec<bool> = (0..graph.len())
            .map(|t| before_primary[t] || before_secondary[t])
            .collect();
        let order: Vec<TaskIdx> = graph
            .topological_order()
            .iter()
            .copied()
            .filter(|&t| relevant[t])
            .collect();
        let mut tail = vec![0u64; graph.len()];
        for &t in graph.topological_order().iter().rev() {
            if !before_primary[t] || t == primary {
                continue;
            }
            tail[t] = graph
                .successors(t)
                .iter()
                .filter(|&&s| before_primary[s])
                .map(|&s| tail[s])
                .max()
                .unwrap_or(0)
                + graph.wcet(t);
        }
        let waiting = (0..graph.len())
            .map(|t| graph.predecessors(t).len())
            .collect();
        Search {
            graph,
            procs: config.num_procs,
            q_edge: config.q_edge,
            deadline: Instant::now() + config.time_budget,
            primary,
            secondary,
            relevant,
            order,
            before_primary,
            before_secondary,
            tail,
            slots: vec![None; graph.len()],
            waiting,
            avail: vec![0; config.num_procs],
            opened: 0,
            placed: 0,
            last: None,
            best: None,
            nodes: 0,
            aborted: false,
        }
    }

    fn finish(&self, t: TaskIdx) -> Option<u64> {
        self.slots[t].map(|s| s.start + self.graph.wcet(t))
    }

    fn start_on(&self, t: TaskIdx, proc: usize) -> u64 {
        let mut start = self.avail[proc];
        for &p in self.graph.predecessors(t) {
            let s = self.slots[p].expect("ready task has placed predecessors");
            let mut ready = s.start + self.graph.wcet(p);
            if s.processor != proc {
                ready += self.q_edge;
            }
            start = start.max(ready);
        }
        start
    }

    fn floor(&self) -> u64 {
        self.last.map_or(0, |(s, _)| s)
    }

    /// Candidate (start, processor) placements of a ready task, deduplicated
    /// under processor symmetry and filtered by the start-order rule.
    fn placements(&self, t: TaskIdx) -> Vec<(u64, usize)> {
        let floor = self.floor();
        let limit = (self.opened + 1).min(self.procs);
        let mut out: Vec<(u64, usize)> = Vec::with_capacity(limit);
        let mut seen_free: Vec<u64> = Vec::new();
        for proc in 0..limit {
            if self.q_edge == 0 {
                let effective = self.avail[proc].max(floor);
                if seen_free.contains(&effective) {
                    continue;
                }
                seen_free.push(effective);
            }
            let start = self.start_on(t, proc);
            if let Some(last) = self.last {
                if (start, t) < last {
                    continue;
                }
            }
            out.push((start, proc));
        }
        out
    }

    fn place(&mut self, t: TaskIdx, proc: usize, start: u64) -> (u64, Option<(u64, TaskIdx)>, usize) {
        let saved = (self.avail[proc], self.last, self.opened);
        self.slots[t] = Some(Slot {
            processor: proc,
            start,
        });
        self.avail[proc] = start + self.graph.wcet(t);
        self.last = Some((start, t));
        self.opened = self.opened.max(proc + 1);
        self.placed += 1;
        for &s in self.graph.successors(t) {
            self.waiting[s] -= 1;
        }
        saved
    }

    fn unplace(&mut self, t: TaskIdx, proc: usize, saved: (u64, Option<(u64, TaskIdx)>, usize)) {
        for &s in self.graph.successors(t) {
            self.waiting[s] += 1;
        }
        self.placed -= 1;
        self.slots[t] = None;
        self.avail[proc] = saved.0;
        self.last = saved.1;
        self.opened = saved.2;
    }

    /// Lower bound on the start of `sink` given the partial schedule.
    fn sink_bound(&self, sink: TaskIdx, before: &[bool]) -> u64 {
        if let Some(s) = self.slots[sink] {
            return s.start;
        }
        let floor = self.floor();
        let free: Vec<u64> = {
            let mut v: Vec<u64> = self.avail.iter().map(|&a| a.max(floor)).collect();
            v.sort_unstable();
            v
        };
        let earliest_free = free[0];

        // critical path over unplaced ancestors
        let mut est = vec![0u64; self.graph.len()];
        let mut work = 0u64;
        for &t in &self.order {
            if !before[t] || self.slots[t].is_some() {
                continue;
            }
            let mut e = earliest_free;
            for &p in self.graph.predecessors(t) {
                let ready = match self.finish(p) {
                    Some(f) => f,
                    None => est[p] + self.graph.wcet(p),
                };
                e = e.max(ready);
            }
            est[t] = e;
            if t != sink {
                work += self.graph.wcet(t);
            }
        }
        est[sink].max(workload_bound(&free, work))
    }

    fn bound(&self) -> (u64, u64) {
        let first = self.sink_bound(self.primary, &self.before_primary);
        let second = match self.secondary {
            Some(s) => self.sink_bound(s, &self.before_secondary),
            None => 0,
        };
        (first, second)
    }

    fn value(&self) -> (u64, u64) {
        let first = self.slots[self.primary].expect("complete").start;
        let second = self
            .secondary
            .map_or(0, |s| self.slots[s].expect("complete").start);
        (first, second)
    }

    fn beats_incumbent(&self, bound: (u64, u64)) -> bool {
        self.best.as_ref().is_none_or(|b| bound < b.value)
    }

    /// Greedy list schedule: ready task with the longest tail to the primary
    /// sink, earliest start, lowest index.
    fn seed_incumbent(&mut self) {
        let mut trail = Vec::new();
        while self.placed < self.order.len() {
            let mut pick: Option<(u64, Reverse<u64>, TaskIdx, usize)> = None;
            for &t in &self.order {
                if self.slots[t].is_some() || self.waiting_relevant(t) {
                    continue;
                }
                for proc in 0..(self.opened + 1).min(self.procs) {
                    let start = self.start_on(t, proc);
                    let key = (start, Reverse(self.tail[t]), t, proc);
                    if pick.is_none_or(|p| key < p) {
                        pick = Some(key);
                    }
                }
            }
            let (start, _, t, proc) = pick.expect("a relevant task is ready");
            // greedy may violate the start-order rule; bypass it here
            let saved = self.place(t, proc, start);
            trail.push((t, proc, saved));
        }
        self.best = Some(Incumbent {
            value: self.value(),
            slots: self.slots.clone(),
        });
        while let Some((t, proc, saved)) = trail.pop() {
            self.unplace(t, proc, saved);
        }
    }

    fn waiting_relevant(&self, t: TaskIdx) -> bool {
        // all predecessors of a relevant task are relevant
        self.waiting[t] > 0
    }

    fn dfs(&mut self) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.nodes.is_multiple_of(1024) && Instant::now() >= self.deadline {
            self.aborted = true;
            return;
        }
        if self.placed == self.order.len() {
            let value = self.value();
            if self.beats_incumbent(value) {
                self.best = Some(Incumbent {
                    value,
                    slots: self.slots.clone(),
                });
            }
            return;
        }
        if !self.beats_incumbent(self.bound()) {
            return;
        }

        let mut children: Vec<(u64, Reverse<u64>, TaskIdx, usize)> = Vec::new();
        for &t in &self.order {
            if self.slots[t].is_some() || self.waiting_relevant(t) {
                continue;
            }
            for (start, proc) in self.placements(t) {
                children.push((start, Reverse(self.tail[t]), t, proc));
            }
        }
        children.sort_unstable();
        for (start, _, t, proc) in children {
            let saved = self.place(t, proc, start);
            self.dfs();
            self.unplace(t, proc, saved);
            if self.aborted {
                return;
            }
            if !self.beats_incumbent(self.bound()) {
                return;
            }
        }
    }
}

/// Smallest `s` such that processors free from `free[i]` (sorted) offer at
/// least `work` units of capacity before `s`.
fn workload_bound(free: &[u64], work: u64) -> u64 {
    if work == 0 {
        return 0;
    }
    let mut sum = 0u64;
    for k in 1..=free.len() {
        sum += free[k - 1];
        let s = (work + sum).div_ceil(k as u64);
        if k == free.len() || s <= free[k] {
            return s.max(free[k - 1]);
        }
    }
    unreachable!("loop returns at k == free.len()")
}

/// Appends the tasks that were not searched, in topological order, each at
/// its earliest start at the end of some processor.
fn complete(
    graph: &TaskGraph,
    relevant: &[bool],
    mut slots: Vec<Option<Slot>>,
    config: &OracleConfig,
) -> Vec<Slot> {
    let mut avail = vec![0u64; config.num_procs];
    for (t, slot) in slots.iter().enumerate() {
        if let Some(s) = slot {
            avail[s.processor] = avail[s.processor].max(s.start + graph.wcet(t));
        }
    }
    for &t in graph.topological_order() {
        if relevant[t] {
            continue;
        }
        let (start, proc) = (0..config.num_procs)
            .map(|proc| {
                let mut start = avail[proc];
                for &p in graph.predecessors(t) {
                    let s = slots[p].expect("topological order");
                    let delay = if s.processor != proc { config.q_edge } else { 0 };
                    start = start.max(s.start + graph.wcet(p) + delay);
                }
                (start, proc)
            })
            .min()
            .expect("at least one processor");
        slots[t] = Some(Slot {
            processor: proc,
            start,
        });
        avail[proc] = start + graph.wcet(t);
    }
    slots.into_iter().map(|s| s.expect("all placed")).collect()
}
