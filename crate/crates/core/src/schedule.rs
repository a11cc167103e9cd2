//! Non-preemptive multiprocessor schedules and their certification.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::TaskGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub processor: usize,
    pub start: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub num_procs: usize,
    pub makespan: u64,
    pub assignment: BTreeMap<String, Slot>,
}

impl Schedule {
    pub fn start_of(&self, id: &str) -> Option<u64> {
        self.assignment.get(id).map(|s| s.start)
    }

    pub(crate) fn from_slots(graph: &TaskGraph, num_procs: usize, slots: &[Slot]) -> Schedule {
        let makespan = slots
            .iter()
            .enumerate()
            .map(|(t, s)| s.start + graph.wcet(t))
            .max()
            .unwrap_or(0);
        Schedule {
            num_procs,
            makespan,
            assignment: slots
                .iter()
                .enumerate()
                .map(|(t, s)| (graph.id(t).to_string(), *s))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ScheduleViolation {
    Missing { task: String },
    UnknownTask { task: String },
    BadProcessor { task: String, processor: usize },
    Overlap { processor: usize, first: String, second: String },
    Precedence { from: String, to: String, earliest: u64, start: u64 },
    Makespan { declared: u64, actual: u64 },
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleViolation::Missing { task } => write!(f, "task `{task}` is not scheduled"),
            ScheduleViolation::UnknownTask { task } => write!(f, "unknown task `{task}`"),
            ScheduleViolation::BadProcessor { task, processor } => {
                write!(f, "task `{task}` on processor {processor}, which does not exist")
            }
            ScheduleViolation::Overlap {
                processor,
                first,
                second,
            } => write!(f, "`{first}` and `{second}` overlap on processor {processor}"),
            ScheduleViolation::Precedence {
                from,
                to,
                earliest,
                start,
            } => write!(
                f,
                "edge ({from}, {to}): `{to}` starts at {start}, earliest allowed {earliest}"
            ),
            ScheduleViolation::Makespan { declared, actual } => {
                write!(f, "declared makespan {declared}, actual {actual}")
            }
        }
    }
}

/// Checks that every task runs exactly once on an existing processor, that
/// no two tasks overlap on a processor, and that every edge `(u, v)` has
/// `start(v) >= start(u) + C(u)` (plus `q_edge` across processors).
pub fn validate_schedule(
    schedule: &Schedule,
    graph: &TaskGraph,
    q_edge: u64,
) -> Vec<ScheduleViolation> {
    let mut out = Vec::new();
    for id in schedule.assignment.keys() {
        if graph.index_of(id).is_none() {
            out.push(ScheduleViolation::UnknownTask { task: id.clone() });
        }
    }
    let mut slots = Vec::with_capacity(graph.len());
    for t in 0..graph.len() {
        match schedule.assignment.get(graph.id(t)) {
            Some(slot) => {
                if slot.processor >= schedule.num_procs {
                    out.push(ScheduleViolation::BadProcessor {
                        task: graph.id(t).to_string(),
                        processor: slot.processor,
                    });
                }
                slots.push(Some(*slot));
            }
            None => {
                out.push(ScheduleViolation::Missing {
                    task: graph.id(t).to_string(),
                });
                slots.push(None);
            }
        }
    }

    let mut by_proc: BTreeMap<usize, Vec<(u64, usize)>> = BTreeMap::new();
    for (t, slot) in slots.iter().enumerate() {
        if let Some(s) = slot {
            by_proc.entry(s.processor).or_default().push((s.start, t));
        }
    }
    for (proc, mut runs) in by_proc {
        runs.sort_unstable();
        for pair in runs.windows(2) {
            let (s0, t0) = pair[0];
            let (s1, t1) = pair[1];
            if s0 + graph.wcet(t0) > s1 {
                out.push(ScheduleViolation::Overlap {
                    processor: proc,
                    first: graph.id(t0).to_string(),
                    second: graph.id(t1).to_string(),
                });
            }
        }
    }

    for &(u, v) in graph.edges() {
        let (Some(su), Some(sv)) = (slots[u], slots[v]) else {
            continue;
        };
        let delay = if su.processor != sv.processor { q_edge } else { 0 };
        let earliest = su.start + graph.wcet(u) + delay;
        if sv.start < earliest {
            out.push(ScheduleViolation::Precedence {
                from: graph.id(u).to_string(),
                to: graph.id(v).to_string(),
                earliest,
                start: sv.start,
            });
        }
    }

    if slots.iter().all(Option::is_some) {
        let actual = slots
            .iter()
            .enumerate()
            .map(|(t, s)| s.unwrap().start + graph.wcet(t))
            .max()
            .unwrap_or(0);
        if actual != schedule.makespan {
            out.push(ScheduleViolation::Makespan {
                declared: schedule.makespan,
                actual,
            });
        }
    }
    out
}
