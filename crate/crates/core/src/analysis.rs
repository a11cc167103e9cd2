//! Schedulability conditions and lower bounds on latency values.
//!
//! For a single constraint the latency achieved by the path-based allocation
//! on `m` processors is bounded by
//!
//! ```text
//!   sum C(shared tasks of the selected paths)
//! + max over selected paths of sum C(tasks exclusive to that path)
//! + M(m)
//! ```
//!
//! and the same expression is the practical lower bound `L^lb`. For a pair of
//! constraints `(a, b)` and `(c, d)` in X, the cross paths `c -> b` and
//! `a -> d` must additionally fit within the respective bounds, with `M(m)`
//! charged for the joint processor count.
//!
//! `Mode::Literal` evaluates these terms as written. `Mode::Strict` leaves the
//! final task's WCET out of every path sum, since latency is measured from
//! start to start.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::allocation::{allocate, allocate_pair, Allocation, PairAllocation};
use crate::comm::CommModel;
use crate::error::{Error, Result};
use crate::graph::{TaskGraph, TaskIdx};
use crate::instance::LatencyConstraint;
use crate::pairs::{classify_pair, PairConfiguration, PairKind};
use crate::paths::enumerate_paths;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Literal,
    Strict,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Literal => "literal",
            Mode::Strict => "strict",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(Mode::Literal),
            "strict" => Ok(Mode::Strict),
            other => Err(Error::InvalidArgument(format!("unknown mode `{other}`"))),
        }
    }
}

impl Mode {
    /// WCET of the final task of a path, as it enters path sums.
    fn terminal_weight(self, graph: &TaskGraph, t: TaskIdx) -> u64 {
        match self {
            Mode::Literal => graph.wcet(t),
            Mode::Strict => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SingleVerdict {
    pub constraint: LatencyConstraint,
    pub m: usize,
    pub mode: Mode,
    pub shared_sum: u64,
    pub exclusive_max: u64,
    #[serde(with = "rational")]
    pub overhead: Rational,
    #[serde(with = "rational")]
    pub lhs: Rational,
    #[serde(with = "rational")]
    pub slack: Rational,
    pub schedulable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstraintBound {
    pub constraint: LatencyConstraint,
    #[serde(with = "rational")]
    pub value: Rational,
    /// The bound set on the constraint is below `value`.
    pub necessarily_unschedulable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LowerBounds {
    pub mode: Mode,
    pub bounds: Vec<ConstraintBound>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct XVerdict {
    pub c1: LatencyConstraint,
    pub c2: LatencyConstraint,
    pub m1: usize,
    pub m2: usize,
    pub m: usize,
    pub mode: Mode,
    pub first: SingleVerdict,
    pub second: SingleVerdict,
    /// Longest `c -> b` path (mode-adjusted) plus `M(m)`; compared with L1.
    #[serde(with = "rational")]
    pub cross1: Rational,
    /// Longest `a -> d` path (mode-adjusted) plus `M(m)`; compared with L2.
    #[serde(with = "rational")]
    pub cross2: Rational,
    pub cross1_paths: usize,
    pub cross2_paths: usize,
    pub schedulable: bool,
}

impl XVerdict {
    pub fn cross1_ok(&self) -> bool {
        self.cross1 <= rational::from_int(self.c1.bound)
    }

    pub fn cross2_ok(&self) -> bool {
        self.cross2 <= rational::from_int(self.c2.bound)
    }

    pub fn lower_bounds(&self) -> LowerBounds {
        let l1 = self.first.lhs.max(self.cross1);
        let l2 = self.second.lhs.max(self.cross2);
        LowerBounds {
            mode: self.mode,
            bounds: vec![bound_entry(&self.c1, l1), bound_entry(&self.c2, l2)],
        }
    }
}

fn bound_entry(c: &LatencyConstraint, value: Rational) -> ConstraintBound {
    ConstraintBound {
        constraint: c.clone(),
        value,
        necessarily_unschedulable: rational::from_int(c.bound) < value,
    }
}

/// The single-constraint expression over the paths an allocation selected.
pub fn evaluate_allocation(
    graph: &TaskGraph,
    alloc: &Allocation,
    comm: &CommModel,
    mode: Mode,
) -> SingleVerdict {
    let selected = alloc.selected_set();
    let sink = selected.sink;
    let shared_sum: u64 = selected
        .shared
        .iter()
        .map(|&t| {
            if t == sink {
                mode.terminal_weight(graph, t)
            } else {
                graph.wcet(t)
            }
        })
        .sum();
    let exclusive_max = selected
        .exclusive
        .iter()
        .map(|only| only.iter().map(|&t| graph.wcet(t)).sum::<u64>())
        .max()
        .unwrap_or(0);
    let overhead = comm.overhead(alloc.m);
    let lhs = rational::from_int(shared_sum + exclusive_max) + overhead;
    let slack = rational::from_int(alloc.constraint.bound) - lhs;
    SingleVerdict {
        constraint: alloc.constraint.clone(),
        m: alloc.m,
        mode,
        shared_sum,
        exclusive_max,
        overhead,
        lhs,
        slack,
        schedulable: slack >= Rational::from_integer(0),
    }
}

pub fn check_single(
    graph: &TaskGraph,
    constraint: &LatencyConstraint,
    comm: &CommModel,
    mode: Mode,
    cap: usize,
) -> Result<SingleVerdict> {
    let alloc = allocate(graph, constraint, cap)?;
    Ok(evaluate_allocation(graph, &alloc, comm, mode))
}

pub fn lower_bound_single(
    graph: &TaskGraph,
    constraint: &LatencyConstraint,
    comm: &CommModel,
    mode: Mode,
    cap: usize,
) -> Result<LowerBounds> {
    let verdict = check_single(graph, constraint, comm, mode, cap)?;
    Ok(LowerBounds {
        mode,
        bounds: vec![bound_entry(constraint, verdict.lhs)],
    })
}

/// Longest path from `from` to `to` by enumeration, mode-adjusted, with the
/// number of paths seen.
fn cross_term(
    graph: &TaskGraph,
    from: TaskIdx,
    to: TaskIdx,
    mode: Mode,
    cap: usize,
) -> Result<(u64, usize)> {
    let set = enumerate_paths(graph, from, to, cap)?;
    let longest = set.max_length().expect("enumeration yields at least one path");
    let adjusted = longest - graph.wcet(to) + mode.terminal_weight(graph, to);
    Ok((adjusted, set.len()))
}

/// Evaluates the X-pair conditions given both allocations. Does not check
/// the configuration.
pub fn evaluate_x_pair(
    graph: &TaskGraph,
    pair: &PairAllocation,
    comm: &CommModel,
    mode: Mode,
    cap: usize,
) -> Result<XVerdict> {
    let c1 = &pair.first.constraint;
    let c2 = &pair.second.constraint;
    let (a, b) = c1.endpoints(graph)?;
    let (c, d) = c2.endpoints(graph)?;
    let first = evaluate_allocation(graph, &pair.first, comm, mode);
    let second = evaluate_allocation(graph, &pair.second, comm, mode);
    let joint_overhead = comm.overhead(pair.m);
    let (len1, n1) = cross_term(graph, c, b, mode, cap)?;
    let (len2, n2) = cross_term(graph, a, d, mode, cap)?;
    let cross1 = rational::from_int(len1) + joint_overhead;
    let cross2 = rational::from_int(len2) + joint_overhead;
    let schedulable = first.schedulable
        && second.schedulable
        && cross1 <= rational::from_int(c1.bound)
        && cross2 <= rational::from_int(c2.bound);
    Ok(XVerdict {
        c1: c1.clone(),
        c2: c2.clone(),
        m1: pair.first.m,
        m2: pair.second.m,
        m: pair.m,
        mode,
        first,
        second,
        cross1,
        cross2,
        cross1_paths: n1,
        cross2_paths: n2,
        schedulable,
    })
}

pub fn check_x_pair(
    graph: &TaskGraph,
    c1: &LatencyConstraint,
    c2: &LatencyConstraint,
    comm: &CommModel,
    mode: Mode,
    cap: usize,
) -> Result<XVerdict> {
    let config = classify_pair(graph, c1, c2)?;
    if config.kind != PairKind::X {
        return Err(Error::NotXConfiguration(config.kind));
    }
    let pair = allocate_pair(graph, c1, c2, cap)?;
    evaluate_x_pair(graph, &pair, comm, mode, cap)
}

pub fn lower_bounds_x(
    graph: &TaskGraph,
    c1: &LatencyConstraint,
    c2: &LatencyConstraint,
    comm: &CommModel,
    mode: Mode,
    cap: usize,
) -> Result<LowerBounds> {
    Ok(check_x_pair(graph, c1, c2, comm, mode, cap)?.lower_bounds())
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintReport {
    pub constraint: LatencyConstraint,
    pub paths: Option<usize>,
    pub verdict: Option<SingleVerdict>,
    #[serde(with = "rational::opt")]
    pub lower_bound: Option<Rational>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub first: usize,
    pub second: usize,
    pub kind: Option<PairKind>,
    pub forward: Option<Vec<String>>,
    pub backward: Option<Vec<String>>,
    pub x: Option<XVerdict>,
    pub lower_bounds: Option<LowerBounds>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SystemReport {
    pub mode: Mode,
    pub comm: CommModel,
    pub system_schedulable: bool,
    pub constraints: Vec<ConstraintReport>,
    pub pairs: Vec<PairReport>,
    pub errors: Vec<String>,
}

impl SystemReport {
    /// Total number of enumerated paths over all constraints.
    pub fn path_count(&self) -> usize {
        self.constraints.iter().filter_map(|c| c.paths).sum()
    }

    /// Largest processor count: joint counts of X pairs, else per-constraint.
    pub fn max_m(&self) -> usize {
        let singles = self
            .constraints
            .iter()
            .filter_map(|c| c.verdict.as_ref().map(|v| v.m));
        let joints = self.pairs.iter().filter_map(|p| p.x.as_ref().map(|x| x.m));
        singles.chain(joints).max().unwrap_or(0)
    }
}

/// Checks a whole system: a single-constraint check per constraint, and the
/// X-pair conditions for every pair in X. Parallel and Z pairs need nothing
/// beyond their single checks. Failures are collected, not propagated.
pub fn analyze_system(
    graph: &TaskGraph,
    constraints: &[LatencyConstraint],
    comm: &CommModel,
    mode: Mode,
    cap: usize,
) -> SystemReport {
    let mut errors = Vec::new();
    let mut allocs: Vec<Option<Allocation>> = Vec::with_capacity(constraints.len());
    let mut reports = Vec::with_capacity(constraints.len());
    for (i, c) in constraints.iter().enumerate() {
        match allocate(graph, c, cap) {
            Ok(alloc) => {
                let verdict = evaluate_allocation(graph, &alloc, comm, mode);
                reports.push(ConstraintReport {
                    constraint: c.clone(),
                    paths: Some(alloc.paths.len()),
                    lower_bound: Some(verdict.lhs),
                    verdict: Some(verdict),
                    error: None,
                });
                allocs.push(Some(alloc));
            }
            Err(e) => {
                errors.push(format!("constraint #{i}: {e}"));
                reports.push(ConstraintReport {
                    constraint: c.clone(),
                    paths: None,
                    verdict: None,
                    lower_bound: None,
                    error: Some(e.to_string()),
                });
                allocs.push(None);
            }
        }
    }

    let mut pairs = Vec::new();
    for i in 0..constraints.len() {
        for j in i + 1..constraints.len() {
            let mut report = PairReport {
                first: i,
                second: j,
                kind: None,
                forward: None,
                backward: None,
                x: None,
                lower_bounds: None,
                error: None,
            };
            match pair_check(graph, constraints, &allocs, i, j, comm, mode, cap) {
                Ok((config, x)) => {
                    report.kind = Some(config.kind);
                    report.forward = config.forward.map(|p| graph.id_vec(&p));
                    report.backward = config.backward.map(|p| graph.id_vec(&p));
                    report.lower_bounds = x.as_ref().map(XVerdict::lower_bounds);
                    report.x = x;
                }
                Err(e) => {
                    errors.push(format!("pair ({i}, {j}): {e}"));
                    report.error = Some(e.to_string());
                }
            }
            pairs.push(report);
        }
    }

    let system_schedulable = errors.is_empty()
        && reports
            .iter()
            .all(|r| r.verdict.as_ref().is_some_and(|v| v.schedulable))
        && pairs
            .iter()
            .all(|p| p.x.as_ref().is_none_or(|x| x.schedulable));
    SystemReport {
        mode,
        comm: *comm,
        system_schedulable,
        constraints: reports,
        pairs,
        errors,
    }
}

#[allow(clippy::too_many_arguments)]
fn pair_check(
    graph: &TaskGraph,
    constraints: &[LatencyConstraint],
    allocs: &[Option<Allocation>],
    i: usize,
    j: usize,
    comm: &CommModel,
    mode: Mode,
    cap: usize,
) -> Result<(PairConfiguration, Option<XVerdict>)> {
    let config = classify_pair(graph, &constraints[i], &constraints[j])?;
    if config.kind != PairKind::X {
        return Ok((config, None));
    }
    let (Some(first), Some(second)) = (&allocs[i], &allocs[j]) else {
        // the per-constraint error is already recorded
        return Ok((config, None));
    };
    let mut joint = first.assignment.clone();
    let pair = joint_pair(graph, first, second, &mut joint);
    let verdict = evaluate_x_pair(graph, &pair, comm, mode, cap)?;
    Ok((config, Some(verdict)))
}

fn joint_pair(
    graph: &TaskGraph,
    first: &Allocation,
    second: &Allocation,
    joint: &mut [Option<usize>],
) -> PairAllocation {
    let rerun = crate::allocation::select_paths(graph, &second.paths, joint, first.m);
    PairAllocation {
        first: first.clone(),
        second: second.clone(),
        m: first.m + rerun.len(),
        joint_selected: rerun,
        joint_assignment: joint.to_vec(),
    }
}
