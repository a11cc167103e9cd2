//! Ratio of the exact optimum to the analytic lower bound.

use std::time::Duration;

use serde::Serialize;

use crate::analysis::{check_single, check_x_pair, Mode};
use crate::comm::CommModel;
use crate::error::Result;
use crate::graph::TaskGraph;
use crate::instance::LatencyConstraint;
use crate::oracle::{optimal_schedule, Objective, OracleConfig};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy)]
pub struct RhoConfig {
    /// `None` runs the oracle on the allocation's own processor count.
    pub procs: Option<usize>,
    pub mode: Mode,
    pub time_budget: Duration,
    pub cap: usize,
}

impl RhoConfig {
    pub fn new(mode: Mode) -> Self {
        RhoConfig {
            procs: None,
            mode,
            time_budget: crate::oracle::DEFAULT_TIME_BUDGET,
            cap: crate::paths::DEFAULT_PATH_CAP,
        }
    }

    pub fn on(self, procs: usize) -> Self {
        RhoConfig {
            procs: Some(procs),
            ..self
        }
    }

    pub fn with_budget(self, time_budget: Duration) -> Self {
        RhoConfig {
            time_budget,
            ..self
        }
    }
}

/// `opt / lb` as a float; `lb = 0` gives 1 when `opt = 0`, else infinity.
pub fn ratio(opt: u64, lb: &Rational) -> f64 {
    if rational::is_zero(lb) {
        return if opt == 0 { 1.0 } else { f64::INFINITY };
    }
    opt as f64 / rational::to_f64(lb)
}

#[derive(Debug, Clone, Serialize)]
pub struct RhoPair {
    pub procs: usize,
    pub m: usize,
    pub m1: usize,
    pub m2: usize,
    pub mode: Mode,
    #[serde(with = "rational")]
    pub l1_lb: Rational,
    #[serde(with = "rational")]
    pub l2_lb: Rational,
    pub l1_opt: u64,
    pub l2_opt: u64,
    pub rho1: f64,
    pub rho2: f64,
    /// Both oracle runs exhausted their search space.
    pub optimal: bool,
}

/// X pair: `L1^opt` is the start of `c1.sink` minimized first (then
/// `c2.sink`); `L2^opt` is the start of `c2.sink` minimized first. Bounds are
/// taken with no communication overhead.
pub fn compute_rho(
    graph: &TaskGraph,
    c1: &LatencyConstraint,
    c2: &LatencyConstraint,
    config: &RhoConfig,
) -> Result<RhoPair> {
    let verdict = check_x_pair(graph, c1, c2, &CommModel::free(), config.mode, config.cap)?;
    let bounds = verdict.lower_bounds();
    let l1_lb = bounds.bounds[0].value;
    let l2_lb = bounds.bounds[1].value;
    let procs = config.procs.unwrap_or(verdict.m);
    let oracle = OracleConfig::new(procs).with_budget(config.time_budget);
    let run1 = optimal_schedule(
        graph,
        &Objective::lexicographic(&c1.sink, &c2.sink),
        &oracle,
    )?;
    let run2 = optimal_schedule(
        graph,
        &Objective::lexicographic(&c2.sink, &c1.sink),
        &oracle,
    )?;
    Ok(RhoPair {
        procs,
        m: verdict.m,
        m1: verdict.m1,
        m2: verdict.m2,
        mode: config.mode,
        rho1: ratio(run1.primary, &l1_lb),
        rho2: ratio(run2.primary, &l2_lb),
        l1_lb,
        l2_lb,
        l1_opt: run1.primary,
        l2_opt: run2.primary,
        optimal: run1.optimal && run2.optimal,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RhoSingle {
    pub procs: usize,
    pub m: usize,
    pub mode: Mode,
    #[serde(with = "rational")]
    pub lb: Rational,
    /// Optimal `S(sink) − S(source)`.
    pub opt: u64,
    pub rho: f64,
    pub optimal: bool,
}

/// Single constraint whose source precedes every task that reaches the sink
/// (as in generated single instances), so that minimizing the sink's start
/// minimizes the latency.
pub fn compute_rho_single(
    graph: &TaskGraph,
    constraint: &LatencyConstraint,
    config: &RhoConfig,
) -> Result<RhoSingle> {
    let verdict = check_single(graph, constraint, &CommModel::free(), config.mode, config.cap)?;
    let procs = config.procs.unwrap_or(verdict.m);
    let oracle = OracleConfig::new(procs).with_budget(config.time_budget);
    let run = optimal_schedule(graph, &Objective::single(&constraint.sink), &oracle)?;
    let start = |id: &str| run.schedule.start_of(id).expect("complete schedule");
    let opt = start(&constraint.sink) - start(&constraint.source);
    Ok(RhoSingle {
        procs,
        m: verdict.m,
        mode: config.mode,
        rho: ratio(opt, &verdict.lhs),
        lb: verdict.lhs,
        opt,
        optimal: run.optimal,
    })
}
