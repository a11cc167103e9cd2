//! Benchmark sweeps over generated X instances, streamed as CSV.

use std::io::Write;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::analysis::{analyze_system, Mode};
use crate::comm::CommModel;
use crate::error::Result;
use crate::generator::{generate_x_instance, GeneratorSpec};
use crate::rational;
use crate::rho::{compute_rho, RhoConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuntimeRecord {
    pub n: usize,
    pub density: f64,
    pub seed: u64,
    pub paths: Option<usize>,
    pub m: Option<usize>,
    pub runtime_us: Option<f64>,
    pub schedulable: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RuntimeSweep {
    pub ns: Vec<usize>,
    pub densities: Vec<f64>,
    pub reps: usize,
    pub seed_base: u64,
    pub mode: Mode,
    pub comm: CommModel,
    pub cap: usize,
}

/// Median of five runs when one run is faster than a millisecond.
fn time_analysis<F: FnMut()>(mut run: F) -> Duration {
    let started = Instant::now();
    run();
    let once = started.elapsed();
    if once >= Duration::from_millis(1) {
        return once;
    }
    let mut samples: Vec<Duration> = (0..5)
        .map(|_| {
            let t = Instant::now();
            run();
            t.elapsed()
        })
        .collect();
    samples.sort_unstable();
    samples[2]
}

/// One record per (n, density, rep), seed `seed_base + rep`. Each record is
/// written and flushed before the next instance is generated.
pub fn bench_runtime<W: Write>(sweep: &RuntimeSweep, out: W) -> Result<Vec<RuntimeRecord>> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record([
        "n",
        "density",
        "seed",
        "paths",
        "m",
        "runtime_us",
        "schedulable",
        "error",
    ])?;
    let mut records = Vec::new();
    for &n in &sweep.ns {
        for &density in &sweep.densities {
            for rep in 0..sweep.reps {
                let seed = sweep.seed_base + rep as u64;
                let record = runtime_record(sweep, n, density, seed);
                writer.write_record([
                    n.to_string(),
                    density.to_string(),
                    seed.to_string(),
                    opt_cell(record.paths),
                    opt_cell(record.m),
                    record.runtime_us.map(|r| format!("{r:.3}")).unwrap_or_default(),
                    opt_cell(record.schedulable),
                    record.error.clone().unwrap_or_default(),
                ])?;
                writer.flush()?;
                records.push(record);
            }
        }
    }
    Ok(records)
}

fn runtime_record(sweep: &RuntimeSweep, n: usize, density: f64, seed: u64) -> RuntimeRecord {
    let mut record = RuntimeRecord {
        n,
        density,
        seed,
        paths: None,
        m: None,
        runtime_us: None,
        schedulable: None,
        error: None,
    };
    let inst = match generate_x_instance(&GeneratorSpec::new(n, density, seed)) {
        Ok(inst) => inst,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    let constraints = [inst.c1, inst.c2];
    let mut report = None;
    let elapsed = time_analysis(|| {
        report = Some(analyze_system(
            &inst.graph,
            &constraints,
            &sweep.comm,
            sweep.mode,
            sweep.cap,
        ));
    });
    let report = report.expect("analysis ran");
    record.runtime_us = Some(elapsed.as_secs_f64() * 1e6);
    record.paths = Some(report.path_count());
    record.m = Some(report.max_m());
    record.schedulable = Some(report.system_schedulable);
    if !report.errors.is_empty() {
        record.error = Some(report.errors.join("; "));
    }
    record
}

fn opt_cell<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoRecord {
    pub n: usize,
    pub density: f64,
    pub seed: u64,
    /// True for the row run on the allocation's own processor count.
    pub at_m: bool,
    pub procs: Option<usize>,
    pub m: Option<usize>,
    pub mode: Mode,
    pub l1_lb: Option<String>,
    pub l2_lb: Option<String>,
    pub l1_opt: Option<u64>,
    pub l2_opt: Option<u64>,
    pub rho1: Option<f64>,
    pub rho2: Option<f64>,
    pub optimal: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RhoSweep {
    pub ns: Vec<usize>,
    pub procs: Vec<usize>,
    pub reps: usize,
    pub seed_base: u64,
    pub density: f64,
    pub mode: Mode,
    pub time_budget: Duration,
    pub cap: usize,
}

/// Per instance, one row on `m` processors followed by one row per entry of
/// `procs`.
pub fn bench_rho<W: Write>(sweep: &RhoSweep, out: W) -> Result<Vec<RhoRecord>> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record([
        "n", "density", "seed", "at_m", "procs", "m", "mode", "l1_lb", "l2_lb", "l1_opt",
        "l2_opt", "rho1", "rho2", "optimal", "error",
    ])?;
    let mut records = Vec::new();
    for &n in &sweep.ns {
        for rep in 0..sweep.reps {
            let seed = sweep.seed_base + rep as u64;
            let runs = std::iter::once(None).chain(sweep.procs.iter().copied().map(Some));
            for procs in runs {
                let record = rho_record(sweep, n, seed, procs);
                writer.write_record([
                    n.to_string(),
                    sweep.density.to_string(),
                    seed.to_string(),
                    record.at_m.to_string(),
                    opt_cell(record.procs),
                    opt_cell(record.m),
                    record.mode.to_string(),
                    record.l1_lb.clone().unwrap_or_default(),
                    record.l2_lb.clone().unwrap_or_default(),
                    opt_cell(record.l1_opt),
                    opt_cell(record.l2_opt),
                    record.rho1.map(|r| format!("{r:.3}")).unwrap_or_default(),
                    record.rho2.map(|r| format!("{r:.3}")).unwrap_or_default(),
                    opt_cell(record.optimal),
                    record.error.clone().unwrap_or_default(),
                ])?;
                writer.flush()?;
                records.push(record);
            }
        }
    }
    Ok(records)
}

fn rho_record(sweep: &RhoSweep, n: usize, seed: u64, procs: Option<usize>) -> RhoRecord {
    let mut record = RhoRecord {
        n,
        density: sweep.density,
        seed,
        at_m: procs.is_none(),
        procs,
        m: None,
        mode: sweep.mode,
        l1_lb: None,
        l2_lb: None,
        l1_opt: None,
        l2_opt: None,
        rho1: None,
        rho2: None,
        optimal: None,
        error: None,
    };
    let outcome = generate_x_instance(&GeneratorSpec::new(n, sweep.density, seed)).and_then(|inst| {
        let mut config = RhoConfig::new(sweep.mode).with_budget(sweep.time_budget);
        config.cap = sweep.cap;
        config.procs = procs;
        compute_rho(&inst.graph, &inst.c1, &inst.c2, &config)
    });
    match outcome {
        Ok(r) => {
            record.procs = Some(r.procs);
            record.m = Some(r.m);
            record.l1_lb = Some(rational::format(&r.l1_lb));
            record.l2_lb = Some(rational::format(&r.l2_lb));
            record.l1_opt = Some(r.l1_opt);
            record.l2_opt = Some(r.l2_opt);
            record.rho1 = Some(r.rho1);
            record.rho2 = Some(r.rho2);
            record.optimal = Some(r.optimal);
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}
