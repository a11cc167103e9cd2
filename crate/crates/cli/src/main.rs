use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use latsched::analysis::{analyze_system, SystemReport};
use latsched::bench::{bench_rho, bench_runtime, RhoSweep, RuntimeSweep};
use latsched::generator::{generate_x_instance, instance_stats, GeneratorSpec};
use latsched::instance::{Instance, InstanceFile};
use latsched::oracle::{optimal_schedule, Objective, OracleConfig};
use latsched::paths::enumerate_paths_by_id;
use latsched::rational::{self, Rational};
use latsched::rho::{compute_rho, compute_rho_single, RhoConfig};
use latsched::{allocate, allocate_pair, classify_pair, CommKind, CommModel, Mode, PairKind};

#[derive(Parser)]
#[command(name = "latsched", version, about = "Latency-constrained DAG schedulability toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a graph file against the structural rules
    Validate(GraphArgs),
    /// List the paths of each latency constraint
    Paths(PathsArgs),
    /// Path-based processor allocation
    Allocate(AllocateArgs),
    /// Schedulability verdict; exit 0 schedulable, 1 not, 2 error
    Check(AnalysisArgs),
    /// Lower bounds on latency values
    Bounds(AnalysisArgs),
    /// Random instance with two latency constraints in X
    Generate(GenerateArgs),
    /// Exact schedule minimizing the start of one or two tasks
    Oracle(OracleArgs),
    /// Optimal latency over its lower bound
    Rho(RhoArgs),
    /// Analysis runtime sweep, CSV
    BenchRuntime(BenchRuntimeArgs),
    /// Optimum-over-bound sweep, CSV
    BenchRho(BenchRhoArgs),
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PathsArgs {
    #[command(flatten)]
    io: GraphArgs,
    /// Enumerate between these two tasks instead of the file's constraints
    #[arg(long, requires = "sink")]
    source: Option<String>,
    #[arg(long, requires = "source")]
    sink: Option<String>,
    #[arg(long, default_value_t = latsched::DEFAULT_PATH_CAP)]
    cap: usize,
}

#[derive(Args)]
struct AllocateArgs {
    #[command(flatten)]
    io: GraphArgs,
    /// Index of a single constraint to allocate
    #[arg(long)]
    constraint: Option<usize>,
    #[arg(long, default_value_t = latsched::DEFAULT_PATH_CAP)]
    cap: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Literal,
    Strict,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Literal => Mode::Literal,
            ModeArg::Strict => Mode::Strict,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CommArg {
    Linear,
    Log,
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    rational::parse(s).ok_or_else(|| format!("not a number: `{s}`"))
}

#[derive(Args)]
struct AnalysisArgs {
    #[command(flatten)]
    io: GraphArgs,
    #[arg(long, value_enum, default_value = "literal")]
    mode: ModeArg,
    /// Overrides the communication model of the file
    #[arg(long, value_enum)]
    comm: Option<CommArg>,
    #[arg(long, value_parser = parse_rational)]
    q: Option<Rational>,
    #[arg(long, default_value_t = latsched::DEFAULT_PATH_CAP)]
    cap: usize,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    wcet_min: u64,
    #[arg(long, default_value_t = 10)]
    wcet_max: u64,
    /// All WCETs equal to 1
    #[arg(long)]
    unit: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    procs: usize,
    #[arg(long)]
    objective: String,
    #[arg(long)]
    secondary: Option<String>,
    #[arg(long, default_value_t = 0)]
    q_edge: u64,
    /// Search time budget in seconds
    #[arg(long, default_value_t = 60.0)]
    budget: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RhoArgs {
    #[command(flatten)]
    io: GraphArgs,
    /// Defaults to the processor count of the allocation
    #[arg(long)]
    procs: Option<usize>,
    #[arg(long, value_enum, default_value = "strict")]
    mode: ModeArg,
    #[arg(long, default_value_t = 60.0)]
    budget: f64,
    #[arg(long, default_value_t = latsched::DEFAULT_PATH_CAP)]
    cap: usize,
}

#[derive(Args)]
struct BenchRuntimeArgs {
    #[arg(long, value_delimiter = ',', default_value = "8,10,12,14,16")]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.4,0.6")]
    density: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "literal")]
    mode: ModeArg,
    #[arg(long, default_value_t = latsched::DEFAULT_PATH_CAP)]
    cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchRhoArgs {
    #[arg(long, value_delimiter = ',', default_value = "12,14,16")]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "4,3,2")]
    procs: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.4)]
    density: f64,
    #[arg(long, value_enum, default_value = "strict")]
    mode: ModeArg,
    #[arg(long, default_value_t = 60.0)]
    budget: f64,
    #[arg(long, default_value_t = latsched::DEFAULT_PATH_CAP)]
    cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<io::Error>())
        .any(|e| e.kind() == io::ErrorKind::BrokenPipe)
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    let mut w = sink(out)?;
    w.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn load(path: &Path) -> Result<Instance> {
    Instance::read(path).with_context(|| format!("cannot load {}", path.display()))
}

fn budget(secs: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(secs).context("bad time budget")
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Validate(args) => validate(args),
        Command::Paths(args) => paths(args),
        Command::Allocate(args) => allocate_cmd(args),
        Command::Check(args) => check(args),
        Command::Bounds(args) => bounds(args),
        Command::Generate(args) => generate(args),
        Command::Oracle(args) => oracle(args),
        Command::Rho(args) => rho(args),
        Command::BenchRuntime(args) => {
            let sweep = RuntimeSweep {
                ns: args.n,
                densities: args.density,
                reps: args.reps,
                seed_base: args.seed,
                mode: args.mode.into(),
                comm: CommModel::free(),
                cap: args.cap,
            };
            bench_runtime(&sweep, sink(args.out.as_deref())?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::BenchRho(args) => {
            let sweep = RhoSweep {
                ns: args.n,
                procs: args.procs,
                reps: args.reps,
                seed_base: args.seed,
                density: args.density,
                mode: args.mode.into(),
                time_budget: budget(args.budget)?,
                cap: args.cap,
            };
            bench_rho(&sweep, sink(args.out.as_deref())?)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn validate(args: GraphArgs) -> Result<ExitCode> {
    let file = InstanceFile::read(&args.graph)
        .with_context(|| format!("cannot read {}", args.graph.display()))?;
    let report = file.validate();
    let text = if args.json {
        serde_json::to_string_pretty(&json!({
            "ok": report.is_ok(),
            "violations": report.violations,
            "notes": report.notes,
        }))?
    } else if report.is_ok() && report.notes.is_empty() {
        "ok".to_string()
    } else {
        report.to_string()
    };
    emit(args.out.as_deref(), &text)?;
    Ok(if report.is_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn paths(args: PathsArgs) -> Result<ExitCode> {
    let inst = load(&args.io.graph)?;
    let g = &inst.graph;
    let pairs: Vec<(String, String)> = match (args.source, args.sink) {
        (Some(a), Some(b)) => vec![(a, b)],
        _ => inst
            .constraints
            .iter()
            .map(|c| (c.source.clone(), c.sink.clone()))
            .collect(),
    };
    if pairs.is_empty() {
        bail!("no constraints in the file; pass --source and --sink");
    }
    let mut docs = Vec::new();
    for (a, b) in &pairs {
        docs.push(enumerate_paths_by_id(g, a, b, args.cap)?.to_doc(g));
    }
    let text = if args.io.json {
        serde_json::to_string_pretty(&docs)?
    } else {
        let mut s = String::new();
        for d in &docs {
            s += &format!("{} -> {}: {} paths\n", d.source, d.sink, d.paths.len());
            for (i, p) in d.paths.iter().enumerate() {
                s += &format!("  p{} [{}] {}\n", i + 1, p.length, p.tasks.join(" "));
            }
            s += &format!("  shared: {}\n", d.shared.join(" "));
        }
        s
    };
    emit(args.io.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn allocate_cmd(args: AllocateArgs) -> Result<ExitCode> {
    let inst = load(&args.io.graph)?;
    let g = &inst.graph;
    let value = match args.constraint {
        Some(i) => {
            let c = inst
                .constraints
                .get(i)
                .with_context(|| format!("no constraint #{i}"))?;
            serde_json::to_value(allocate(g, c, args.cap)?.to_doc(g))?
        }
        None => {
            let mut singles = Vec::new();
            for c in &inst.constraints {
                singles.push(allocate(g, c, args.cap)?.to_doc(g));
            }
            let mut joint = Vec::new();
            for i in 0..inst.constraints.len() {
                for j in i + 1..inst.constraints.len() {
                    let (c1, c2) = (&inst.constraints[i], &inst.constraints[j]);
                    if classify_pair(g, c1, c2)?.kind == PairKind::X {
                        let pair = allocate_pair(g, c1, c2, args.cap)?;
                        joint.push(json!({"first": i, "second": j, "allocation": pair.joint_doc(g)}));
                    }
                }
            }
            json!({"constraints": singles, "x_pairs": joint})
        }
    };
    emit(args.io.out.as_deref(), &serde_json::to_string_pretty(&value)?)?;
    Ok(ExitCode::SUCCESS)
}

fn comm_of(args: &AnalysisArgs, inst: &Instance) -> CommModel {
    let mut comm = inst.comm;
    if let Some(kind) = args.comm {
        comm.kind = match kind {
            CommArg::Linear => CommKind::Linear,
            CommArg::Log => CommKind::Log,
        };
    }
    if let Some(q) = args.q {
        comm.q = q;
    }
    comm
}

fn header(mode: Mode, comm: &CommModel) -> String {
    let kind = match comm.kind {
        CommKind::Linear => "linear".to_string(),
        CommKind::Log => format!("log base {}", comm.base),
    };
    format!("mode: {mode} | comm: {kind}, q = {}", rational::format(&comm.q))
}

fn system(args: &AnalysisArgs) -> Result<(Instance, SystemReport)> {
    let inst = load(&args.io.graph)?;
    if inst.constraints.is_empty() {
        bail!("no latency constraints in {}", args.io.graph.display());
    }
    let comm = comm_of(args, &inst);
    let report = analyze_system(&inst.graph, &inst.constraints, &comm, args.mode.into(), args.cap);
    Ok((inst, report))
}

fn check(args: AnalysisArgs) -> Result<ExitCode> {
    let (_, report) = system(&args)?;
    let text = if args.io.json {
        serde_json::to_string_pretty(&report)?
    } else {
        let mut s = header(report.mode, &report.comm) + "\n";
        for (i, c) in report.constraints.iter().enumerate() {
            let k = &c.constraint;
            s += &format!("constraint #{i} ({} -> {}, L = {}): ", k.source, k.sink, k.bound);
            match (&c.verdict, &c.error) {
                (Some(v), _) => {
                    s += &format!(
                        "m = {}, lhs = {}, slack = {}, {}\n",
                        v.m,
                        rational::format(&v.lhs),
                        rational::format(&v.slack),
                        verdict_word(v.schedulable)
                    )
                }
                (None, Some(e)) => s += &format!("error: {e}\n"),
                (None, None) => s += "skipped\n",
            }
        }
        for p in &report.pairs {
            s += &format!("pair ({}, {}): ", p.first, p.second);
            match (&p.kind, &p.x, &p.error) {
                (_, Some(x), _) => {
                    s += &format!(
                        "X, m1 = {}, m2 = {}, m = {}, cross1 = {}, cross2 = {}, {}\n",
                        x.m1,
                        x.m2,
                        x.m,
                        rational::format(&x.cross1),
                        rational::format(&x.cross2),
                        verdict_word(x.schedulable)
                    )
                }
                (Some(kind), None, _) => s += &format!("{kind}, covered by single checks\n"),
                (None, _, Some(e)) => s += &format!("error: {e}\n"),
                (None, _, None) => s += "skipped\n",
            }
        }
        s += &format!("system: {}\n", verdict_word(report.system_schedulable));
        s
    };
    emit(args.io.out.as_deref(), &text)?;
    Ok(if !report.errors.is_empty() {
        ExitCode::from(2)
    } else if report.system_schedulable {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn verdict_word(ok: bool) -> &'static str {
    if ok {
        "schedulable"
    } else {
        "not schedulable"
    }
}

fn bounds(args: AnalysisArgs) -> Result<ExitCode> {
    let (_, report) = system(&args)?;
    let singles: Vec<_> = report
        .constraints
        .iter()
        .map(|c| {
            json!({
                "source": c.constraint.source,
                "sink": c.constraint.sink,
                "bound": c.constraint.bound,
                "lower_bound": c.lower_bound.map(|v| rational::format(&v)),
                "error": c.error,
            })
        })
        .collect();
    let pairs: Vec<_> = report
        .pairs
        .iter()
        .filter_map(|p| p.lower_bounds.as_ref().map(|lb| (p, lb)))
        .map(|(p, lb)| {
            json!({
                "first": p.first,
                "second": p.second,
                "l1_lb": rational::format(&lb.bounds[0].value),
                "l2_lb": rational::format(&lb.bounds[1].value),
                "l1_unschedulable": lb.bounds[0].necessarily_unschedulable,
                "l2_unschedulable": lb.bounds[1].necessarily_unschedulable,
            })
        })
        .collect();
    let text = if args.io.json {
        serde_json::to_string_pretty(&json!({
            "mode": report.mode,
            "comm": report.comm,
            "constraints": singles,
            "x_pairs": pairs,
        }))?
    } else {
        let mut s = header(report.mode, &report.comm) + "\n";
        for (i, c) in report.constraints.iter().enumerate() {
            let k = &c.constraint;
            match c.lower_bound {
                Some(v) => {
                    s += &format!(
                        "constraint #{i} ({} -> {}): L^lb = {} (set to {})\n",
                        k.source,
                        k.sink,
                        rational::format(&v),
                        k.bound
                    )
                }
                None => s += &format!("constraint #{i}: error\n"),
            }
        }
        for p in &report.pairs {
            if let Some(lb) = &p.lower_bounds {
                s += &format!(
                    "X pair ({}, {}): L1^lb = {}, L2^lb = {}\n",
                    p.first,
                    p.second,
                    rational::format(&lb.bounds[0].value),
                    rational::format(&lb.bounds[1].value)
                );
            }
        }
        s
    };
    emit(args.io.out.as_deref(), &text)?;
    Ok(if report.errors.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn generate(args: GenerateArgs) -> Result<ExitCode> {
    let mut spec = GeneratorSpec::new(args.n, args.density, args.seed).with_wcet(args.wcet_min, args.wcet_max);
    if args.unit {
        spec = spec.unit();
    }
    let x = generate_x_instance(&spec)?;
    let stats = instance_stats(&x.graph, &x.c1, &x.c2)?;
    let inst = Instance::new(x.graph, vec![x.c1, x.c2], CommModel::free());
    emit(args.out.as_deref(), &inst.to_json())?;
    if args.out.is_some() {
        eprintln!(
            "{} tasks, {} edges, groups {}/{}/{}, {} + {} paths",
            stats.tasks, stats.edges, stats.l1_only, stats.l2_only, stats.both, stats.paths1, stats.paths2
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn oracle(args: OracleArgs) -> Result<ExitCode> {
    let inst = load(&args.graph)?;
    let objective = Objective {
        primary: args.objective,
        secondary: args.secondary,
    };
    let config = OracleConfig::new(args.procs)
        .with_q_edge(args.q_edge)
        .with_budget(budget(args.budget)?);
    let out = optimal_schedule(&inst.graph, &objective, &config)?;
    if !out.optimal {
        eprintln!("time budget exhausted; schedule is the best found");
    }
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&out)?)?;
    Ok(ExitCode::SUCCESS)
}

fn rho(args: RhoArgs) -> Result<ExitCode> {
    let inst = load(&args.io.graph)?;
    let mut config = RhoConfig::new(args.mode.into()).with_budget(budget(args.budget)?);
    config.procs = args.procs;
    config.cap = args.cap;
    let value = match inst.constraints.as_slice() {
        [] => bail!("no latency constraints in {}", args.io.graph.display()),
        [c] => serde_json::to_value(compute_rho_single(&inst.graph, c, &config)?)?,
        [c1, c2, ..] => serde_json::to_value(compute_rho(&inst.graph, c1, c2, &config)?)?,
    };
    let text = if args.io.json {
        serde_json::to_string_pretty(&value)?
    } else {
        let f = |k: &str| value.get(k).map(|v| v.to_string()).unwrap_or_default();
        let r = |k: &str| value.get(k).and_then(|v| v.as_f64()).map(|x| format!("{x:.3}")).unwrap_or_default();
        let mut s = format!("mode: {} | procs = {}, m = {}\n", f("mode").trim_matches('"'), f("procs"), f("m"));
        if value.get("rho1").is_some() {
            s += &format!("L1: opt {} / lb {} = {}\n", f("l1_opt"), f("l1_lb"), r("rho1"));
            s += &format!("L2: opt {} / lb {} = {}\n", f("l2_opt"), f("l2_lb"), r("rho2"));
        } else {
            s += &format!("L: opt {} / lb {} = {}\n", f("opt"), f("lb"), r("rho"));
        }
        s += &format!("optimal: {}\n", f("optimal"));
        s
    };
    emit(args.io.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}
