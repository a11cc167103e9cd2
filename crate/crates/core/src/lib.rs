//! Schedulability analysis for non-preemptive DAG task systems on identical
//! processors under start-to-start latency constraints.

pub mod allocation;
pub mod analysis;
pub mod bench;
pub mod comm;
pub mod error;
pub mod generator;
pub mod graph;
pub mod instance;
pub mod oracle;
pub mod pairs;
pub mod paths;
pub mod rational;
pub mod rho;
pub mod schedule;

pub use allocation::{allocate, allocate_pair, check_parallelism_optimality, Allocation, PairAllocation};
pub use analysis::{
    analyze_system, check_single, check_x_pair, lower_bound_single, lower_bounds_x, Mode,
    SystemReport,
};
pub use comm::{comm_overhead, CommKind, CommModel};
pub use error::{Error, Result};
pub use generator::{generate_single_instance, generate_x_instance, instance_stats, GeneratorSpec};
pub use graph::{validate_graph, Task, TaskGraph, TaskIdx};
pub use instance::{Instance, LatencyConstraint};
pub use oracle::{optimal_schedule, Objective, OracleConfig, OracleOutcome};
pub use pairs::{classify_pair, PairKind};
pub use paths::{enumerate_paths, PathSet, DEFAULT_PATH_CAP};
pub use rational::Rational;
pub use rho::{compute_rho, compute_rho_single, RhoConfig};
pub use schedule::{validate_schedule, Schedule};
