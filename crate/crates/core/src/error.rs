use thiserror::Error;

use crate::graph::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid task graph: {0}")]
    InvalidGraph(ValidationReport),

    #[error("unknown task `{0}`")]
    UnknownTask(String),

    #[error("invalid latency constraint ({source_task} -> {sink}): {reason}")]
    InvalidConstraint {
        source_task: String,
        sink: String,
        reason: String,
    },

    #[error("more than {cap} paths between `{source_task}` and `{sink}`")]
    PathExplosion {
        source_task: String,
        sink: String,
        cap: usize,
    },

    #[error("no path from `{source_task}` to `{sink}`")]
    NoPath { source_task: String, sink: String },

    #[error("constraint pair is in {0} configuration, expected X")]
    NotXConfiguration(crate::pairs::PairKind),

    #[error("infeasible generator spec: {0}")]
    InfeasibleSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
