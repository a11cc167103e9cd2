//! Latency constraints and the JSON instance file.

use std::collections::HashMap;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::comm::CommModel;
use crate::error::{Error, Result};
use crate::graph::{validate_graph, RawGraph, Task, TaskGraph, TaskIdx, ValidationReport};

/// Upper bound on `S(sink) - S(source)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatencyConstraint {
    pub source: String,
    pub sink: String,
    pub bound: u64,
}

impl LatencyConstraint {
    pub fn new(source: impl Into<String>, sink: impl Into<String>, bound: u64) -> Self {
        LatencyConstraint {
            source: source.into(),
            sink: sink.into(),
            bound,
        }
    }

    pub fn with_bound(&self, bound: u64) -> Self {
        LatencyConstraint {
            bound,
            ..self.clone()
        }
    }

    /// Resolves both endpoints and checks that the sink is reachable.
    pub fn endpoints(&self, graph: &TaskGraph) -> Result<(TaskIdx, TaskIdx)> {
        let a = graph.require(&self.source)?;
        let b = graph.require(&self.sink)?;
        if a == b {
            return Err(Error::InvalidConstraint {
                source_task: self.source.clone(),
                sink: self.sink.clone(),
                reason: "source and sink coincide".into(),
            });
        }
        if !graph.descendants_of(a)[b] {
            return Err(Error::NoPath {
                source_task: self.source.clone(),
                sink: self.sink.clone(),
            });
        }
        Ok((a, b))
    }
}

/// On-disk instance: graph, latency constraints and communication model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub tasks: Vec<Task>,
    pub edges: Vec<(String, String)>,
    #[serde(default)]
    pub constraints: Vec<LatencyConstraint>,
    #[serde(default)]
    pub comm: CommModel,
}

impl InstanceFile {
    pub fn raw_graph(&self) -> RawGraph {
        RawGraph {
            tasks: self.tasks.clone(),
            edges: self.edges.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<FsPath>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Graph rules plus constraint rules; unusual but legal endpoint reuse
    /// ends up in `notes`.
    pub fn validate(&self) -> ValidationReport {
        let raw = self.raw_graph();
        let mut report = validate_graph(&raw);
        if !report.is_ok() {
            return report;
        }
        let graph = TaskGraph::from_raw(raw).expect("validated above");
        for (i, c) in self.constraints.iter().enumerate() {
            if let Err(e) = c.endpoints(&graph) {
                report.notes.push(format!("constraint #{i}: {e}"));
            }
        }
        let mut sources: HashMap<&str, usize> = HashMap::new();
        let mut sinks: HashMap<&str, usize> = HashMap::new();
        for c in &self.constraints {
            *sources.entry(c.source.as_str()).or_default() += 1;
            *sinks.entry(c.sink.as_str()).or_default() += 1;
        }
        for (what, counts) in [("source", &sources), ("sink", &sinks)] {
            let mut shared: Vec<_> = counts.iter().filter(|(_, &n)| n > 1).collect();
            shared.sort();
            for (id, n) in shared {
                report
                    .notes
                    .push(format!("unusual: `{id}` is the {what} of {n} constraints"));
            }
        }
        report
    }

    pub fn into_instance(self) -> Result<Instance> {
        let graph = TaskGraph::new(self.tasks, self.edges)?;
        for c in &self.constraints {
            c.endpoints(&graph)?;
        }
        Ok(Instance {
            graph,
            constraints: self.constraints,
            comm: self.comm,
        })
    }
}

/// A validated instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: TaskGraph,
    pub constraints: Vec<LatencyConstraint>,
    pub comm: CommModel,
}

impl Instance {
    pub fn new(graph: TaskGraph, constraints: Vec<LatencyConstraint>, comm: CommModel) -> Self {
        Instance {
            graph,
            constraints,
            comm,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        InstanceFile::from_json(text)?.into_instance()
    }

    pub fn read(path: impl AsRef<FsPath>) -> Result<Self> {
        InstanceFile::read(path)?.into_instance()
    }

    pub fn to_file(&self) -> InstanceFile {
        let raw = self.graph.to_raw();
        InstanceFile {
            tasks: raw.tasks,
            edges: raw.edges,
            constraints: self.constraints.clone(),
            comm: self.comm,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("instance serializes")
    }
}
