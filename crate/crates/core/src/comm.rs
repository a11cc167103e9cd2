//! Communication overhead as a function of the processor count.

use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CommKind {
    #[default]
    Linear,
    #[serde(alias = "logarithmic")]
    Log,
}

/// `M(m)`: linear `q*(m-1)` or logarithmic `q*log_base(m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommModel {
    #[serde(rename = "model")]
    pub kind: CommKind,
    #[serde(with = "rational")]
    pub q: Rational,
    #[serde(default = "default_base", skip_serializing_if = "is_default_base")]
    pub base: u32,
}

fn default_base() -> u32 {
    2
}

fn is_default_base(b: &u32) -> bool {
    *b == 2
}

impl Default for CommModel {
    fn default() -> Self {
        CommModel::free()
    }
}

impl CommModel {
    /// Zero-cost architecture.
    pub fn free() -> Self {
        CommModel::linear(Rational::from_integer(0))
    }

    pub fn linear(q: Rational) -> Self {
        CommModel {
            kind: CommKind::Linear,
            q,
            base: 2,
        }
    }

    pub fn log(q: Rational) -> Self {
        CommModel {
            kind: CommKind::Log,
            q,
            base: 2,
        }
    }

    pub fn overhead(&self, m: usize) -> Rational {
        comm_overhead(self, m)
    }
}

/// Exact whenever `m` is a power of the log base; otherwise the logarithmic
/// term is rounded to the nearest 1e-6.
pub fn comm_overhead(model: &CommModel, m: usize) -> Rational {
    assert!(m >= 1, "processor count must be positive");
    match model.kind {
        CommKind::Linear => model.q * Rational::from_integer(m as i64 - 1),
        CommKind::Log => {
            if let Some(k) = exact_log(m as u64, model.base as u64) {
                model.q * Rational::from_integer(k as i64)
            } else {
                let log = (m as f64).ln() / (model.base as f64).ln();
                rational::from_f64_micro(rational::to_f64(&model.q) * log)
            }
        }
    }
}

fn exact_log(m: u64, base: u64) -> Option<u32> {
    if base < 2 {
        return None;
    }
    let mut k = 0;
    let mut acc = 1u64;
    while acc < m {
        acc = acc.checked_mul(base)?;
        k += 1;
    }
    (acc == m).then_some(k)
}
