//! Derivative-free optimizers: differential evolution (best1bin) for global
//! search and a Nelder–Mead simplex as the local baseline.

mod de;
mod nelder_mead;

pub use de::{de_minimize, DeConfig};
pub use nelder_mead::{local_minimize, LocalConfig};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Error type objectives may return; it is carried through unchanged.
pub type ObjectiveError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum OptError {
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error("objective returned {actual} values for a batch of {expected}")]
    ObjectiveShapeMismatch { expected: usize, actual: usize },
    #[error("objective evaluation failed: {0}")]
    Objective(#[source] ObjectiveError),
}

/// Population (or simplex) statistics after one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub best: f64,
    pub mean: f64,
    pub std: f64,
}

impl GenerationStats {
    /// Population statistics with the `1/N` variance.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            best: values.iter().copied().fold(f64::INFINITY, f64::min),
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best_params: Vec<f64>,
    pub best_value: f64,
    pub generations: usize,
    pub evaluations: usize,
    /// Entry 0 describes the starting population or simplex.
    pub history: Vec<GenerationStats>,
    /// Every objective value in evaluation order.
    pub trace: Vec<f64>,
    pub converged: bool,
}

impl OptResult {
    /// `evaluation_index,value` rows.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("evaluation_index,value\n");
        for (i, v) in self.trace.iter().enumerate() {
            let _ = writeln!(out, "{i},{v}");
        }
        out
    }

    /// `generation,best,mean,std` rows.
    pub fn generations_csv(&self) -> String {
        let mut out = String::from("generation,best,mean,std\n");
        for (g, s) in self.history.iter().enumerate() {
            let _ = writeln!(out, "{g},{},{},{}", s.best, s.mean, s.std);
        }
        out
    }
}

pub(crate) fn check_bounds(bounds: &[(f64, f64)], dim: usize) -> Result<(), OptError> {
    if bounds.len() != dim {
        return Err(OptError::InvalidBounds(format!(
            "{} bounds for {dim} dimensions",
            bounds.len()
        )));
    }
    for (k, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(OptError::InvalidBounds(format!(
                "dimension {k}: [{lo}, {hi}]"
            )));
        }
    }
    Ok(())
}
