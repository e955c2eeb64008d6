//! Ansatz construction and exact statevector simulation.

mod circuit;
mod statevector;

pub use circuit::{entanglement_pairs, CircuitSpec, Entanglement, Gate};
pub use statevector::{
    estimate_from_counts, estimate_sampled, expectation_exact, expectation_sampled, simulate,
    Counts, SampledEstimate, Statevector,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("unknown entanglement pattern {0:?} (full|linear|circular|sca)")]
    UnknownPattern(String),
    #[error("circuit takes {expected} parameters, got {actual}")]
    ParamCountMismatch { expected: usize, actual: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("at least one shot is required")]
    NoShots,
}
