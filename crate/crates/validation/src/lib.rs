//! Shared fixtures for the acceptance suite.

use std::path::{Path, PathBuf};

use qarb::market::{NormalizationVector, TransitMatrix};
use qarb::model::Formulation;
use qarb::qubo::PenaltyConfig;
use qarb::vqe::ArbitrageProblem;
use rand::Rng;

/// Path of a file in the workspace `fixtures/` directory.
pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

/// Self-loop problem with automatic penalty for a fixture market.
pub fn problem(name: &str) -> ArbitrageProblem {
    let m = TransitMatrix::load(fixture(name)).unwrap();
    ArbitrageProblem::new(&m, Formulation::Selfloop, PenaltyConfig::Auto).unwrap()
}

/// The normalized five-currency market (25 qubits).
pub fn crypto5() -> ArbitrageProblem {
    let raw = TransitMatrix::load(fixture("crypto5_raw.csv")).unwrap();
    let v = NormalizationVector::load(fixture("crypto5_norm.csv")).unwrap();
    let m = raw.normalize(&v).unwrap();
    ArbitrageProblem::new(&m, Formulation::Selfloop, PenaltyConfig::Auto).unwrap()
}

/// Off-diagonal rates `exp(u)` with `u` uniform in `[-1.5, 1.5)`.
pub fn random_market(n: usize, rng: &mut impl Rng) -> TransitMatrix {
    let rates = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        1.0
                    } else {
                        rng.gen_range(-1.5f64..1.5).exp()
                    }
                })
                .collect()
        })
        .collect();
    TransitMatrix::new((0..n).map(|i| format!("C{i}")).collect(), rates).unwrap()
}
