use serde::Serialize;

use super::{decode_bitstring, Readout, VqeError};
use crate::ising::IsingHamiltonian;
use crate::market::TransitMatrix;
use crate::model::{brute_force_best, build_qp, CycleSolution, Formulation, QuadraticProgram};
use crate::qubo::{to_qubo, PenaltyConfig, Qubo};

/// Every stage of the pipeline for one market, built once and shared by the
/// engine, the decoder and the oracle.
#[derive(Debug, Clone, Serialize)]
pub struct ArbitrageProblem {
    pub labels: Vec<String>,
    pub weights: Vec<Vec<f64>>,
    pub formulation: Formulation,
    pub qp: QuadraticProgram,
    pub qubo: Qubo,
    pub hamiltonian: IsingHamiltonian,
}

impl ArbitrageProblem {
    pub fn new(
        market: &TransitMatrix,
        formulation: Formulation,
        penalty: PenaltyConfig,
    ) -> Result<Self, VqeError> {
        let weights = market.log_weights();
        let qp = build_qp(&weights, formulation)?;
        let qubo = to_qubo(&qp, penalty)?;
        let hamiltonian = IsingHamiltonian::from_qubo(&qubo);
        Ok(Self {
            labels: market.labels().to_vec(),
            weights,
            formulation,
            qp,
            qubo,
            hamiltonian,
        })
    }

    pub fn num_currencies(&self) -> usize {
        self.weights.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.hamiltonian.num_qubits
    }

    /// Exhaustive best permutation of the classical model.
    pub fn oracle(&self) -> Result<CycleSolution, VqeError> {
        Ok(brute_force_best(&self.weights)?)
    }

    /// Decodes a measured basis index.
    pub fn decode_index(&self, index: usize) -> Readout {
        let bits = crate::bits::index_to_bits(index, self.num_qubits());
        decode_bitstring(&bits, self.num_currencies(), &self.qp, &self.weights)
    }

    /// True when `readout` reaches the oracle's log gain.
    pub fn is_optimal(&self, readout: &Readout, oracle: &CycleSolution) -> bool {
        match readout {
            Readout::Solution(s) => (s.log_gain - oracle.log_gain).abs() <= 1e-9,
            Readout::Infeasible => false,
        }
    }
}
