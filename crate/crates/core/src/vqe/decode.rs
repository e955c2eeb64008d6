use serde::{Deserialize, Serialize};

use crate::bits::index_to_string;
use crate::model::{CycleSolution, QuadraticProgram};
use crate::sim::Counts;

/// Result of reading out a measured bitstring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Readout {
    Solution(CycleSolution),
    Infeasible,
}

impl Readout {
    pub fn solution(&self) -> Option<&CycleSolution> {
        match self {
            Readout::Solution(s) => Some(s),
            Readout::Infeasible => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Readout::Solution(_))
    }
}

/// Interprets the first `n*n` bits as the assignment matrix `x[i][j]`. Any
/// trailing slack bits are ignored; feasibility is judged on the program's
/// own constraints.
pub fn decode_bitstring(
    bits: &[u8],
    n: usize,
    qp: &QuadraticProgram,
    weights: &[Vec<f64>],
) -> Readout {
    if bits.len() < qp.num_vars || qp.num_vars != n * n || weights.len() != n {
        return Readout::Infeasible;
    }
    let x = &bits[..qp.num_vars];
    match qp.evaluate(x) {
        Ok(eval) if eval.feasible => {}
        _ => return Readout::Infeasible,
    }
    let edges = (0..n * n).filter(|&k| x[k] != 0).map(|k| (k / n, k % n));
    match CycleSolution::from_edges(edges, weights) {
        Some(s) => Readout::Solution(s),
        None => Readout::Infeasible,
    }
}

/// Best feasible readout among sampled basis states: highest log gain, then
/// highest count, then the lexicographically smallest bitstring.
pub fn select_solution(
    samples: &Counts,
    num_qubits: usize,
    qp: &QuadraticProgram,
    weights: &[Vec<f64>],
) -> (Readout, Option<usize>) {
    let n = weights.len();
    let mut best: Option<(CycleSolution, u64, String, usize)> = None;
    for (&index, &count) in samples {
        let bits = crate::bits::index_to_bits(index, num_qubits);
        let Readout::Solution(sol) = decode_bitstring(&bits, n, qp, weights) else {
            continue;
        };
        let text = index_to_string(index, num_qubits);
        let better = match &best {
            None => true,
            Some((b, bc, bt, _)) => {
                if sol.log_gain != b.log_gain {
                    sol.log_gain > b.log_gain
                } else if count != *bc {
                    count > *bc
                } else {
                    text < *bt
                }
            }
        };
        if better {
            best = Some((sol, count, text, index));
        }
    }
    match best {
        Some((sol, _, _, index)) => (Readout::Solution(sol), Some(index)),
        None => (Readout::Infeasible, None),
    }
}
