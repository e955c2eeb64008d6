//! Real-amplitude ansatz: RY rotation layers alternating with CNOT
//! entanglement layers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entanglement {
    Full,
    Linear,
    Circular,
    /// Shifted-circular-alternating.
    Sca,
}

impl Entanglement {
    pub const ALL: [Entanglement; 4] = [
        Entanglement::Full,
        Entanglement::Linear,
        Entanglement::Circular,
        Entanglement::Sca,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Entanglement::Full => "full",
            Entanglement::Linear => "linear",
            Entanglement::Circular => "circular",
            Entanglement::Sca => "sca",
        }
    }
}

impl fmt::Display for Entanglement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Entanglement {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Self::Full),
            "linear" => Ok(Self::Linear),
            "circular" => Ok(Self::Circular),
            "sca" => Ok(Self::Sca),
            _ => Err(SimError::UnknownPattern(s.to_owned())),
        }
    }
}

/// CNOT `(control, target)` pairs for entanglement layer `rep_index`.
///
/// `sca` takes the circular list, rotates it right by `rep_index` and swaps
/// control and target on odd layers, so its first layer equals `circular`.
pub fn entanglement_pairs(
    pattern: Entanglement,
    num_qubits: usize,
    rep_index: usize,
) -> Vec<(usize, usize)> {
    let n = num_qubits;
    if n < 2 {
        return Vec::new();
    }
    let linear = || (0..n - 1).map(|i| (i, i + 1));
    match pattern {
        Entanglement::Linear => linear().collect(),
        Entanglement::Full => (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect(),
        Entanglement::Circular => std::iter::once((n - 1, 0)).chain(linear()).collect(),
        Entanglement::Sca => {
            let mut pairs: Vec<(usize, usize)> =
                std::iter::once((n - 1, 0)).chain(linear()).collect();
            let len = pairs.len();
            pairs.rotate_right(rep_index % len);
            if rep_index % 2 == 1 {
                for p in &mut pairs {
                    *p = (p.1, p.0);
                }
            }
            pairs
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub num_qubits: usize,
    pub reps: usize,
    pub entanglement: Entanglement,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Ry { qubit: usize, theta: f64 },
    Cx { control: usize, target: usize },
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Ry { qubit, theta } => write!(f, "RY q{qubit} θ={theta:.3}"),
            Gate::Cx { control, target } => write!(f, "CX {control} {target}"),
        }
    }
}

impl CircuitSpec {
    pub fn new(num_qubits: usize, reps: usize, entanglement: Entanglement) -> Self {
        Self {
            num_qubits,
            reps,
            entanglement,
        }
    }

    /// One RY angle per qubit per rotation layer; there are `reps + 1` layers.
    pub fn num_params(&self) -> usize {
        self.num_qubits * (self.reps + 1)
    }

    /// Gate sequence for `params` (layer-major, qubit ascending).
    pub fn gates(&self, params: &[f64]) -> Result<Vec<Gate>, SimError> {
        if params.len() != self.num_params() {
            return Err(SimError::ParamCountMismatch {
                expected: self.num_params(),
                actual: params.len(),
            });
        }
        let n = self.num_qubits;
        let rotation = |layer: usize| {
            (0..n).map(move |q| Gate::Ry {
                qubit: q,
                theta: params[layer * n + q],
            })
        };
        let mut gates: Vec<Gate> = rotation(0).collect();
        for rep in 0..self.reps {
            gates.extend(
                entanglement_pairs(self.entanglement, n, rep)
                    .into_iter()
                    .map(|(control, target)| Gate::Cx { control, target }),
            );
            gates.extend(rotation(rep + 1));
        }
        Ok(gates)
    }

    /// One gate per line, for debugging and diffing.
    pub fn dump(&self, params: &[f64]) -> Result<String, SimError> {
        Ok(self
            .gates(params)?
            .iter()
            .map(|g| format!("{g}\n"))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_layouts() {
        assert_eq!(
            entanglement_pairs(Entanglement::Linear, 4, 0),
            vec![(0, 1), (1, 2), (2, 3)]
        );
        assert_eq!(
            entanglement_pairs(Entanglement::Circular, 4, 0),
            vec![(3, 0), (0, 1), (1, 2), (2, 3)]
        );
        assert_eq!(
            entanglement_pairs(Entanglement::Full, 3, 0),
            vec![(0, 1), (0, 2), (1, 2)]
        );
        assert_eq!(
            entanglement_pairs(Entanglement::Sca, 4, 0),
            entanglement_pairs(Entanglement::Circular, 4, 0)
        );
    }

    #[test]
    fn sca_shifts_and_alternates() {
        assert_eq!(
            entanglement_pairs(Entanglement::Sca, 4, 1),
            vec![(3, 2), (0, 3), (1, 0), (2, 1)]
        );
        assert_eq!(
            entanglement_pairs(Entanglement::Sca, 4, 2),
            vec![(1, 2), (2, 3), (3, 0), (0, 1)]
        );
    }

    #[test]
    fn unknown_pattern() {
        assert!(matches!(
            "ring".parse::<Entanglement>(),
            Err(SimError::UnknownPattern(_))
        ));
        assert_eq!("SCA".parse::<Entanglement>().unwrap(), Entanglement::Sca);
    }

    #[test]
    fn parameter_count_law() {
        for e in Entanglement::ALL {
            for n in 2..6 {
                for reps in 0..4 {
                    let spec = CircuitSpec::new(n, reps, e);
                    assert_eq!(spec.num_params(), n * (reps + 1));
                    let gates = spec.gates(&vec![0.0; spec.num_params()]).unwrap();
                    let ry = gates
                        .iter()
                        .filter(|g| matches!(g, Gate::Ry { .. }))
                        .count();
                    assert_eq!(ry, spec.num_params());
                }
            }
        }
    }

    #[test]
    fn gate_dump() {
        let spec = CircuitSpec::new(2, 1, Entanglement::Linear);
        let text = spec.dump(&[1.25, 0.0, 0.5, 3.0]).unwrap();
        assert_eq!(
            text,
            "RY q0 θ=1.250\nRY q1 θ=0.000\nCX 0 1\nRY q0 θ=0.500\nRY q1 θ=3.000\n"
        );
        assert!(matches!(
            spec.gates(&[0.0]),
            Err(SimError::ParamCountMismatch {
                expected: 4,
                actual: 1
            })
        ));
    }
}
