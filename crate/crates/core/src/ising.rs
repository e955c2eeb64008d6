//! Diagonal Ising Hamiltonians in the Z basis.
//!
//! A QUBO over bits `x` maps to spins through `x = (1 - z) / 2`, so bit 0 is
//! spin `+1` and bit 1 is spin `-1`. Energies are carried with their offset so
//! they compare directly with QUBO energies and classical objectives.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qubo::Qubo;

/// Below this many entries the energy table is filled on one thread.
const PAR_THRESHOLD: usize = 1 << 14;

#[derive(Debug, Error, PartialEq)]
pub enum IsingError {
    #[error("bit vector has {actual} entries, Hamiltonian has {expected} qubits")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("malformed Pauli term {0:?}")]
    BadTerm(String),
    #[error("Pauli term {0:?} is not a single Z or a ZZ pair")]
    UnsupportedTerm(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingHamiltonian {
    pub num_qubits: usize,
    pub h: BTreeMap<usize, f64>,
    /// Keys satisfy `i < j`.
    #[serde(rename = "J", with = "crate::pairs")]
    pub j: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

impl IsingHamiltonian {
    pub fn zero(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            h: BTreeMap::new(),
            j: BTreeMap::new(),
            offset: 0.0,
        }
    }

    /// Substitutes `x_i = (1 - z_i) / 2` into the QUBO.
    pub fn from_qubo(q: &Qubo) -> Self {
        let mut hmt = Self::zero(q.num_vars);
        hmt.offset = q.offset;
        for (&i, &a) in &q.linear {
            hmt.offset += a / 2.0;
            *hmt.h.entry(i).or_insert(0.0) -= a / 2.0;
        }
        for (&(i, k), &b) in &q.quadratic {
            let quarter = b / 4.0;
            hmt.offset += quarter;
            *hmt.h.entry(i).or_insert(0.0) -= quarter;
            *hmt.h.entry(k).or_insert(0.0) -= quarter;
            *hmt.j.entry((i.min(k), i.max(k))).or_insert(0.0) += quarter;
        }
        hmt.h.retain(|_, c| *c != 0.0);
        hmt.j.retain(|_, c| *c != 0.0);
        hmt
    }

    fn spin(index: usize, q: usize) -> f64 {
        if (index >> q) & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Energy of the basis state with the given index (qubit 0 = LSB).
    pub fn energy_index(&self, index: usize) -> f64 {
        let field: f64 = self.h.iter().map(|(&q, &c)| c * Self::spin(index, q)).sum();
        let coupling: f64 = self
            .j
            .iter()
            .map(|(&(a, b), &c)| c * Self::spin(index, a) * Self::spin(index, b))
            .sum();
        self.offset + field + coupling
    }

    pub fn energy(&self, bits: &[u8]) -> Result<f64, IsingError> {
        if bits.len() != self.num_qubits {
            return Err(IsingError::LengthMismatch {
                expected: self.num_qubits,
                actual: bits.len(),
            });
        }
        Ok(self.energy_index(crate::bits::bits_to_index(bits)))
    }

    /// Energies of all `2^n` basis states, indexed like statevector
    /// amplitudes.
    ///
    /// Filled one qubit at a time: entries with bit `k` set are derived from
    /// their partner with bit `k` clear, flipping `z_k` from +1 to -1 while
    /// all higher spins are still +1.
    pub fn energy_table(&self) -> EnergyTable {
        let n = self.num_qubits;
        let dim = 1usize << n;
        let mut lower: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut field = vec![0.0; n];
        for (&q, &c) in &self.h {
            field[q] += c;
        }
        for (&(a, b), &c) in &self.j {
            lower[b].push((a, c));
            // b > a is still +1 when a flips
            field[a] += c;
        }
        let mut table = vec![0.0f64; dim];
        table[0] = self.offset + self.h.values().sum::<f64>() + self.j.values().sum::<f64>();
        for k in 0..n {
            let half = 1usize << k;
            let (lo, hi) = table[..2 * half].split_at_mut(half);
            let couplings = &lower[k];
            let base = field[k];
            let fill = |(b, out): (usize, &mut f64)| {
                let local: f64 = couplings.iter().map(|&(a, c)| c * Self::spin(b, a)).sum();
                *out = lo[b] - 2.0 * (base + local);
            };
            if half >= PAR_THRESHOLD {
                hi.par_iter_mut().enumerate().for_each(fill);
            } else {
                hi.iter_mut().enumerate().for_each(fill);
            }
        }
        EnergyTable(table)
    }

    /// Exhaustive ground state: `(lambda_min, basis index)`. Ties go to the
    /// smallest index.
    pub fn ground_state(&self) -> (f64, usize) {
        let table = self.energy_table();
        table
            .0
            .iter()
            .enumerate()
            .fold((f64::INFINITY, 0), |(best, arg), (i, &e)| {
                if e < best {
                    (e, i)
                } else {
                    (best, arg)
                }
            })
    }

    /// Pauli decomposition, largest `|coefficient|` first. The offset (the
    /// identity term) is not included.
    pub fn pauli_terms(&self) -> Vec<PauliTerm> {
        let n = self.num_qubits;
        let label = |qubits: &[usize]| -> String {
            (0..n)
                .rev()
                .map(|q| if qubits.contains(&q) { 'Z' } else { 'I' })
                .collect()
        };
        let mut terms: Vec<PauliTerm> = self
            .h
            .iter()
            .map(|(&q, &c)| PauliTerm {
                coeff: c,
                label: label(&[q]),
            })
            .chain(self.j.iter().map(|(&(a, b), &c)| PauliTerm {
                coeff: c,
                label: label(&[a, b]),
            }))
            .filter(|t| t.coeff != 0.0)
            .collect();
        terms.sort_by(|a, b| b.coeff.abs().total_cmp(&a.coeff.abs()));
        terms
    }

    /// Rebuilds a Hamiltonian from its Pauli terms.
    pub fn from_pauli_terms(
        num_qubits: usize,
        terms: &[PauliTerm],
        offset: f64,
    ) -> Result<Self, IsingError> {
        let mut hmt = Self::zero(num_qubits);
        hmt.offset = offset;
        for t in terms {
            if t.label.len() != num_qubits {
                return Err(IsingError::BadTerm(t.label.clone()));
            }
            match t.qubits()?.as_slice() {
                [q] => *hmt.h.entry(*q).or_insert(0.0) += t.coeff,
                [a, b] => *hmt.j.entry((*a, *b)).or_insert(0.0) += t.coeff,
                _ => return Err(IsingError::UnsupportedTerm(t.label.clone())),
            }
        }
        Ok(hmt)
    }

    /// Text listing: offset line, then one term per line.
    pub fn render(&self) -> String {
        let mut out = format!("offset: {}\n", self.offset);
        for t in self.pauli_terms() {
            out.push_str(&t.to_string());
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("hamiltonian serializes")
    }
}

/// Energies of every basis state.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTable(pub Vec<f64>);

impl EnergyTable {
    pub fn get(&self, index: usize) -> f64 {
        self.0[index]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// One `coefficient * Z-string` term. The label's rightmost character is
/// qubit 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coeff: f64,
    pub label: String,
}

impl PauliTerm {
    /// Qubits carrying a `Z`, ascending.
    pub fn qubits(&self) -> Result<Vec<usize>, IsingError> {
        let n = self.label.chars().count();
        let mut qs = Vec::new();
        for (pos, c) in self.label.chars().enumerate() {
            match c {
                'Z' => qs.push(n - 1 - pos),
                'I' => {}
                _ => return Err(IsingError::BadTerm(self.label.clone())),
            }
        }
        qs.sort_unstable();
        Ok(qs)
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.coeff < 0.0 { '-' } else { '+' };
        write!(f, "{sign}{:.3} · {}", self.coeff.abs(), self.label)
    }
}

impl FromStr for PauliTerm {
    type Err = IsingError;

    /// Parses the `Display` form. Precision is whatever the text carries.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (coeff, label) = s
            .split_once('·')
            .ok_or_else(|| IsingError::BadTerm(s.to_owned()))?;
        let coeff: f64 = coeff
            .trim()
            .replace('−', "-")
            .parse()
            .map_err(|_| IsingError::BadTerm(s.to_owned()))?;
        let term = PauliTerm {
            coeff,
            label: label.trim().to_owned(),
        };
        term.qubits()?;
        Ok(term)
    }
}
