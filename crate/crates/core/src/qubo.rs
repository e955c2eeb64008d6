//! Constrained program to QUBO.
//!
//! The conversion runs in the usual order: inequalities get an integer slack,
//! slacks are expanded into binary bits, and every resulting equality is moved
//! into the objective as a quadratic penalty `M * (lhs - rhs)^2`. The QUBO is
//! always a minimization; a maximization objective is negated here and only
//! here.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ConstraintSense, QuadraticProgram, Sense};

const INTEGRALITY_TOL: f64 = 1e-9;
/// Largest slack range we are willing to binary-expand.
const MAX_SLACK_BITS: u32 = 32;

#[derive(Debug, Error, PartialEq)]
pub enum QuboError {
    #[error("inequality {constraint} has no finite slack bound")]
    UnboundedSlack { constraint: usize },
    #[error(
        "inequality {constraint} has non-integer coefficients; slack cannot be binary-encoded"
    )]
    NonIntegralInequality { constraint: usize },
    #[error("inequality {constraint} cannot be satisfied by any binary assignment")]
    InfeasibleConstraint { constraint: usize },
    #[error("penalty weight must be positive and finite, got {0}")]
    InvalidPenalty(f64),
    #[error("assignment has {actual} entries, QUBO has {expected} variables")]
    LengthMismatch { expected: usize, actual: usize },
}

/// Penalty multiplier for equality constraints.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyConfig {
    /// `10 * (1 + max |objective coefficient|) * scale`.
    #[default]
    Auto,
    Weight(f64),
}

impl PenaltyConfig {
    pub fn resolve(&self, qp: &QuadraticProgram) -> Result<f64, QuboError> {
        match *self {
            PenaltyConfig::Weight(w) if w.is_finite() && w > 0.0 => Ok(w),
            PenaltyConfig::Weight(w) => Err(QuboError::InvalidPenalty(w)),
            PenaltyConfig::Auto => {
                let max_coef = qp
                    .linear
                    .values()
                    .chain(qp.quadratic.values())
                    .fold(0.0f64, |m, c| m.max(c.abs()));
                Ok(10.0 * (1.0 + max_coef) * qp.scale as f64)
            }
        }
    }
}

impl FromStr for PenaltyConfig {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Self::Auto);
        }
        let w: f64 = s.parse().map_err(|e| format!("penalty {s:?}: {e}"))?;
        if w.is_finite() && w > 0.0 {
            Ok(Self::Weight(w))
        } else {
            Err(format!("penalty must be positive, got {s}"))
        }
    }
}

impl fmt::Display for PenaltyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PenaltyConfig::Auto => f.write_str("auto"),
            PenaltyConfig::Weight(w) => write!(f, "{w}"),
        }
    }
}

/// Where a QUBO variable came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VarOrigin {
    Original { index: usize, name: String },
    Slack { constraint: usize, bit: u32 },
}

/// Unconstrained quadratic binary minimization problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Qubo {
    pub num_vars: usize,
    pub linear: BTreeMap<usize, f64>,
    /// Keys satisfy `i < j`.
    #[serde(with = "crate::pairs")]
    pub quadratic: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
    pub penalty: f64,
    pub var_names: Vec<VarOrigin>,
}

impl Qubo {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
            offset: 0.0,
            penalty: 0.0,
            var_names: (0..num_vars)
                .map(|i| VarOrigin::Original {
                    index: i,
                    name: format!("x{i}"),
                })
                .collect(),
        }
    }

    pub fn add_linear(&mut self, i: usize, c: f64) {
        *self.linear.entry(i).or_insert(0.0) += c;
    }

    /// Adds `c * x_i * x_j`; `i == j` folds into the linear term.
    pub fn add_quadratic(&mut self, i: usize, j: usize, c: f64) {
        if i == j {
            self.add_linear(i, c);
        } else {
            *self.quadratic.entry((i.min(j), i.max(j))).or_insert(0.0) += c;
        }
    }

    pub fn energy(&self, x: &[u8]) -> Result<f64, QuboError> {
        if x.len() != self.num_vars {
            return Err(QuboError::LengthMismatch {
                expected: self.num_vars,
                actual: x.len(),
            });
        }
        let lin: f64 = self
            .linear
            .iter()
            .filter(|(&i, _)| x[i] != 0)
            .map(|(_, c)| c)
            .sum();
        let quad: f64 = self
            .quadratic
            .iter()
            .filter(|(&(i, j), _)| x[i] != 0 && x[j] != 0)
            .map(|(_, c)| c)
            .sum();
        Ok(self.offset + lin + quad)
    }

    /// Drops exact-zero coefficients left over from cancellation.
    fn prune(&mut self) {
        self.linear.retain(|_, c| *c != 0.0);
        self.quadratic.retain(|_, c| *c != 0.0);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("qubo serializes")
    }
}

/// One equality `sum(terms) == rhs` over QUBO variables, ready to penalize.
struct Equality {
    terms: Vec<(usize, f64)>,
    rhs: f64,
}

fn is_integral(v: f64) -> bool {
    (v - v.round()).abs() <= INTEGRALITY_TOL
}

/// Converts `qp` into a QUBO with the given penalty.
pub fn to_qubo(qp: &QuadraticProgram, cfg: PenaltyConfig) -> Result<Qubo, QuboError> {
    let penalty = cfg.resolve(qp)?;
    let sign = match qp.sense {
        Sense::Maximize => -1.0,
        Sense::Minimize => 1.0,
    };

    let mut q = Qubo::new(qp.num_vars);
    q.penalty = penalty;
    q.var_names = qp
        .var_names
        .iter()
        .enumerate()
        .map(|(index, name)| VarOrigin::Original {
            index,
            name: name.clone(),
        })
        .collect();
    for (&i, &c) in &qp.linear {
        q.add_linear(i, sign * c);
    }
    for (&(i, j), &c) in &qp.quadratic {
        q.add_quadratic(i, j, sign * c);
    }

    let mut equalities = Vec::with_capacity(qp.constraints.len());
    for (ci, con) in qp.constraints.iter().enumerate() {
        let mut terms: Vec<(usize, f64)> = con.terms.iter().map(|(&i, &a)| (i, a)).collect();
        let slack_sign = match con.sense {
            ConstraintSense::Eq => {
                equalities.push(Equality {
                    terms,
                    rhs: con.rhs,
                });
                continue;
            }
            ConstraintSense::Le => 1.0,
            ConstraintSense::Ge => -1.0,
        };
        if !is_integral(con.rhs) || terms.iter().any(|&(_, a)| !is_integral(a)) {
            return Err(QuboError::NonIntegralInequality { constraint: ci });
        }
        let upper = match con.sense {
            // lhs + s = rhs, s in [0, rhs - min lhs]
            ConstraintSense::Le => con.rhs - terms.iter().map(|&(_, a)| a.min(0.0)).sum::<f64>(),
            // lhs - s = rhs, s in [0, max lhs - rhs]
            _ => terms.iter().map(|&(_, a)| a.max(0.0)).sum::<f64>() - con.rhs,
        };
        if !upper.is_finite() {
            return Err(QuboError::UnboundedSlack { constraint: ci });
        }
        let upper = upper.round();
        if upper < 0.0 {
            return Err(QuboError::InfeasibleConstraint { constraint: ci });
        }
        // smallest k with 2^k - 1 >= upper
        let bits = (0..=MAX_SLACK_BITS)
            .find(|&k| (1u64 << k) as f64 - 1.0 >= upper)
            .ok_or(QuboError::UnboundedSlack { constraint: ci })?;
        for bit in 0..bits {
            let idx = q.num_vars;
            q.num_vars += 1;
            q.var_names.push(VarOrigin::Slack {
                constraint: ci,
                bit,
            });
            terms.push((idx, slack_sign * (1u64 << bit) as f64));
        }
        equalities.push(Equality {
            terms,
            rhs: con.rhs,
        });
    }

    // M * (sum a_i x_i - r)^2 with x_i^2 = x_i
    for eq in &equalities {
        q.offset += penalty * eq.rhs * eq.rhs;
        for (k, &(i, a)) in eq.terms.iter().enumerate() {
            q.add_linear(i, penalty * (a * a - 2.0 * eq.rhs * a));
            for &(j, b) in &eq.terms[k + 1..] {
                q.add_quadratic(i, j, penalty * 2.0 * a * b);
            }
        }
    }
    q.prune();
    Ok(q)
}
