//! Arbitrage as a constrained binary quadratic program, plus an exhaustive
//! permutation oracle for small markets.
//!
//! Decision variable `x[i*n + j]` selects the trade `i -> j`. In the default
//! self-loop formulation every row and every column of `x` sums to one, so the
//! feasible set is exactly the permutation matrices; a selected diagonal
//! entry means the currency is left untouched.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest market the permutation oracle will enumerate.
pub const MAX_BRUTE_FORCE: usize = 10;

/// Residual allowed when checking constraints on 0/1 assignments.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("weight matrix is not square")]
    NonSquareWeights,
    #[error("brute force supports at most {MAX_BRUTE_FORCE} currencies, got {0}")]
    TooLarge(usize),
    #[error("assignment has {actual} entries, program has {expected} variables")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("variable index {index} out of range for {num_vars} variables")]
    IndexOutOfRange { index: usize, num_vars: usize },
    #[error("constraint has no terms")]
    EmptyConstraint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintSense {
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub terms: BTreeMap<usize, f64>,
    pub sense: ConstraintSense,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn lhs(&self, x: &[u8]) -> f64 {
        self.terms
            .iter()
            .filter(|(&i, _)| x[i] != 0)
            .map(|(_, &a)| a)
            .sum()
    }

    /// Amount by which the constraint is violated at `x` (0 when satisfied).
    pub fn residual(&self, x: &[u8]) -> f64 {
        let d = self.lhs(x) - self.rhs;
        match self.sense {
            ConstraintSense::Eq => d.abs(),
            ConstraintSense::Le => d.max(0.0),
            ConstraintSense::Ge => (-d).max(0.0),
        }
    }
}

/// Which version of the model to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    /// Row and column sums equal to one, diagonal variables allowed.
    #[default]
    Selfloop,
    /// Flow conservation plus the "each currency traded at most once"
    /// inequality, which needs slack variables downstream.
    Slack,
}

impl std::str::FromStr for Formulation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "selfloop" => Ok(Self::Selfloop),
            "slack" => Ok(Self::Slack),
            other => Err(format!("unknown formulation {other:?} (selfloop|slack)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticProgram {
    pub num_vars: usize,
    pub sense: Sense,
    pub linear: BTreeMap<usize, f64>,
    #[serde(with = "crate::pairs")]
    pub quadratic: BTreeMap<(usize, usize), f64>,
    pub constraints: Vec<LinearConstraint>,
    pub var_names: Vec<String>,
    /// Number of objective terms a feasible point can switch on (the number
    /// of currencies for the arbitrage model). Scales the automatic penalty.
    pub scale: usize,
}

/// Result of checking one assignment against a program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub feasible: bool,
    pub violation: f64,
}

impl QuadraticProgram {
    pub fn new(num_vars: usize, sense: Sense) -> Self {
        Self {
            num_vars,
            sense,
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
            constraints: Vec::new(),
            var_names: (0..num_vars).map(|i| format!("x{i}")).collect(),
            scale: num_vars.max(1),
        }
    }

    fn check_index(&self, index: usize) -> Result<(), ModelError> {
        if index < self.num_vars {
            Ok(())
        } else {
            Err(ModelError::IndexOutOfRange {
                index,
                num_vars: self.num_vars,
            })
        }
    }

    pub fn add_linear(&mut self, index: usize, coef: f64) -> Result<(), ModelError> {
        self.check_index(index)?;
        *self.linear.entry(index).or_insert(0.0) += coef;
        Ok(())
    }

    /// Adds `coef * x_i * x_j`; the key is stored with `i <= j`.
    pub fn add_quadratic(&mut self, i: usize, j: usize, coef: f64) -> Result<(), ModelError> {
        self.check_index(i)?;
        self.check_index(j)?;
        *self.quadratic.entry((i.min(j), i.max(j))).or_insert(0.0) += coef;
        Ok(())
    }

    pub fn add_constraint(&mut self, constraint: LinearConstraint) -> Result<(), ModelError> {
        if constraint.terms.is_empty() {
            return Err(ModelError::EmptyConstraint);
        }
        for &i in constraint.terms.keys() {
            self.check_index(i)?;
        }
        self.constraints.push(constraint);
        Ok(())
    }

    pub fn objective(&self, x: &[u8]) -> f64 {
        let lin: f64 = self
            .linear
            .iter()
            .filter(|(&i, _)| x[i] != 0)
            .map(|(_, &c)| c)
            .sum();
        let quad: f64 = self
            .quadratic
            .iter()
            .filter(|(&(i, j), _)| x[i] != 0 && x[j] != 0)
            .map(|(_, &c)| c)
            .sum();
        lin + quad
    }

    /// Objective value, feasibility and summed absolute constraint residual.
    pub fn evaluate(&self, x: &[u8]) -> Result<Evaluation, ModelError> {
        if x.len() != self.num_vars {
            return Err(ModelError::LengthMismatch {
                expected: self.num_vars,
                actual: x.len(),
            });
        }
        let violation: f64 = self.constraints.iter().map(|c| c.residual(x)).sum();
        let feasible = self
            .constraints
            .iter()
            .all(|c| c.residual(x) <= FEASIBILITY_TOL);
        Ok(Evaluation {
            objective: self.objective(x),
            feasible,
            violation,
        })
    }
}

fn check_square(weights: &[Vec<f64>]) -> Result<usize, ModelError> {
    let n = weights.len();
    if n == 0 || weights.iter().any(|row| row.len() != n) {
        return Err(ModelError::NonSquareWeights);
    }
    Ok(n)
}

/// Builds the arbitrage program over log weights (maximization).
pub fn build_qp(
    weights: &[Vec<f64>],
    formulation: Formulation,
) -> Result<QuadraticProgram, ModelError> {
    let n = check_square(weights)?;
    let var = |i: usize, j: usize| i * n + j;
    let mut qp = QuadraticProgram::new(n * n, Sense::Maximize);
    qp.scale = n;
    qp.var_names = (0..n)
        .flat_map(|i| (0..n).map(move |j| format!("x_{i}_{j}")))
        .collect();
    for (i, row) in weights.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            if w != 0.0 {
                qp.add_linear(var(i, j), w)?;
            }
        }
    }
    match formulation {
        Formulation::Selfloop => {
            for i in 0..n {
                qp.add_constraint(LinearConstraint {
                    terms: (0..n).map(|j| (var(i, j), 1.0)).collect(),
                    sense: ConstraintSense::Eq,
                    rhs: 1.0,
                })?;
            }
            for j in 0..n {
                qp.add_constraint(LinearConstraint {
                    terms: (0..n).map(|i| (var(i, j), 1.0)).collect(),
                    sense: ConstraintSense::Eq,
                    rhs: 1.0,
                })?;
            }
        }
        Formulation::Slack => {
            // inflow(k) - outflow(k) = 0; the self-loop cancels out
            for k in 0..n {
                let mut terms = BTreeMap::new();
                for i in (0..n).filter(|&i| i != k) {
                    terms.insert(var(i, k), 1.0);
                    terms.insert(var(k, i), -1.0);
                }
                qp.add_constraint(LinearConstraint {
                    terms,
                    sense: ConstraintSense::Eq,
                    rhs: 0.0,
                })?;
            }
            for j in 0..n {
                qp.add_constraint(LinearConstraint {
                    terms: (0..n).map(|i| (var(i, j), 1.0)).collect(),
                    sense: ConstraintSense::Le,
                    rhs: 1.0,
                })?;
            }
        }
    }
    Ok(qp)
}

/// A set of disjoint trading cycles and their gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleSolution {
    /// Each cycle starts at its smallest currency index.
    pub cycles: Vec<Vec<usize>>,
    #[serde(rename = "edges")]
    pub selected_edges: BTreeSet<(usize, usize)>,
    /// Sum of log weights over every selected edge.
    pub log_gain: f64,
    /// `exp(best cycle log gain) - 1` when that is positive, else 0.
    pub profit_rate: f64,
}

impl CycleSolution {
    /// Builds a solution from off-diagonal edges. Every currency may leave and
    /// enter at most once; returns `None` otherwise or if an edge does not
    /// close into a cycle.
    pub fn from_edges(
        edges: impl IntoIterator<Item = (usize, usize)>,
        weights: &[Vec<f64>],
    ) -> Option<Self> {
        let n = weights.len();
        let mut succ = vec![None; n];
        let mut has_pred = vec![false; n];
        let mut selected = BTreeSet::new();
        for (i, j) in edges {
            if i == j {
                continue;
            }
            if succ[i].is_some() || has_pred[j] {
                return None;
            }
            succ[i] = Some(j);
            has_pred[j] = true;
            selected.insert((i, j));
        }
        let mut seen = vec![false; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if seen[start] || succ[start].is_none() {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut cur = succ[start]?;
            while cur != start {
                if seen[cur] {
                    return None;
                }
                seen[cur] = true;
                cycle.push(cur);
                cur = succ[cur]?;
            }
            cycles.push(cycle);
        }
        let log_gain = selected.iter().map(|&(i, j)| weights[i][j]).sum();
        let best_cycle = cycles
            .iter()
            .map(|c| cycle_log_gain(c, weights))
            .fold(f64::NEG_INFINITY, f64::max);
        let profit_rate = if best_cycle > 0.0 {
            best_cycle.exp() - 1.0
        } else {
            0.0
        };
        Some(Self {
            cycles,
            selected_edges: selected,
            log_gain,
            profit_rate,
        })
    }

    /// `perm[i]` is the currency that `i` is exchanged into.
    pub fn from_permutation(perm: &[usize], weights: &[Vec<f64>]) -> Self {
        Self::from_edges(perm.iter().copied().enumerate(), weights)
            .expect("a permutation always decomposes into cycles")
    }

    pub fn is_profitable(&self) -> bool {
        self.profit_rate > 0.0
    }

    /// Full `n*n` assignment: the selected edges plus self-loops on every
    /// currency that is not traded.
    pub fn assignment_bits(&self, n: usize) -> Vec<u8> {
        let mut bits = vec![0u8; n * n];
        let mut traded = vec![false; n];
        for &(i, j) in &self.selected_edges {
            bits[i * n + j] = 1;
            traded[i] = true;
        }
        for (k, _) in traded.iter().enumerate().filter(|(_, &t)| !t) {
            bits[k * n + k] = 1;
        }
        bits
    }

    /// Renders the best cycle as `A→B→C→A` using currency labels.
    pub fn describe(&self, labels: &[String], weights: &[Vec<f64>]) -> Option<String> {
        let best = self
            .cycles
            .iter()
            .max_by(|a, b| cycle_log_gain(a, weights).total_cmp(&cycle_log_gain(b, weights)))?;
        let mut names: Vec<&str> = best.iter().map(|&i| labels[i].as_str()).collect();
        names.push(&labels[best[0]]);
        Some(names.join("→"))
    }
}

pub fn cycle_log_gain(cycle: &[usize], weights: &[Vec<f64>]) -> f64 {
    cycle
        .iter()
        .zip(cycle.iter().cycle().skip(1))
        .map(|(&a, &b)| weights[a][b])
        .sum()
}

/// Rearranges `perm` into the next lexicographic permutation; returns false
/// after the last one.
fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(i) = (1..perm.len()).rev().find(|&i| perm[i - 1] < perm[i]) else {
        return false;
    };
    let j = (i..perm.len())
        .rev()
        .find(|&j| perm[j] > perm[i - 1])
        .unwrap();
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Exhaustive search over all `n!` permutation matrices. Ties go to the
/// lexicographically smallest permutation.
pub fn brute_force_best(weights: &[Vec<f64>]) -> Result<CycleSolution, ModelError> {
    let n = check_square(weights)?;
    if n > MAX_BRUTE_FORCE {
        return Err(ModelError::TooLarge(n));
    }
    let score = |p: &[usize]| -> f64 { p.iter().enumerate().map(|(i, &j)| weights[i][j]).sum() };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_score = score(&perm);
    while next_permutation(&mut perm) {
        let s = score(&perm);
        if s > best_score {
            best_score = s;
            best.copy_from_slice(&perm);
        }
    }
    Ok(CycleSolution::from_permutation(&best, weights))
}
