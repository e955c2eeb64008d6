use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_vqe, ArbitrageProblem, VqeConfig, VqeError};
use crate::sim::{CircuitSpec, Entanglement};

/// One seeded run inside a grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRun {
    pub seed: u64,
    pub success: bool,
    pub lambda_estimate: f64,
    /// Lowest objective value recorded during the run.
    pub min_recorded: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub reps: usize,
    pub entanglement: Entanglement,
    pub runs: Vec<GridRun>,
}

impl GridCell {
    pub fn successes(&self) -> usize {
        self.runs.iter().filter(|r| r.success).count()
    }

    pub fn success_rate(&self) -> f64 {
        if self.runs.is_empty() {
            0.0
        } else {
            self.successes() as f64 / self.runs.len() as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub reps: Vec<usize>,
    pub patterns: Vec<Entanglement>,
    /// Row-major over `reps` then `patterns`.
    pub cells: Vec<GridCell>,
}

impl GridReport {
    pub fn cell(&self, reps: usize, pattern: Entanglement) -> Option<&GridCell> {
        self.cells
            .iter()
            .find(|c| c.reps == reps && c.entanglement == pattern)
    }

    /// Success-rate matrix: one row per reps value, one column per pattern.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("reps");
        for p in &self.patterns {
            let _ = write!(out, ",{p}");
        }
        out.push('\n');
        for &r in &self.reps {
            let _ = write!(out, "{r}");
            for &p in &self.patterns {
                let rate = self.cell(r, p).map_or(0.0, GridCell::success_rate);
                let _ = write!(out, ",{rate}");
            }
            out.push('\n');
        }
        out
    }

    /// One row per seeded run.
    pub fn runs_csv(&self) -> String {
        let mut out = String::from(
            "reps,entanglement,seed,success,lambda_estimate,min_recorded,evaluations\n",
        );
        for c in &self.cells {
            for r in &c.runs {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    c.reps,
                    c.entanglement,
                    r.seed,
                    r.success,
                    r.lambda_estimate,
                    r.min_recorded,
                    r.evaluations
                );
            }
        }
        out
    }

    /// Plain-text table with a check mark where at least one run succeeded.
    pub fn render(&self) -> String {
        let mut out = format!("{:>5}", "reps");
        for p in &self.patterns {
            let _ = write!(out, " {:>12}", p.name());
        }
        out.push('\n');
        for &r in &self.reps {
            let _ = write!(out, "{r:>5}");
            for &p in &self.patterns {
                let cell = self.cell(r, p);
                let (s, t) = cell.map_or((0, 0), |c| (c.successes(), c.runs.len()));
                let mark = if s > 0 { '✓' } else { '✗' };
                let _ = write!(out, " {:>12}", format!("{mark} {s}/{t}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Runs `trials` seeded VQE runs for every `(reps, pattern)` pair. Trial `t`
/// uses seed `base.seed + t`, so different cells share seeds. A run succeeds
/// when its readout reaches the oracle optimum.
pub fn hyperparameter_grid(
    problem: &ArbitrageProblem,
    reps_list: &[usize],
    patterns: &[Entanglement],
    trials: usize,
    base: &VqeConfig,
) -> Result<GridReport, VqeError> {
    let oracle = problem.oracle()?;
    let n = problem.num_qubits();
    let jobs: Vec<(usize, Entanglement, u64)> = reps_list
        .iter()
        .flat_map(|&r| {
            patterns.iter().flat_map(move |&p| {
                (0..trials as u64).map(move |t| (r, p, base.seed.wrapping_add(t)))
            })
        })
        .collect();
    let runs: Result<Vec<GridRun>, VqeError> = jobs
        .par_iter()
        .map(|&(reps, pattern, seed)| {
            let mut cfg = base.with_ansatz(CircuitSpec::new(n, reps, pattern));
            cfg.seed = seed;
            let out = run_vqe(problem, &cfg)?;
            Ok(GridRun {
                seed,
                success: problem.is_optimal(&out.solution, &oracle),
                lambda_estimate: out.lambda_estimate,
                min_recorded: out.min_recorded(),
                evaluations: out.opt.evaluations,
            })
        })
        .collect();
    let mut runs = runs?.into_iter();
    let mut cells = Vec::new();
    for &reps in reps_list {
        for &entanglement in patterns {
            cells.push(GridCell {
                reps,
                entanglement,
                runs: runs.by_ref().take(trials).collect(),
            });
        }
    }
    Ok(GridReport {
        reps: reps_list.to_vec(),
        patterns: patterns.to_vec(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::TransitMatrix;
    use crate::model::Formulation;
    use crate::optim::LocalConfig;
    use crate::qubo::PenaltyConfig;
    use crate::vqe::OptimizerConfig;

    #[test]
    fn grid_shape_and_csv() {
        let m = TransitMatrix::from_csv_str("A,B\n1,2\n0.6,1\n").unwrap();
        let p = ArbitrageProblem::new(&m, Formulation::Selfloop, PenaltyConfig::Auto).unwrap();
        let mut base = VqeConfig::local(CircuitSpec::new(4, 1, Entanglement::Sca));
        if let OptimizerConfig::Local(l) = &mut base.optimizer {
            *l = LocalConfig {
                max_evals: 50,
                ..l.clone()
            };
        }
        base.shots_final = 100;
        let g = hyperparameter_grid(&p, &[1, 2], &Entanglement::ALL, 2, &base).unwrap();
        assert_eq!(g.cells.len(), 8);
        assert!(g.cells.iter().all(|c| c.runs.len() == 2));
        assert_eq!(g.cells[0].runs[1].seed, 1);
        let csv = g.to_csv();
        assert!(csv.starts_with("reps,full,linear,circular,sca\n1,"));
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(g.runs_csv().lines().count(), 17);
        assert_eq!(g.render().lines().count(), 3);

        // circular and sca wire the first layer identically
        let circ = g.cell(1, Entanglement::Circular).unwrap();
        let sca = g.cell(1, Entanglement::Sca).unwrap();
        assert_eq!(circ.runs, sca.runs);
    }
}
