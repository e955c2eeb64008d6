//! The variational loop: a population of ansatz parameter vectors is scored
//! against the Hamiltonian one generation at a time, and the winning circuit
//! is sampled and decoded into trading cycles.

mod decode;
mod grid;
mod problem;

pub use decode::{decode_bitstring, select_solution, Readout};
pub use grid::{hyperparameter_grid, GridCell, GridReport, GridRun};
pub use problem::ArbitrageProblem;

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::index_to_string;
use crate::ising::EnergyTable;
use crate::model::ModelError;
use crate::optim::{
    de_minimize, local_minimize, DeConfig, GenerationStats, LocalConfig, ObjectiveError, OptError,
    OptResult,
};
use crate::qubo::QuboError;
use crate::sim::{estimate_from_counts, simulate, CircuitSpec, Counts, SimError};

/// Candidates are simulated concurrently below this qubit count; larger
/// states are parallelized inside each gate instead.
const CANDIDATE_PAR_MAX_QUBITS: usize = 14;

#[derive(Debug, Error)]
pub enum VqeError {
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Qubo(#[from] QuboError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Opt(#[from] OptError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OptimizerConfig {
    De(DeConfig),
    Local(LocalConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    Exact,
    Shots(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeConfig {
    pub ansatz: CircuitSpec,
    pub optimizer: OptimizerConfig,
    pub evaluation: EvalMode,
    pub shots_final: u64,
    /// Master seed. It replaces the DE seed and also drives the local start
    /// point, per-evaluation shot noise and the final readout.
    pub seed: u64,
}

impl VqeConfig {
    /// DE with default settings, bounds sized for `ansatz`.
    pub fn de(ansatz: CircuitSpec) -> Self {
        Self {
            optimizer: OptimizerConfig::De(DeConfig::for_dim(ansatz.num_params())),
            ansatz,
            evaluation: EvalMode::Exact,
            shots_final: 4000,
            seed: 0,
        }
    }

    /// Nelder–Mead from a seeded random start, bounded to `[-pi, pi]`.
    pub fn local(ansatz: CircuitSpec) -> Self {
        Self {
            optimizer: OptimizerConfig::Local(LocalConfig {
                bounds: Some(vec![(-PI, PI); ansatz.num_params()]),
                ..LocalConfig::default()
            }),
            ansatz,
            evaluation: EvalMode::Exact,
            shots_final: 4000,
            seed: 0,
        }
    }

    /// Same settings with a different circuit; optimizer bounds are resized
    /// to the new parameter count, reusing the first bound.
    pub fn with_ansatz(&self, ansatz: CircuitSpec) -> Self {
        let dim = ansatz.num_params();
        let resize = |b: &[(f64, f64)]| vec![b.first().copied().unwrap_or((-PI, PI)); dim];
        let optimizer = match &self.optimizer {
            OptimizerConfig::De(c) => OptimizerConfig::De(DeConfig {
                bounds: resize(&c.bounds),
                ..c.clone()
            }),
            OptimizerConfig::Local(c) => OptimizerConfig::Local(LocalConfig {
                bounds: c.bounds.as_deref().map(resize),
                ..c.clone()
            }),
        };
        Self {
            ansatz,
            optimizer,
            ..self.clone()
        }
    }

    fn validate(&self, num_qubits: usize) -> Result<(), VqeError> {
        if self.ansatz.num_qubits != num_qubits {
            return Err(VqeError::ConfigMismatch(format!(
                "ansatz has {} qubits, Hamiltonian has {num_qubits}",
                self.ansatz.num_qubits
            )));
        }
        let dim = self.ansatz.num_params();
        let bounds = match &self.optimizer {
            OptimizerConfig::De(c) => Some(c.bounds.len()),
            OptimizerConfig::Local(c) => c.bounds.as_ref().map(Vec::len),
        };
        if let Some(len) = bounds {
            if len != dim {
                return Err(VqeError::ConfigMismatch(format!(
                    "{len} optimizer bounds for {dim} ansatz parameters"
                )));
            }
        }
        if self.evaluation == EvalMode::Shots(0) || self.shots_final == 0 {
            return Err(VqeError::Sim(SimError::NoShots));
        }
        Ok(())
    }
}

/// Per-run series for convergence plots.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VqeTrace {
    pub values: Vec<f64>,
    pub generations: Vec<GenerationStats>,
    /// Wall-clock seconds per objective call (one DE generation, or one
    /// local evaluation).
    pub batch_seconds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeOutcome {
    pub opt: OptResult,
    pub num_qubits: usize,
    /// Final readout counts keyed by basis index.
    pub samples: Counts,
    pub solution: Readout,
    /// Basis index that produced `solution`.
    pub solution_index: Option<usize>,
    pub lambda_estimate: f64,
    pub trace: VqeTrace,
}

/// Deterministic JSON summary without timings or per-evaluation series.
#[derive(Serialize)]
struct OutcomeReport<'a> {
    lambda_estimate: f64,
    best_params: &'a [f64],
    generations: usize,
    evaluations: usize,
    converged: bool,
    solution: &'a Readout,
    solution_bitstring: Option<String>,
    samples: Vec<(String, u64)>,
}

impl VqeOutcome {
    pub fn to_json(&self) -> String {
        let report = OutcomeReport {
            lambda_estimate: self.lambda_estimate,
            best_params: &self.opt.best_params,
            generations: self.opt.generations,
            evaluations: self.opt.evaluations,
            converged: self.opt.converged,
            solution: &self.solution,
            solution_bitstring: self
                .solution_index
                .map(|i| index_to_string(i, self.num_qubits)),
            samples: self.sample_rows(),
        };
        serde_json::to_string_pretty(&report).expect("outcome serializes")
    }

    /// Samples as `(bitstring, count)`, most frequent first.
    pub fn sample_rows(&self) -> Vec<(String, u64)> {
        let mut rows: Vec<(String, u64)> = self
            .samples
            .iter()
            .map(|(&i, &c)| (index_to_string(i, self.num_qubits), c))
            .collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        rows
    }

    /// `bitstring,count,feasible,log_gain` rows.
    pub fn samples_csv(&self, problem: &ArbitrageProblem) -> String {
        let mut out = String::from("bitstring,count,feasible,log_gain\n");
        for (&i, &c) in &self.samples {
            let _ = match problem.decode_index(i) {
                Readout::Solution(s) => writeln!(
                    out,
                    "{},{c},true,{}",
                    index_to_string(i, self.num_qubits),
                    s.log_gain
                ),
                Readout::Infeasible => {
                    writeln!(out, "{},{c},false,", index_to_string(i, self.num_qubits))
                }
            };
        }
        out
    }

    /// `batch,seconds` rows. Kept apart from the other artifacts because it
    /// is the only non-reproducible output.
    pub fn timing_csv(&self) -> String {
        let mut out = String::from("batch,seconds\n");
        for (i, s) in self.trace.batch_seconds.iter().enumerate() {
            let _ = writeln!(out, "{i},{s:.6}");
        }
        out
    }

    /// Smallest objective value seen during the run.
    pub fn min_recorded(&self) -> f64 {
        self.trace
            .values
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// splitmix64 step, used to derive independent stream seeds.
fn mix(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const FINAL_STREAM: u64 = u64::MAX;
const START_STREAM: u64 = u64::MAX - 1;

fn evaluate_one(
    spec: &CircuitSpec,
    table: &EnergyTable,
    params: &[f64],
    mode: EvalMode,
    seed: u64,
    eval_index: u64,
) -> Result<f64, SimError> {
    let state = simulate(spec, params)?;
    match mode {
        EvalMode::Exact => state.expectation(table),
        EvalMode::Shots(shots) => {
            let counts = state.sample(shots, mix(seed, eval_index));
            Ok(estimate_from_counts(&counts, |i| table.get(i)).mean)
        }
    }
}

/// Runs the configured optimizer over the ansatz parameters, then samples the
/// best circuit `shots_final` times and decodes the readout.
pub fn run_vqe(problem: &ArbitrageProblem, cfg: &VqeConfig) -> Result<VqeOutcome, VqeError> {
    let hmt = &problem.hamiltonian;
    cfg.validate(hmt.num_qubits)?;
    let table = hmt.energy_table();
    let spec = cfg.ansatz;
    let mode = cfg.evaluation;
    let seed = cfg.seed;
    let dim = spec.num_params();
    let mut batch_seconds = Vec::new();
    let mut evaluated = 0u64;

    let opt = match &cfg.optimizer {
        OptimizerConfig::De(de) => {
            let de = DeConfig { seed, ..de.clone() };
            let objective = |batch: &[Vec<f64>]| -> Result<Vec<f64>, ObjectiveError> {
                let start = Instant::now();
                let base = evaluated;
                let one = |(k, p): (usize, &Vec<f64>)| {
                    evaluate_one(&spec, &table, p, mode, seed, base + k as u64)
                };
                let values: Result<Vec<f64>, SimError> =
                    if spec.num_qubits < CANDIDATE_PAR_MAX_QUBITS {
                        batch.par_iter().enumerate().map(one).collect()
                    } else {
                        batch.iter().enumerate().map(one).collect()
                    };
                evaluated += batch.len() as u64;
                batch_seconds.push(start.elapsed().as_secs_f64());
                Ok(values?)
            };
            de_minimize(objective, dim, &de)?
        }
        OptimizerConfig::Local(local) => {
            let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, START_STREAM));
            let x0: Vec<f64> = match &local.bounds {
                Some(b) => b.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect(),
                None => (0..dim).map(|_| rng.gen_range(-PI..=PI)).collect(),
            };
            let objective = |p: &[f64]| -> Result<f64, ObjectiveError> {
                let start = Instant::now();
                let v = evaluate_one(&spec, &table, p, mode, seed, evaluated)?;
                evaluated += 1;
                batch_seconds.push(start.elapsed().as_secs_f64());
                Ok(v)
            };
            local_minimize(objective, &x0, local)?
        }
    };

    let state = simulate(&spec, &opt.best_params)?;
    let samples = state.sample(cfg.shots_final, mix(seed, FINAL_STREAM));
    let (solution, solution_index) =
        select_solution(&samples, hmt.num_qubits, &problem.qp, &problem.weights);
    Ok(VqeOutcome {
        num_qubits: hmt.num_qubits,
        samples,
        solution,
        solution_index,
        lambda_estimate: opt.best_value,
        trace: VqeTrace {
            values: opt.trace.clone(),
            generations: opt.history.clone(),
            batch_seconds,
        },
        opt,
    })
}
