//! Command-line surface of `qarb`: detect currency arbitrage classically or
//! with a variational quantum eigensolver on a simulated statevector.
//!
//! Commands report to a caller-supplied writer so they can be driven
//! in-process as well as from the binary.

mod manifest;

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

pub use manifest::{
    Command, GridSettings, ModelSettings, OptimizerKind, OptimizerSettings, RunManifest,
    SolverSettings,
};
use qarb::market::{NormalizationVector, TransitMatrix};
use qarb::model::{brute_force_best, Formulation};
use qarb::optim::{DeConfig, LocalConfig};
use qarb::sim::{CircuitSpec, Entanglement};
use qarb::vqe::{
    hyperparameter_grid, run_vqe, ArbitrageProblem, EvalMode, OptimizerConfig, Readout, VqeConfig,
};

pub const EXIT_NO_ARBITRAGE: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;
/// Largest instance for which the exhaustive ground state is reported.
const REPORT_GROUND_STATE_MAX_QUBITS: usize = 20;

#[derive(Parser)]
#[command(
    name = "qarb",
    version,
    about = "Currency arbitrage via QUBO, Ising and VQE"
)]
pub struct Cli {
    /// Worker threads for circuit evaluation (defaults to all cores)
    #[arg(long, global = true, env = "QARB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exhaustive search over all exchange permutations
    Classical(InputArgs),
    /// Write the QUBO, Ising Hamiltonian and Pauli decomposition
    Compile {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Run the variational solver and decode its readout
    Vqe {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Run the reps x entanglement hyperparameter grid instead
        #[arg(long)]
        grid: bool,
        #[command(flatten)]
        grid_args: GridArgs,
    },
    /// Success rates over a reps x entanglement grid
    Grid {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        grid_args: GridArgs,
    },
    /// Repeat a run from its manifest.json
    Rerun {
        manifest: PathBuf,
        /// Write to this directory instead of the recorded one
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Exchange-rate matrix (CSV with a header of labels, or JSON)
    input: PathBuf,
    /// Per-currency normalization coefficients applied before solving
    #[arg(long)]
    normalize: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "qarb-out")]
    out: PathBuf,
}

#[derive(Args)]
struct ModelArgs {
    /// selfloop (n^2 variables) or slack (adds slack bits)
    #[arg(long, default_value = "selfloop")]
    formulation: Formulation,
    /// Constraint penalty weight: `auto` or a positive number
    #[arg(long, default_value = "auto")]
    penalty: String,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, default_value = "sca")]
    entanglement: Entanglement,
    #[arg(long, value_enum, default_value = "de")]
    optimizer: OptimizerKind,
    #[arg(long, default_value_t = 15)]
    popsize: usize,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_generations: usize,
    /// DE dither range for the differential weight
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.5, 1.0])]
    mutation: Vec<f64>,
    #[arg(long, default_value_t = 0.7)]
    recombination: f64,
    /// Evaluation budget of the local optimizer
    #[arg(long, default_value_t = 5000)]
    max_evals: usize,
    /// Starting simplex edge of the local optimizer
    #[arg(long, default_value_t = 0.5)]
    initial_step: f64,
    /// Estimate expectations from this many shots (exact when omitted)
    #[arg(long)]
    shots: Option<u64>,
    /// Shots for the final readout
    #[arg(long, default_value_t = 4000)]
    shots_final: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3])]
    reps_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = Entanglement::ALL)]
    patterns: Vec<Entanglement>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
}

impl From<ModelArgs> for ModelSettings {
    fn from(a: ModelArgs) -> Self {
        Self {
            formulation: a.formulation,
            penalty: a.penalty,
        }
    }
}

impl From<SolverArgs> for SolverSettings {
    fn from(a: SolverArgs) -> Self {
        Self {
            reps: a.reps,
            entanglement: a.entanglement,
            optimizer: OptimizerSettings {
                kind: a.optimizer,
                popsize: a.popsize,
                tol: a.tol,
                max_generations: a.max_generations,
                mutation: (a.mutation[0], a.mutation[1]),
                recombination: a.recombination,
                max_evals: a.max_evals,
                initial_step: a.initial_step,
            },
            shots: a.shots,
            shots_final: a.shots_final,
            seed: a.seed,
        }
    }
}

impl From<GridArgs> for GridSettings {
    fn from(a: GridArgs) -> Self {
        Self {
            reps: a.reps_list,
            patterns: a.patterns,
            trials: a.trials,
        }
    }
}

pub(crate) fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn absolute(path: &Path) -> PathBuf {
    std::fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf())
}

fn manifest_for(cmd: Cmd) -> Result<RunManifest> {
    let base = |command, input: InputArgs| RunManifest {
        command,
        input: absolute(&input.input),
        normalize: input.normalize.as_deref().map(absolute),
        out: input.out,
        model: None,
        solver: None,
        grid: None,
    };
    Ok(match cmd {
        Cmd::Classical(input) => base(Command::Classical, input),
        Cmd::Compile { input, model } => RunManifest {
            model: Some(model.into()),
            ..base(Command::Compile, input)
        },
        Cmd::Vqe {
            input,
            model,
            solver,
            grid,
            grid_args,
        } => {
            let command = if grid { Command::Grid } else { Command::Vqe };
            RunManifest {
                model: Some(model.into()),
                solver: Some(solver.into()),
                grid: grid.then(|| grid_args.into()),
                ..base(command, input)
            }
        }
        Cmd::Grid {
            input,
            model,
            solver,
            grid_args,
        } => RunManifest {
            model: Some(model.into()),
            solver: Some(solver.into()),
            grid: Some(grid_args.into()),
            ..base(Command::Grid, input)
        },
        Cmd::Rerun { manifest, out } => {
            let mut m = RunManifest::load(&manifest)?;
            if let Some(out) = out {
                m.out = out;
            }
            m
        }
    })
}

fn load_market(m: &RunManifest) -> Result<TransitMatrix> {
    let market =
        TransitMatrix::load(&m.input).with_context(|| format!("loading {}", m.input.display()))?;
    match &m.normalize {
        Some(path) => {
            let v = NormalizationVector::load(path)
                .with_context(|| format!("loading {}", path.display()))?;
            Ok(market.normalize(&v)?)
        }
        None => Ok(market),
    }
}

fn load_problem(m: &RunManifest) -> Result<ArbitrageProblem> {
    let market = load_market(m)?;
    let Some(model) = &m.model else {
        bail!("manifest has no model settings");
    };
    Ok(ArbitrageProblem::new(
        &market,
        model.formulation,
        model.penalty()?,
    )?)
}

fn vqe_config(s: &SolverSettings, num_qubits: usize) -> VqeConfig {
    let spec = CircuitSpec::new(num_qubits, s.reps, s.entanglement);
    let o = &s.optimizer;
    let mut cfg = match o.kind {
        OptimizerKind::De => VqeConfig::de(spec),
        OptimizerKind::Local => VqeConfig::local(spec),
    };
    match &mut cfg.optimizer {
        OptimizerConfig::De(de) => {
            *de = DeConfig {
                popsize: o.popsize,
                max_generations: o.max_generations,
                tol: o.tol,
                mutation: o.mutation,
                recombination: o.recombination,
                ..de.clone()
            }
        }
        OptimizerConfig::Local(local) => {
            *local = LocalConfig {
                max_evals: o.max_evals,
                initial_step: o.initial_step,
                ..local.clone()
            }
        }
    }
    cfg.evaluation = match s.shots {
        Some(shots) => EvalMode::Shots(shots),
        None => EvalMode::Exact,
    };
    cfg.shots_final = s.shots_final;
    cfg.seed = s.seed;
    cfg
}

fn describe(problem: &ArbitrageProblem, readout: &Readout) -> String {
    match readout {
        Readout::Infeasible => "INFEASIBLE".into(),
        Readout::Solution(s) => match s.describe(&problem.labels, &problem.weights) {
            Some(cycle) => format!("{cycle} (profit_rate {:.6})", s.profit_rate),
            None => "no trade".into(),
        },
    }
}

fn cmd_classical(m: &RunManifest, out: &mut dyn Write) -> Result<u8> {
    let market = load_market(m)?;
    let weights = market.log_weights();
    let best = brute_force_best(&weights)?;
    let report = serde_json::json!({
        "labels": market.labels(),
        "solution": best,
        "cycle": best.describe(market.labels(), &weights),
    });
    write_file(
        &m.out,
        "classical.json",
        &(serde_json::to_string_pretty(&report)? + "\n"),
    )?;
    m.save()?;
    if !best.is_profitable() {
        writeln!(out, "no arbitrage opportunity")?;
        return Ok(EXIT_NO_ARBITRAGE);
    }
    if let Some(cycle) = best.describe(market.labels(), &weights) {
        writeln!(out, "cycle: {cycle}")?;
    }
    writeln!(out, "log_gain: {:.6}", best.log_gain)?;
    writeln!(out, "profit_rate: {:.6}", best.profit_rate)?;
    Ok(0)
}

fn cmd_compile(m: &RunManifest, out: &mut dyn Write) -> Result<u8> {
    let problem = load_problem(m)?;
    write_file(&m.out, "qubo.json", &(problem.qubo.to_json() + "\n"))?;
    write_file(
        &m.out,
        "ising.json",
        &(problem.hamiltonian.to_json() + "\n"),
    )?;
    write_file(&m.out, "pauli.txt", &problem.hamiltonian.render())?;
    m.save()?;
    writeln!(out, "{} qubits", problem.num_qubits())?;
    writeln!(out, "penalty: {}", problem.qubo.penalty)?;
    Ok(0)
}

fn cmd_vqe(m: &RunManifest, out: &mut dyn Write) -> Result<u8> {
    let problem = load_problem(m)?;
    let Some(solver) = &m.solver else {
        bail!("manifest has no solver settings");
    };
    let cfg = vqe_config(solver, problem.num_qubits());
    let outcome = run_vqe(&problem, &cfg)?;
    write_file(&m.out, "outcome.json", &(outcome.to_json() + "\n"))?;
    write_file(&m.out, "trace.csv", &outcome.opt.trace_csv())?;
    write_file(&m.out, "generations.csv", &outcome.opt.generations_csv())?;
    write_file(&m.out, "samples.csv", &outcome.samples_csv(&problem))?;
    write_file(&m.out, "timing.csv", &outcome.timing_csv())?;
    m.save()?;

    writeln!(
        out,
        "{} qubits, {} reps={}, {}",
        problem.num_qubits(),
        cfg.ansatz.entanglement,
        cfg.ansatz.reps,
        match solver.optimizer.kind {
            OptimizerKind::De => "differential evolution",
            OptimizerKind::Local => "nelder-mead",
        }
    )?;
    writeln!(out, "lambda estimate: {:.6}", outcome.lambda_estimate)?;
    if problem.num_qubits() <= REPORT_GROUND_STATE_MAX_QUBITS {
        writeln!(
            out,
            "lambda min (exhaustive): {:.6}",
            problem.hamiltonian.ground_state().0
        )?;
    }
    writeln!(
        out,
        "evaluations: {} over {} iterations{}",
        outcome.opt.evaluations,
        outcome.opt.generations,
        if outcome.opt.converged {
            ""
        } else {
            " (not converged)"
        }
    )?;
    writeln!(out, "solution: {}", describe(&problem, &outcome.solution))?;
    Ok(if outcome.solution.is_feasible() {
        0
    } else {
        EXIT_INFEASIBLE
    })
}

fn cmd_grid(m: &RunManifest, out: &mut dyn Write) -> Result<u8> {
    let problem = load_problem(m)?;
    let (Some(solver), Some(grid)) = (&m.solver, &m.grid) else {
        bail!("manifest has no solver or grid settings");
    };
    let cfg = vqe_config(solver, problem.num_qubits());
    let report = hyperparameter_grid(&problem, &grid.reps, &grid.patterns, grid.trials, &cfg)?;
    write_file(&m.out, "grid.csv", &report.to_csv())?;
    write_file(&m.out, "grid_runs.csv", &report.runs_csv())?;
    m.save()?;
    write!(out, "{}", report.render())?;
    Ok(0)
}

/// Runs a parsed command, reporting to `out`. Returns the process exit code.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<u8> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let m = manifest_for(cli.command)?;
    match m.command {
        Command::Classical => cmd_classical(&m, out),
        Command::Compile => cmd_compile(&m, out),
        Command::Vqe => cmd_vqe(&m, out),
        Command::Grid => cmd_grid(&m, out),
    }
}
