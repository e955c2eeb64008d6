use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use qarb::model::Formulation;
use qarb::qubo::PenaltyConfig;
use qarb::sim::Entanglement;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Classical,
    Compile,
    Vqe,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    De,
    Local,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSettings {
    pub formulation: Formulation,
    /// `auto` or a positive weight.
    pub penalty: String,
}

impl ModelSettings {
    pub fn penalty(&self) -> Result<PenaltyConfig> {
        self.penalty.parse().map_err(anyhow::Error::msg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    pub kind: OptimizerKind,
    pub popsize: usize,
    pub tol: f64,
    pub max_generations: usize,
    pub mutation: (f64, f64),
    pub recombination: f64,
    pub max_evals: usize,
    pub initial_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub reps: usize,
    pub entanglement: Entanglement,
    pub optimizer: OptimizerSettings,
    /// `None` means exact expectations.
    pub shots: Option<u64>,
    pub shots_final: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSettings {
    pub reps: Vec<usize>,
    pub patterns: Vec<Entanglement>,
    pub trials: usize,
}

/// Everything needed to repeat a run. Written next to every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Command,
    pub input: PathBuf,
    pub normalize: Option<PathBuf>,
    pub out: PathBuf,
    pub model: Option<ModelSettings>,
    pub solver: Option<SolverSettings>,
    pub grid: Option<GridSettings>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    pub fn save(&self) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        crate::write_file(&self.out, "manifest.json", &text)
    }
}
