//! Command-line front end: fit models, check propriety, run simulation
//! studies and compute covariate effects from saved chains.

pub mod commands;
pub mod manifest;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use splink::evaluation::{DicConvention, EvalError};
use splink::model::ModelError;
use splink::sampler::SamplerError;
use splink::sim::SimError;
use thiserror::Error;

pub use manifest::RunManifest;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("propriety check failed: {0}")]
    Improper(String),
    #[error("sampler failed: {0}")]
    Sampler(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }

    /// 2 input error, 3 propriety refusal, 4 sampler failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Improper(_) => 3,
            CliError::Sampler(_) => 4,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Improper(reason) => CliError::Improper(reason),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<SamplerError> for CliError {
    fn from(e: SamplerError) -> Self {
        match e {
            SamplerError::Model(m) => m.into(),
            SamplerError::Io { .. } | SamplerError::Format(_) => CliError::Input(e.to_string()),
            SamplerError::NonFiniteInit(_) | SamplerError::Stuck { .. } => CliError::Sampler(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Model(m) => m.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Model(m) => m.into(),
            SimError::Sampler(s) => s.into(),
            SimError::Eval(v) => v.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "splink", version, about = "Bayesian binomial regression with symmetric power links")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model and write the chain, report, summary table and manifest.
    Fit(FitArgs),
    /// Check the flat-prior propriety conditions (exit code 3 when they fail).
    Check(CheckArgs),
    /// Run a simulation study from a JSON file or a preset.
    Simulate(SimulateArgs),
    /// Covariate effect from the chain saved by `fit`.
    Effects(EffectsArgs),
}

/// Options overriding the sampler settings of a model or study.
#[derive(Debug, Clone, Default, Args)]
pub struct SamplerArgs {
    /// Master random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Burn-in iterations (proposal adaptation happens only here).
    #[arg(long)]
    pub burnin: Option<usize>,
    /// Number of stored draws.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Keep every THIN-th post-burn-in iteration.
    #[arg(long)]
    pub thin: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Data CSV with columns y, n, covariates and an optional region column.
    pub data: PathBuf,
    /// Model JSON (link, priors, spatial, sampler); defaults to a logit model.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Adjacency file: "label label" edge lines, single-label lines for nodes
    /// without neighbours (spatial models).
    #[arg(long)]
    pub adjacency: Option<PathBuf>,
    /// Replace the model's link family (shape parameters start at their
    /// reference values; coefficient prior, spatial part and sampler are kept).
    #[arg(long)]
    pub link: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Label used in the report and summary table (default: link family).
    #[arg(long)]
    pub label: Option<String>,
    /// Covariate effect to report, as NAME:V0:V1 (repeatable).
    #[arg(long = "effect", value_name = "NAME:V0:V1")]
    pub effects: Vec<String>,
    /// HPD credible level.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[command(flatten)]
    pub sampler: SamplerArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    /// Data CSV.
    pub data: PathBuf,
    /// Model JSON; only the link matters (Student-t degrees-of-freedom condition).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Link family to check instead of the model's.
    #[arg(long)]
    pub link: Option<String>,
    /// Also write check.txt and a manifest to this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Study1,
    Study2,
    Study3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    PlugIn,
    Variance,
}

impl From<ConventionArg> for DicConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::PlugIn => DicConvention::PlugIn,
            ConventionArg::Variance => DicConvention::Variance,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Study JSON; omit when using --preset.
    #[arg(required_unless_present = "preset", conflicts_with = "preset")]
    pub study: Option<PathBuf>,
    /// Built-in study.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Sample size per replicate for a preset (default 2000, 2000, 200).
    #[arg(long, requires = "preset")]
    pub n: Option<usize>,
    /// Replicates per scenario for a preset (default 1, 30, 50).
    #[arg(long, requires = "preset")]
    pub replicates: Option<usize>,
    /// GEV shapes for the study2 preset (repeatable; default -3.3, -0.3, 2.7).
    #[arg(long = "xi", requires = "preset", allow_negative_numbers = true)]
    pub xis: Vec<f64>,
    /// Standard deviation of the normal covariate x2 (study1, study2).
    #[arg(long, default_value_t = 3.0, requires = "preset")]
    pub x2_sd: f64,
    /// DIC penalty used by the win-rate and difference tables.
    #[arg(long, value_enum)]
    pub dic_convention: Option<ConventionArg>,
    /// Maximum number of worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub sampler: SamplerArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EffectsArgs {
    /// Output directory of a previous `fit`.
    pub fit_dir: PathBuf,
    /// Covariate name.
    #[arg(long)]
    pub variable: String,
    #[arg(long, allow_negative_numbers = true)]
    pub v0: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub v1: f64,
    /// HPD credible level.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Also write effects.csv and a manifest to this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs a parsed command, printing its text output to stdout.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Fit(a) => commands::fit(&a, &mut stdout).map(|_| ()),
        Command::Check(a) => {
            commands::check(&a, &mut stdout).and_then(
                |passes| {
                    if passes {
                        Ok(())
                    } else {
                        Err(CliError::Improper("see diagnostic above".into()))
                    }
                },
            )
        }
        Command::Simulate(a) => commands::simulate(&a, &mut stdout).map(|_| ()),
        Command::Effects(a) => commands::effects(&a, &mut stdout).map(|_| ()),
    }
}
