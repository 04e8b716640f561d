//! Simulation studies: scenario data generation, replicate fitting on a
//! worker pool and win-rate / DIC-difference tables.

mod aggregate;
mod scenario;
mod study;

pub use aggregate::{dic_differences, table1, win_rates, DicDifferenceRow, SummaryRow, WinRateRow};
pub use scenario::{BetaScheme, CovariateScheme, FittedModel, Replicate, ScenarioSpec};
pub use study::{run_replicate, FitRecord, ReplicateRecord, ShapeSummary, StudyReport, StudySpec};

use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::evaluation::EvalError;
use crate::model::ModelError;
use crate::sampler::SamplerError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid study: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        SimError::Io { path: path.display().to_string(), source }
    }
}

/// Independent child seed number `stream` of `master`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng.next_u64()
}
