//! Posterior summaries, model-comparison criteria and covariate effects
//! computed from a [`Chain`](crate::sampler::Chain).

mod criteria;
mod effects;
mod report;
mod summary;

pub use criteria::{deviance, dic, lpml, plug_in_state, Dic, DicConvention, Lpml};
pub use effects::{covariate_effect, CovariateEffect};
pub use report::{write_comparison_csv, ComparisonRow, EffectRequest, FitReport, ParamSummary};
pub use summary::{effective_sample_size, hpd_interval, posterior_median};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("chain has no draws")]
    EmptyChain,
    #[error("need at least 2 draws, got {0}")]
    TooFewDraws(usize),
    #[error("credible level {0} outside (0, 1)")]
    BadLevel(f64),
    #[error("unknown covariate '{0}'")]
    UnknownCovariate(String),
    #[error("covariate values must differ (both {0})")]
    SameValues(f64),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
