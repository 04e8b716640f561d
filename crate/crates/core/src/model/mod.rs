//! Data, model specification and posterior evaluation.

mod dataset;
mod graph;
mod posterior;
mod prior;
mod propriety;
mod simplex;
mod spec;
mod state;

pub use dataset::{Dataset, INTERCEPT};
pub use graph::AdjacencyGraph;
pub use posterior::{icar_exponent, row_log_likelihood, Model};
pub use prior::{BetaPrior, Prior, Tau2Prior};
pub use propriety::{check_propriety, signed_design, Propriety, Separation};
pub use spec::{ModelSpec, SpatialSpec};
pub use state::ParamState;

use thiserror::Error;

use crate::link::{LinkError, ShapeParam};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: {reason}")]
    BadRow { row: usize, reason: String },
    #[error("missing column '{0}'")]
    MissingColumn(String),
    #[error("dataset is empty")]
    Empty,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("adjacency line {line}: {reason}")]
    BadEdge { line: usize, reason: String },
    #[error("adjacency is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("region '{0}' is not a node of the adjacency graph")]
    UnknownRegion(String),
    #[error("spatial model needs {0}")]
    SpatialSetup(&'static str),
    #[error("no prior may be given for {param}: {reason}")]
    BadPrior { param: ShapeParam, reason: String },
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error(
        "flat beta prior gives an improper posterior for this data ({0}); \
         use a proper normal prior or check the data for separation"
    )]
    Improper(String),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
