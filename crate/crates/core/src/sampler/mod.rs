//! Adaptive random-walk Metropolis-within-Gibbs.
//!
//! Blocks per iteration: all coefficients jointly, then each sampled link
//! shape parameter on an unconstrained scale, then (for spatial models) every
//! region effect followed by a conjugate draw of `tau2`. Proposal scales adapt
//! by Robbins–Monro during burn-in and are frozen afterwards.

mod chain;
mod init;
mod kernel;
mod run;
mod spatial;
mod transform;

pub use chain::{BlockStats, Chain};
pub use init::{irls, IrlsFit};
pub use kernel::AdaptiveRandomWalk;
pub use run::run_chain;
pub use spatial::{icar_conditional, icar_conditional_draw, tau2_posterior, update_spatial, update_tau2};
pub use transform::Scale;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, ParamState};

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("log posterior is not finite at the initial state ({0})")]
    NonFiniteInit(String),
    #[error("block '{block}' accepted none of {proposed} proposals after adaptation")]
    Stuck { block: String, proposed: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("chain file: {0}")]
    Format(String),
}

/// Run length, thinning, seed and adaptation targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    pub n_burnin: usize,
    pub n_samples: usize,
    /// Keep every `thin`-th post-burn-in iteration; `n_samples` draws are kept.
    pub thin: usize,
    pub seed: u64,
    /// Target acceptance rate of scalar blocks.
    pub adapt_target: f64,
    /// Target acceptance rate of the coefficient block.
    pub adapt_target_beta: f64,
    pub init: Option<ParamState>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig { n_burnin: 2000, n_samples: 4000, thin: 1, seed: 1, adapt_target: 0.44, adapt_target_beta: 0.234, init: None }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |what: String| Err(ModelError::InvalidPrior(what));
        if self.n_samples == 0 {
            return bad("sampler n_samples must be positive".into());
        }
        if self.thin == 0 {
            return bad("sampler thin must be positive".into());
        }
        for t in [self.adapt_target, self.adapt_target_beta] {
            if !(t > 0.0 && t < 1.0) {
                return bad(format!("adaptation target {t} outside (0, 1)"));
            }
        }
        Ok(())
    }
}
