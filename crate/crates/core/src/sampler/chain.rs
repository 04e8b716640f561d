use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ChainConfig, SamplerError};
use crate::model::{Model, ParamState};

/// Acceptance bookkeeping for one Metropolis block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockStats {
    pub name: String,
    pub proposed_burnin: usize,
    pub accepted_burnin: usize,
    pub proposed: usize,
    pub accepted: usize,
    /// Proposal scale frozen at the end of burn-in.
    pub scale: f64,
}

impl BlockStats {
    pub fn new(name: impl Into<String>, scale: f64) -> Self {
        BlockStats { name: name.into(), proposed_burnin: 0, accepted_burnin: 0, proposed: 0, accepted: 0, scale }
    }

    /// Post-burn-in acceptance rate.
    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Sidecar {
    names: Vec<String>,
    n_draws: usize,
    spatial: bool,
    config: ChainConfig,
    blocks: Vec<BlockStats>,
    beta_proposal_covariance: Vec<Vec<f64>>,
}

/// Post-burn-in draws with their sampler metadata.
#[derive(Debug, Clone)]
pub struct Chain {
    names: Vec<String>,
    draws: Vec<ParamState>,
    blocks: Vec<BlockStats>,
    config: ChainConfig,
    spatial: bool,
    beta_proposal_covariance: Vec<Vec<f64>>,
}

impl Chain {
    pub(crate) fn new(
        model: &Model,
        draws: Vec<ParamState>,
        blocks: Vec<BlockStats>,
        config: ChainConfig,
        beta_proposal_covariance: Vec<Vec<f64>>,
    ) -> Self {
        Chain { names: model.param_names(), draws, blocks, config, spatial: model.is_spatial(), beta_proposal_covariance }
    }

    /// A chain built from given draws, e.g. for post-processing externally
    /// produced samples.
    pub fn from_draws(model: &Model, draws: Vec<ParamState>) -> Self {
        Chain::new(model, draws, Vec::new(), ChainConfig::default(), Vec::new())
    }

    pub fn draws(&self) -> &[ParamState] {
        &self.draws
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn blocks(&self) -> &[BlockStats] {
        &self.blocks
    }

    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    pub fn beta_proposal_covariance(&self) -> &[Vec<f64>] {
        &self.beta_proposal_covariance
    }

    /// Draws of one flattened parameter.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.names.iter().position(|n| n == name)?;
        Some(self.draws.iter().map(|s| s.values(self.spatial)[j]).collect())
    }

    /// All draws flattened, one row per draw.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.draws.iter().map(|s| s.values(self.spatial)).collect()
    }

    /// Every `step`-th draw, starting with the first.
    pub fn thinned(&self, step: usize) -> Chain {
        let mut c = self.clone();
        c.draws = self.draws.iter().step_by(step.max(1)).cloned().collect();
        c
    }

    /// Writes `chain.csv` (one column per scalar parameter) and `chain.json`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<(), SamplerError> {
        let dir = dir.as_ref();
        let csv_path = dir.join("chain.csv");
        let io = |path: &Path, source: std::io::Error| SamplerError::Io { path: path.display().to_string(), source };
        let mut wtr = csv::Writer::from_path(&csv_path).map_err(|e| SamplerError::Format(e.to_string()))?;
        wtr.write_record(&self.names).map_err(|e| SamplerError::Format(e.to_string()))?;
        for row in self.rows() {
            wtr.write_record(row.iter().map(|v| format!("{v:?}"))).map_err(|e| SamplerError::Format(e.to_string()))?;
        }
        wtr.flush().map_err(|e| io(&csv_path, e))?;
        let sidecar = Sidecar {
            names: self.names.clone(),
            n_draws: self.draws.len(),
            spatial: self.spatial,
            config: self.config.clone(),
            blocks: self.blocks.clone(),
            beta_proposal_covariance: self.beta_proposal_covariance.clone(),
        };
        let json_path = dir.join("chain.json");
        let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serialises");
        std::fs::write(&json_path, text).map_err(|e| io(&json_path, e))
    }

    /// Reads a chain written by [`Chain::write`] for the given model.
    pub fn read(dir: impl AsRef<Path>, model: &Model) -> Result<Chain, SamplerError> {
        let dir = dir.as_ref();
        let json_path = dir.join("chain.json");
        let text =
            std::fs::read_to_string(&json_path).map_err(|source| SamplerError::Io { path: json_path.display().to_string(), source })?;
        let sidecar: Sidecar = serde_json::from_str(&text).map_err(|e| SamplerError::Format(e.to_string()))?;
        if sidecar.names != model.param_names() {
            return Err(SamplerError::Format("chain columns do not match the model".into()));
        }
        let mut rdr = csv::Reader::from_path(dir.join("chain.csv")).map_err(|e| SamplerError::Format(e.to_string()))?;
        let mut draws = Vec::with_capacity(sidecar.n_draws);
        for rec in rdr.records() {
            let rec = rec.map_err(|e| SamplerError::Format(e.to_string()))?;
            let values: Vec<f64> = rec
                .iter()
                .map(|v| v.parse::<f64>().map_err(|_| SamplerError::Format(format!("bad number '{v}'"))))
                .collect::<Result<_, _>>()?;
            draws.push(model.state_from_values(&values)?);
        }
        if draws.len() != sidecar.n_draws {
            return Err(SamplerError::Format(format!("{} rows, sidecar says {}", draws.len(), sidecar.n_draws)));
        }
        Ok(Chain {
            names: sidecar.names,
            draws,
            blocks: sidecar.blocks,
            config: sidecar.config,
            spatial: sidecar.spatial,
            beta_proposal_covariance: sidecar.beta_proposal_covariance,
        })
    }
}
