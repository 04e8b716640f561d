use serde::{Deserialize, Serialize};

use super::criteria::{dic, lpml, Dic};
use super::effects::covariate_effect;
use super::summary::{effective_sample_size, hpd_interval, posterior_median};
use super::EvalError;
use crate::model::Model;
use crate::sampler::{BlockStats, Chain};

/// Posterior summary of one scalar parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub median: f64,
    pub hpd_lo: f64,
    pub hpd_hi: f64,
    pub ess: f64,
}

impl ParamSummary {
    pub fn from_draws(name: impl Into<String>, draws: &[f64], level: f64) -> Result<Self, EvalError> {
        let (hpd_lo, hpd_hi) = hpd_interval(draws, level)?;
        Ok(ParamSummary {
            name: name.into(),
            mean: draws.iter().sum::<f64>() / draws.len() as f64,
            median: posterior_median(draws)?,
            hpd_lo,
            hpd_hi,
            ess: effective_sample_size(draws),
        })
    }
}

/// A covariate effect to include in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectRequest {
    pub covariate: String,
    pub v0: f64,
    pub v1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectSummary {
    pub covariate: String,
    pub v0: f64,
    pub v1: f64,
    pub summary: ParamSummary,
}

/// Everything reported for one fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: String,
    pub link: String,
    pub n_draws: usize,
    pub level: f64,
    pub params: Vec<ParamSummary>,
    pub dic: Dic,
    pub lpml: f64,
    pub log_cpo: Vec<f64>,
    pub effects: Vec<EffectSummary>,
    pub blocks: Vec<BlockStats>,
    pub warnings: Vec<String>,
}

/// One line of a model-comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: String,
    pub variable: String,
    pub median: f64,
    pub hpd_lo: f64,
    pub hpd_hi: f64,
    pub dic: f64,
    pub lpml: f64,
}

impl FitReport {
    /// Summarises every flattened parameter, the requested effects and the
    /// comparison criteria; `level` is the HPD credible level.
    pub fn new(label: impl Into<String>, model: &Model, chain: &Chain, effects: &[EffectRequest], level: f64) -> Result<Self, EvalError> {
        if chain.is_empty() {
            return Err(EvalError::EmptyChain);
        }
        let params = chain
            .names()
            .iter()
            .map(|name| ParamSummary::from_draws(name, &chain.column(name).expect("own column"), level))
            .collect::<Result<Vec<_>, _>>()?;
        let effects = effects
            .iter()
            .map(|req| {
                let e = covariate_effect(model, chain, &req.covariate, req.v0, req.v1)?;
                let name = format!("effect[{}: {} -> {}]", req.covariate, req.v0, req.v1);
                Ok(EffectSummary { covariate: e.covariate, v0: e.v0, v1: e.v1, summary: ParamSummary::from_draws(name, &e.draws, level)? })
            })
            .collect::<Result<Vec<_>, EvalError>>()?;
        let mut warnings = model.warnings().to_vec();
        let criteria = dic(model, chain)?;
        if criteria.n_nonfinite > 0 {
            warnings.push(format!("{} draws with non-finite deviance", criteria.n_nonfinite));
        }
        let cpo = lpml(model, chain)?;
        if cpo.n_infinite > 0 {
            warnings.push(format!("{} rows with a zero-likelihood draw (CPO = 0)", cpo.n_infinite));
        }
        Ok(FitReport {
            model: label.into(),
            link: model.spec().family().name().to_string(),
            n_draws: chain.len(),
            level,
            params,
            dic: criteria,
            lpml: cpo.lpml,
            log_cpo: cpo.log_cpo,
            effects,
            blocks: chain.blocks().to_vec(),
            warnings,
        })
    }

    pub fn param(&self, name: &str) -> Option<&ParamSummary> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Parameter rows (region effects omitted) followed by effect rows.
    pub fn comparison_rows(&self) -> Vec<ComparisonRow> {
        self.params
            .iter()
            .filter(|p| !p.name.starts_with("w["))
            .chain(self.effects.iter().map(|e| &e.summary))
            .map(|p| ComparisonRow {
                model: self.model.clone(),
                variable: p.name.clone(),
                median: p.median,
                hpd_lo: p.hpd_lo,
                hpd_hi: p.hpd_hi,
                dic: self.dic.dic,
                lpml: self.lpml,
            })
            .collect()
    }
}

pub fn write_comparison_csv<W: std::io::Write>(writer: W, rows: &[ComparisonRow]) -> Result<(), EvalError> {
    let mut wtr = csv::Writer::from_writer(writer);
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush().map_err(|source| EvalError::Io { path: "comparison table".into(), source })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::LinkSpec;
    use crate::model::{Dataset, ModelSpec, ParamState};

    #[test]
    fn report_round_trip_and_table() {
        let data =
            Dataset::with_intercept(vec![1, 0, 1], vec![1, 1, 1], vec![vec![0.0], vec![1.0], vec![0.5]], vec!["x".into()], None).unwrap();
        let m = Model::new(ModelSpec::new(LinkSpec::logit()), data, None).unwrap();
        let draws: Vec<ParamState> = (0..20).map(|i| ParamState::new(vec![0.1 * i as f64, -0.05 * i as f64], LinkSpec::logit())).collect();
        let chain = Chain::from_draws(&m, draws);
        let req = EffectRequest { covariate: "x".into(), v0: 0.0, v1: 1.0 };
        let report = FitReport::new("logit", &m, &chain, &[req], 0.95).unwrap();
        assert_eq!(report.params.len(), 2);
        assert_eq!(report.log_cpo.len(), 3);
        let back: FitReport = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back, report);
        let rows = report.comparison_rows();
        assert_eq!(rows.len(), 3);
        let mut buf = Vec::new();
        write_comparison_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("model,variable,median,hpd_lo,hpd_hi,dic,lpml\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
