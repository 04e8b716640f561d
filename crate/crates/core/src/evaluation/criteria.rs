use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::model::{Model, ParamState};
use crate::sampler::{Chain, Scale};
use crate::special::log_sum_exp;

/// Deviance information criterion; `dic = dbar + pd` and
/// `pd = dbar - deviance(plug-in state)`. The variance-based alternative
/// `dic_pv = dbar + pv` with `pv = var(deviance) / 2` is reported alongside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dic {
    pub dic: f64,
    pub dbar: f64,
    pub pd: f64,
    pub d_at_mean: f64,
    pub pv: f64,
    pub dic_pv: f64,
    /// Draws whose deviance was not finite (they make `dbar` infinite).
    pub n_nonfinite: usize,
}

/// Which penalty a DIC comparison uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DicConvention {
    /// `dbar + (dbar - deviance(plug-in state))`.
    #[default]
    PlugIn,
    /// `dbar + var(deviance) / 2`.
    Variance,
}

impl DicConvention {
    pub fn value(self, d: &Dic) -> f64 {
        match self {
            DicConvention::PlugIn => d.dic,
            DicConvention::Variance => d.dic_pv,
        }
    }
}

/// Log pseudo-marginal likelihood with the per-row conditional predictive
/// ordinates on the log scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lpml {
    pub lpml: f64,
    pub log_cpo: Vec<f64>,
    /// Rows with a zero-likelihood draw (their CPO is 0).
    pub n_infinite: usize,
}

/// `-2 * log-likelihood` of a state.
pub fn deviance(model: &Model, state: &ParamState) -> Result<f64, EvalError> {
    Ok(-2.0 * model.log_likelihood(state)?)
}

/// Posterior mean state used as the DIC plug-in: coefficients and region
/// effects averaged directly, each sampled shape parameter averaged on the
/// scale it was sampled on (log for positive parameters, logit for bounded
/// ones), and `tau2` averaged on the log scale.
pub fn plug_in_state(model: &Model, chain: &Chain) -> Result<ParamState, EvalError> {
    let draws = chain.draws();
    let first = draws.first().ok_or(EvalError::EmptyChain)?;
    let s = draws.len() as f64;
    let mut state = first.clone();
    for j in 0..state.beta.len() {
        state.beta[j] = draws.iter().map(|d| d.beta[j]).sum::<f64>() / s;
    }
    for (&param, prior) in model.spec().shape_priors() {
        let scale = Scale::for_prior(prior);
        let mean = draws.iter().map(|d| scale.to_unconstrained(d.link.param(param).expect("own parameter"))).sum::<f64>() / s;
        state.link = state.link.with_param(param, scale.from_unconstrained(mean)).map_err(crate::model::ModelError::from)?;
    }
    if model.is_spatial() {
        for k in 0..state.w.len() {
            state.w[k] = draws.iter().map(|d| d.w[k]).sum::<f64>() / s;
        }
        state.tau2 = (draws.iter().map(|d| d.tau2.ln()).sum::<f64>() / s).exp();
    }
    Ok(state)
}

pub fn dic(model: &Model, chain: &Chain) -> Result<Dic, EvalError> {
    if chain.is_empty() {
        return Err(EvalError::EmptyChain);
    }
    let devs = chain.draws().iter().map(|d| deviance(model, d)).collect::<Result<Vec<f64>, _>>()?;
    let n_nonfinite = devs.iter().filter(|d| !d.is_finite()).count();
    let s = devs.len() as f64;
    let dbar = devs.iter().sum::<f64>() / s;
    let pv = if devs.len() > 1 { devs.iter().map(|d| (d - dbar).powi(2)).sum::<f64>() / (s - 1.0) / 2.0 } else { 0.0 };
    let d_at_mean = deviance(model, &plug_in_state(model, chain)?)?;
    let pd = dbar - d_at_mean;
    Ok(Dic { dic: dbar + pd, dbar, pd, d_at_mean, pv, dic_pv: dbar + pv, n_nonfinite })
}

/// `CPO_i` is the harmonic mean over draws of row `i`'s likelihood, computed
/// as `-(logsumexp_s(-ll_is) - ln S)`.
pub fn lpml(model: &Model, chain: &Chain) -> Result<Lpml, EvalError> {
    if chain.is_empty() {
        return Err(EvalError::EmptyChain);
    }
    let rows = model.data().len();
    let mut neg_ll: Vec<Vec<f64>> = vec![Vec::with_capacity(chain.len()); rows];
    for d in chain.draws() {
        model.check_state(d)?;
        for (i, ll) in model.row_log_likelihoods(d).into_iter().enumerate() {
            neg_ll[i].push(-ll);
        }
    }
    let ln_s = (chain.len() as f64).ln();
    let log_cpo: Vec<f64> = neg_ll.iter().map(|v| ln_s - log_sum_exp(v)).collect();
    let n_infinite = log_cpo.iter().filter(|v| **v == f64::NEG_INFINITY).count();
    Ok(Lpml { lpml: log_cpo.iter().sum(), log_cpo, n_infinite })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::LinkSpec;
    use crate::model::{Dataset, ModelSpec};
    use approx::assert_relative_eq;

    fn bernoulli_row() -> Model {
        let data = Dataset::with_intercept(vec![1], vec![1], vec![vec![]], vec![], None).unwrap();
        Model::new(ModelSpec::new(LinkSpec::logit()), data, None).unwrap()
    }

    #[test]
    fn two_identical_draws() {
        let m = bernoulli_row();
        let s = ParamState::new(vec![0.0], LinkSpec::logit());
        let chain = Chain::from_draws(&m, vec![s.clone(), s]);
        let d = dic(&m, &chain).unwrap();
        assert_relative_eq!(d.dbar, -2.0 * 0.5f64.ln(), epsilon = 1e-14);
        assert_eq!(d.pd, 0.0);
        assert_eq!(d.dic, d.dbar);
        assert_eq!((d.pv, d.dic_pv), (0.0, d.dbar));
        let l = lpml(&m, &chain).unwrap();
        assert_relative_eq!(l.lpml, 0.5f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn single_draw_cpo_is_the_row_likelihood() {
        let data =
            Dataset::with_intercept(vec![1, 0, 2], vec![1, 1, 3], vec![vec![0.3], vec![-1.0], vec![2.0]], vec!["x".into()], None).unwrap();
        let link = LinkSpec::splogit(0.6).unwrap();
        let m = Model::new(ModelSpec::new(link), data, None).unwrap();
        let s = ParamState::new(vec![0.2, 0.7], link);
        let l = lpml(&m, &Chain::from_draws(&m, vec![s.clone()])).unwrap();
        for (a, b) in l.log_cpo.iter().zip(m.row_log_likelihoods(&s)) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn duplicated_rows_have_equal_cpo_and_bound_holds() {
        let data =
            Dataset::with_intercept(vec![1, 1, 0], vec![1, 1, 1], vec![vec![0.5], vec![0.5], vec![-0.4]], vec!["x".into()], None).unwrap();
        let m = Model::new(ModelSpec::new(LinkSpec::logit()), data, None).unwrap();
        let draws: Vec<ParamState> =
            [(0.1, 1.0), (-0.3, 2.0), (0.4, 0.2)].iter().map(|&(a, b)| ParamState::new(vec![a, b], LinkSpec::logit())).collect();
        let chain = Chain::from_draws(&m, draws.clone());
        let l = lpml(&m, &chain).unwrap();
        assert_eq!(l.log_cpo[0], l.log_cpo[1]);
        for i in 0..3 {
            let max = draws.iter().map(|d| m.row_log_likelihoods(d)[i]).fold(f64::NEG_INFINITY, f64::max);
            assert!(l.log_cpo[i] <= max);
        }
    }

    #[test]
    fn plug_in_averages_positive_parameters_on_log_scale() {
        let data = Dataset::with_intercept(vec![1], vec![1], vec![vec![]], vec![], None).unwrap();
        let m = Model::new(ModelSpec::new(LinkSpec::splogit(1.0).unwrap()), data, None).unwrap();
        let draws =
            vec![ParamState::new(vec![1.0], LinkSpec::splogit(0.5).unwrap()), ParamState::new(vec![3.0], LinkSpec::splogit(2.0).unwrap())];
        let s = plug_in_state(&m, &Chain::from_draws(&m, draws)).unwrap();
        assert_eq!(s.beta, vec![2.0]);
        assert_relative_eq!(s.link.param(crate::link::ShapeParam::R).unwrap(), 1.0, epsilon = 1e-15);
    }
}
