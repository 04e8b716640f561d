use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::model::Model;
use crate::sampler::Chain;

/// Average change in success probability when one covariate moves from `v0`
/// to `v1`, other covariates (and region effects) kept at their observed
/// values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateEffect {
    pub covariate: String,
    pub v0: f64,
    pub v1: f64,
    /// Posterior mean of the per-draw effects.
    pub effect: f64,
    /// `p(v1) - p(v0)` for each draw, averaged over the data rows.
    pub draws: Vec<f64>,
}

/// For each draw, sets the covariate to `v` in every row, keeps the row's own
/// remaining covariates and region effect, and averages the fitted success
/// probabilities; the effect of the draw is the difference of those averages.
pub fn covariate_effect(model: &Model, chain: &Chain, covariate: &str, v0: f64, v1: f64) -> Result<CovariateEffect, EvalError> {
    if chain.is_empty() {
        return Err(EvalError::EmptyChain);
    }
    if v0 == v1 {
        return Err(EvalError::SameValues(v0));
    }
    let data = model.data();
    let col = data.column(covariate).ok_or_else(|| EvalError::UnknownCovariate(covariate.to_string()))?;
    let rows = data.len() as f64;
    let mut draws = Vec::with_capacity(chain.len());
    for d in chain.draws() {
        model.check_state(d)?;
        let b = d.beta[col];
        let term = |v: f64| if b == 0.0 { 0.0 } else { b * v };
        let eta = model.eta(d);
        let (mut p0, mut p1) = (0.0, 0.0);
        for (i, e) in eta.into_iter().enumerate() {
            let rest = e - term(data.x(i)[col]);
            p0 += d.link.cdf(rest + term(v0));
            p1 += d.link.cdf(rest + term(v1));
        }
        draws.push(p1 / rows - p0 / rows);
    }
    let effect = draws.iter().sum::<f64>() / draws.len() as f64;
    Ok(CovariateEffect { covariate: covariate.to_string(), v0, v1, effect, draws })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::LinkSpec;
    use crate::model::{Dataset, ModelSpec, ParamState};

    fn data() -> Dataset {
        Dataset::with_intercept(
            vec![1, 0, 1, 1],
            vec![1, 1, 2, 1],
            vec![vec![0.0, 1.5], vec![1.0, -0.3], vec![1.0, 0.2], vec![0.0, 2.0]],
            vec!["a".into(), "b".into()],
            None,
        )
        .unwrap()
    }

    #[test]
    fn zero_coefficient_gives_zero_effect() {
        let link = LinkSpec::splogit(0.4).unwrap();
        let m = Model::new(ModelSpec::new(link), data(), None).unwrap();
        let draws = vec![ParamState::new(vec![0.3, 0.0, 1.0], link), ParamState::new(vec![-0.2, 0.0, 0.5], link)];
        let e = covariate_effect(&m, &Chain::from_draws(&m, draws), "a", 0.0, 1.0).unwrap();
        assert_eq!(e.effect, 0.0);
    }

    #[test]
    fn step_to_infinity_under_logit() {
        let d = Dataset::with_intercept(vec![1], vec![1], vec![vec![0.0]], vec!["x".into()], None).unwrap();
        let m = Model::new(ModelSpec::new(LinkSpec::logit()), d, None).unwrap();
        let chain = Chain::from_draws(&m, vec![ParamState::new(vec![0.0, 1.0], LinkSpec::logit())]);
        let e = covariate_effect(&m, &chain, "x", 0.0, f64::INFINITY).unwrap();
        assert_eq!(e.effect, 0.5);
    }

    #[test]
    fn reversing_values_negates_exactly() {
        let link = LinkSpec::spt(1.3, 6.0).unwrap();
        let m = Model::new(ModelSpec::new(link), data(), None).unwrap();
        let draws = vec![ParamState::new(vec![0.3, 0.8, 1.0], link), ParamState::new(vec![-0.2, 1.1, 0.5], link)];
        let chain = Chain::from_draws(&m, draws);
        let up = covariate_effect(&m, &chain, "a", 0.0, 1.0).unwrap();
        let down = covariate_effect(&m, &chain, "a", 1.0, 0.0).unwrap();
        assert_eq!(up.effect, -down.effect);
        assert!(up.effect > 0.0);
        assert!(matches!(covariate_effect(&m, &chain, "zz", 0.0, 1.0), Err(EvalError::UnknownCovariate(_))));
        assert!(matches!(covariate_effect(&m, &chain, "a", 1.0, 1.0), Err(EvalError::SameValues(_))));
    }

    #[test]
    fn row_order_does_not_matter() {
        let link = LinkSpec::logit();
        let m = Model::new(ModelSpec::new(link), data(), None).unwrap();
        let p = Model::new(ModelSpec::new(link), data().permuted(&[2, 0, 3, 1]), None).unwrap();
        let draws = vec![ParamState::new(vec![0.3, 0.8, 1.0], link)];
        let a = covariate_effect(&m, &Chain::from_draws(&m, draws.clone()), "b", -1.0, 1.0).unwrap();
        let b = covariate_effect(&p, &Chain::from_draws(&p, draws), "b", -1.0, 1.0).unwrap();
        assert!((a.effect - b.effect).abs() < 1e-15);
    }
}
