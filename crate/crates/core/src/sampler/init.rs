use nalgebra::{DMatrix, DVector};

use crate::link::LinkSpec;
use crate::model::Model;

/// Penalised maximum-likelihood fit by Fisher scoring.
#[derive(Debug, Clone)]
pub struct IrlsFit {
    pub beta: Vec<f64>,
    /// Inverse of the penalised Fisher information at `beta`.
    pub covariance: DMatrix<f64>,
    pub converged: bool,
}

/// Fisher scoring for the coefficients under a fixed link, with the normal
/// prior precision as a ridge. Step-halving keeps the penalised log-likelihood
/// from decreasing, which matters for the non-canonical links.
pub fn irls(model: &Model, link: &LinkSpec, offset: &[f64]) -> IrlsFit {
    let data = model.data();
    let k = data.n_covariates();
    let nrow = data.len();
    let x = DMatrix::from_row_slice(nrow, k, data.design());
    let ridge = model.spec().beta_prior().precision().max(1e-8);
    let objective = |beta: &DVector<f64>| {
        let eta: Vec<f64> = (&x * beta).iter().zip(offset).map(|(e, o)| e + o).collect();
        model.log_likelihood_at(link, &eta) - 0.5 * ridge * beta.norm_squared()
    };

    let mut beta = DVector::zeros(k);
    let mut current = objective(&beta);
    let mut converged = false;
    let mut info = fisher_information(model, link, &x, &beta, offset, ridge);
    for _ in 0..100 {
        let Some((step, new_info)) = scoring_step(model, link, &x, &beta, offset, ridge) else { break };
        info = new_info;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = &beta + &step * t;
            let value = objective(&cand);
            if value.is_finite() && value >= current - 1e-12 {
                let change = (&cand - &beta).amax();
                beta = cand;
                current = value;
                accepted = true;
                converged = change < 1e-9;
                break;
            }
            t *= 0.5;
        }
        if !accepted || converged {
            break;
        }
    }
    if !current.is_finite() {
        beta = DVector::zeros(k);
        info = fisher_information(model, link, &x, &beta, offset, ridge);
    }
    let covariance = info
        .and_then(|m| m.try_inverse())
        .filter(|c| c.iter().all(|v| v.is_finite()) && (0..k).all(|i| c[(i, i)] > 0.0))
        .unwrap_or_else(|| fallback_covariance(&x, model, ridge));
    IrlsFit { beta: beta.iter().copied().collect(), covariance, converged }
}

fn weights(model: &Model, link: &LinkSpec, eta: f64, i: usize) -> (f64, f64) {
    let (y, n) = (model.data().y()[i] as f64, model.data().n()[i] as f64);
    let mu = link.cdf(eta).clamp(1e-12, 1.0 - 1e-12);
    let f = link.pdf(eta).max(1e-300);
    let w = n * f * f / (mu * (1.0 - mu));
    // score contribution d ll / d eta
    let score = (y - n * mu) * f / (mu * (1.0 - mu));
    (w, score)
}

fn fisher_information(
    model: &Model,
    link: &LinkSpec,
    x: &DMatrix<f64>,
    beta: &DVector<f64>,
    offset: &[f64],
    ridge: f64,
) -> Option<DMatrix<f64>> {
    let eta = x * beta;
    let k = x.ncols();
    let mut info = DMatrix::from_diagonal_element(k, k, ridge);
    for i in 0..x.nrows() {
        let (w, _) = weights(model, link, eta[i] + offset[i], i);
        if !w.is_finite() {
            return None;
        }
        let row = x.row(i);
        info += row.transpose() * row * w;
    }
    Some(info)
}

fn scoring_step(
    model: &Model,
    link: &LinkSpec,
    x: &DMatrix<f64>,
    beta: &DVector<f64>,
    offset: &[f64],
    ridge: f64,
) -> Option<(DVector<f64>, Option<DMatrix<f64>>)> {
    let eta = x * beta;
    let k = x.ncols();
    let mut info = DMatrix::from_diagonal_element(k, k, ridge);
    let mut grad = -beta * ridge;
    for i in 0..x.nrows() {
        let (w, s) = weights(model, link, eta[i] + offset[i], i);
        if !(w.is_finite() && s.is_finite()) {
            return None;
        }
        let row = x.row(i);
        info += row.transpose() * row * w;
        grad += row.transpose() * s;
    }
    let step = info.clone().cholesky()?.solve(&grad);
    Some((step, Some(info)))
}

/// Logistic information at zero: `X' diag(n/4) X` plus the ridge.
fn fallback_covariance(x: &DMatrix<f64>, model: &Model, ridge: f64) -> DMatrix<f64> {
    let k = x.ncols();
    let mut info = DMatrix::from_diagonal_element(k, k, ridge + 1e-6);
    for i in 0..x.nrows() {
        let row = x.row(i);
        info += row.transpose() * row * (model.data().n()[i] as f64 / 4.0);
    }
    info.try_inverse().unwrap_or_else(|| DMatrix::identity(k, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dataset, ModelSpec};

    #[test]
    fn logistic_fit_matches_closed_form() {
        // two groups: p = 3/10 at x = 0 and 7/10 at x = 1
        let data = Dataset::with_intercept(vec![3, 7], vec![10, 10], vec![vec![0.0], vec![1.0]], vec!["x".into()], None).unwrap();
        let spec = ModelSpec::new(LinkSpec::logit()).with_beta_prior(crate::model::BetaPrior::Flat);
        let model = Model::new(spec, data, None).unwrap();
        let fit = irls(&model, &LinkSpec::logit(), &[0.0, 0.0]);
        assert!(fit.converged);
        let b0 = (3.0f64 / 7.0).ln();
        assert!((fit.beta[0] - b0).abs() < 1e-6);
        assert!((fit.beta[1] + 2.0 * b0).abs() < 1e-6);
        // var(b0) = 1/(n p (1-p)) = 1/2.1
        assert!((fit.covariance[(0, 0)] - 1.0 / 2.1).abs() < 1e-5);
    }
}
