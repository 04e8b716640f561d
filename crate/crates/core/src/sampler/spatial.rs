use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::model::{icar_exponent, row_log_likelihood, Model, ParamState, Tau2Prior};

/// Mean and variance of the ICAR full conditional of node `k`:
/// `N(mean of neighbours, tau2 / m_k)`. `None` for a node without neighbours.
pub fn icar_conditional(model: &Model, w: &[f64], k: usize, tau2: f64) -> Option<(f64, f64)> {
    let graph = model.graph()?;
    let nb = graph.neighbors(k);
    if nb.is_empty() {
        return None;
    }
    let m = nb.len() as f64;
    Some((nb.iter().map(|&j| w[j]).sum::<f64>() / m, tau2 / m))
}

/// Exact draw from the ICAR full conditional of node `k` (no likelihood).
pub fn icar_conditional_draw<R: Rng + ?Sized>(model: &Model, w: &[f64], k: usize, tau2: f64, rng: &mut R) -> f64 {
    match icar_conditional(model, w, k, tau2) {
        Some((mean, var)) => {
            let z: f64 = rng.sample(StandardNormal);
            mean + var.sqrt() * z
        }
        None => 0.0,
    }
}

/// One sweep over the region effects followed by re-centring.
///
/// Regions with data get a random-walk Metropolis step of size `scales[k]`
/// against likelihood times ICAR conditional; regions without data get an
/// exact conditional draw; regions without neighbours stay at 0. `eta` and
/// `row_ll` must hold the current linear predictors and row log-likelihoods
/// and are kept in sync. Returns the Metropolis acceptance probability and
/// outcome of each node (`None` where no Metropolis step was made).
pub fn update_spatial<R: Rng + ?Sized>(
    model: &Model,
    state: &mut ParamState,
    eta: &mut [f64],
    row_ll: &mut [f64],
    scales: &[f64],
    rng: &mut R,
) -> Vec<Option<(f64, bool)>> {
    let (y, n) = (model.data().y(), model.data().n());
    let link = state.link;
    let mut out = vec![None; model.n_regions()];
    for k in 0..model.n_regions() {
        let Some((mean, var)) = icar_conditional(model, &state.w, k, state.tau2) else {
            state.w[k] = 0.0;
            continue;
        };
        let rows = model.region_rows(k);
        if rows.is_empty() {
            let z: f64 = rng.sample(StandardNormal);
            state.w[k] = mean + var.sqrt() * z;
            continue;
        }
        let z: f64 = rng.sample(StandardNormal);
        let delta = scales[k] * z;
        let old = state.w[k];
        let new = old + delta;
        let mut proposed = Vec::with_capacity(rows.len());
        let mut log_ratio = ((old - mean).powi(2) - (new - mean).powi(2)) / (2.0 * var);
        for &i in rows {
            let (lc, ls) = link.log_cdf_sf(eta[i] + delta);
            let ll = row_log_likelihood(y[i], n[i], lc, ls);
            log_ratio += ll - row_ll[i];
            proposed.push(ll);
        }
        let prob = if log_ratio.is_nan() { 0.0 } else { log_ratio.min(0.0).exp() };
        let u: f64 = rng.random();
        let accepted = u < prob;
        if accepted {
            state.w[k] = new;
            for (&i, ll) in rows.iter().zip(proposed) {
                eta[i] += delta;
                row_ll[i] = ll;
            }
        }
        out[k] = Some((prob, accepted));
    }
    let before = state.w.clone();
    let intercept_before = model.intercept().map(|j| state.beta[j]);
    model.center_spatial(state);
    if model.n_components() > 1 {
        let shift = match (model.intercept(), intercept_before) {
            (Some(j), Some(b)) => state.beta[j] - b,
            _ => 0.0,
        };
        for (i, &k) in model.row_region().iter().enumerate() {
            let d = state.w[k] - before[k] + shift;
            if d != 0.0 {
                eta[i] += d;
                let (lc, ls) = link.log_cdf_sf(eta[i]);
                row_ll[i] = row_log_likelihood(y[i], n[i], lc, ls);
            }
        }
    }
    out
}

/// Conjugate inverse-gamma draw of `tau2`:
/// `IG(shape + (K - c)/2, rate + Q/2)` with `Q` the sum of squared neighbour
/// differences over unordered pairs.
pub fn update_tau2<R: Rng + ?Sized>(model: &Model, w: &[f64], prior: &Tau2Prior, rng: &mut R) -> f64 {
    let (shape, rate) = tau2_posterior(model, w, prior);
    let g = Gamma::new(shape, 1.0 / rate).expect("positive inverse-gamma parameters");
    1.0 / g.sample(rng)
}

/// Shape and rate of the `tau2` full conditional.
pub fn tau2_posterior(model: &Model, w: &[f64], prior: &Tau2Prior) -> (f64, f64) {
    let graph = model.graph().expect("spatial model");
    let rank = (graph.len() - model.n_components()) as f64;
    (prior.shape + 0.5 * rank, prior.rate - icar_exponent(graph, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::LinkSpec;
    use crate::model::{AdjacencyGraph, Dataset, ModelSpec, SpatialSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn path_model() -> Model {
        let data =
            Dataset::with_intercept(vec![1, 0], vec![1, 2], vec![vec![], vec![]], vec![], Some(vec!["A".into(), "C".into()])).unwrap();
        let spec = ModelSpec::new(LinkSpec::logit()).with_spatial(SpatialSpec::default());
        Model::new(spec, data, Some(AdjacencyGraph::parse("A B\nB C\n").unwrap())).unwrap()
    }

    #[test]
    fn prior_only_conditional_passes_ks() {
        let m = path_model();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let mut draws: Vec<f64> = (0..n).map(|_| icar_conditional_draw(&m, &[0.0, 0.0, 0.0], 1, 1.0, &mut rng)).collect();
        draws.sort_by(f64::total_cmp);
        let normal = Normal::new(0.0, 0.5f64.sqrt()).unwrap();
        let d = draws
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = normal.cdf(x);
                (f - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - f)
            })
            .fold(0.0, f64::max);
        // critical value at alpha = 0.01
        assert!(d < 1.628 / (n as f64).sqrt(), "KS statistic {d}");
    }

    #[test]
    fn sweep_keeps_zero_sum_and_caches() {
        let m = path_model();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut state = m.default_state();
        let mut eta = m.eta(&state);
        let mut row_ll = m.row_log_likelihoods(&state);
        for _ in 0..200 {
            let out = update_spatial(&m, &mut state, &mut eta, &mut row_ll, &[0.8; 3], &mut rng);
            assert!(out[1].is_none() && out[0].is_some());
            assert!(state.w.iter().sum::<f64>().abs() <= 1e-12);
            for (a, b) in eta.iter().zip(m.eta(&state)) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn tau2_conditional_parameters() {
        let m = path_model();
        let prior = Tau2Prior::default();
        assert_eq!(tau2_posterior(&m, &[0.0; 3], &prior), (prior.shape + 1.0, prior.rate));
        assert_eq!(tau2_posterior(&m, &[1.0, 0.0, -1.0], &prior), (prior.shape + 1.0, prior.rate + 1.0));
    }

    #[test]
    fn tau2_draws_match_inverse_gamma_mean() {
        let m = path_model();
        let prior = Tau2Prior { shape: 3.0, rate: 2.0 };
        let w = [1.0, 0.0, -1.0];
        let (a, b) = tau2_posterior(&m, &w, &prior);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 200_000;
        let draws: Vec<f64> = (0..n).map(|_| update_tau2(&m, &w, &prior, &mut rng)).collect();
        assert!(draws.iter().all(|&t| t > 0.0));
        let mean = draws.iter().sum::<f64>() / n as f64;
        let expected = b / (a - 1.0);
        let sd = (b * b / ((a - 1.0).powi(2) * (a - 2.0))).sqrt();
        assert!((mean - expected).abs() < 3.0 * sd / (n as f64).sqrt(), "{mean} vs {expected}");
    }

    #[test]
    fn singleton_graph_effect_stays_zero() {
        let data =
            Dataset::with_intercept(vec![1, 0], vec![1, 1], vec![vec![], vec![]], vec![], Some(vec!["A".into(), "A".into()])).unwrap();
        let spec = ModelSpec::new(LinkSpec::logit()).with_spatial(SpatialSpec::default());
        let g = AdjacencyGraph::from_edges::<&str>(&[]).unwrap().with_nodes(&["A"]);
        let m = Model::new(spec, data, Some(g)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut state = m.default_state();
        let (mut eta, mut ll) = (m.eta(&state), m.row_log_likelihoods(&state));
        for _ in 0..20 {
            update_spatial(&m, &mut state, &mut eta, &mut ll, &[1.0], &mut rng);
            assert_eq!(state.w, vec![0.0]);
        }
    }
}
