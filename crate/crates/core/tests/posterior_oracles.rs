//! MCMC output checked against deterministic grid quadrature of the same
//! posterior.

use splink::evaluation::{dic, effective_sample_size, lpml};
use splink::link::LinkSpec;
use splink::model::{BetaPrior, Dataset, Model, ModelSpec, ParamState};
use splink::sampler::{run_chain, ChainConfig};
use splink::ShapeParam;

fn toy() -> Dataset {
    Dataset::with_intercept(
        vec![0, 0, 1, 0, 1, 1],
        vec![1; 6],
        [-1.0, -0.5, -0.2, 0.3, 0.5, 1.0].iter().map(|&x| vec![x]).collect(),
        vec!["x".into()],
        None,
    )
    .unwrap()
}

/// Normalised posterior weights on a regular grid.
struct Grid {
    points: Vec<ParamState>,
    weights: Vec<f64>,
}

fn grid_2d(model: &Model, link: LinkSpec, lo: [f64; 2], hi: [f64; 2], m: usize) -> Grid {
    let mut points = Vec::with_capacity(m * m);
    let mut logp = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let b0 = lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.5) / m as f64;
            let b1 = lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.5) / m as f64;
            let s = ParamState::new(vec![b0, b1], link);
            logp.push(model.log_posterior(&s).unwrap());
            points.push(s);
        }
    }
    let max = logp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logp.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    let edge: f64 = (0..m * m).filter(|k| k / m == 0 || k / m == m - 1 || k % m == 0 || k % m == m - 1).map(|k| w[k] / total).sum();
    assert!(edge < 1e-9, "grid truncates the posterior (edge mass {edge})");
    Grid { points, weights: w.iter().map(|v| v / total).collect() }
}

impl Grid {
    fn mean(&self, f: impl Fn(&ParamState) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(s, w)| w * f(s)).sum()
    }
}

fn mc_se(draws: &[f64]) -> f64 {
    let n = draws.len() as f64;
    let m = draws.iter().sum::<f64>() / n;
    let var = draws.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (n - 1.0);
    (var / effective_sample_size(draws)).sqrt()
}

fn config(seed: u64, n_samples: usize) -> ChainConfig {
    ChainConfig { n_burnin: 2000, n_samples, seed, ..ChainConfig::default() }
}

#[test]
fn intercept_only_logit_matches_one_dimensional_quadrature() {
    let data = Dataset::with_intercept(vec![3], vec![10], vec![vec![]], vec![], None).unwrap();
    let spec = ModelSpec::new(LinkSpec::logit()).with_beta_prior(BetaPrior::Normal { variance: 100.0 });
    let model = Model::new(spec, data, None).unwrap();
    // oracle: 200k-point grid on [-15, 15]
    let m = 200_000;
    let (mut z, mut s1) = (0.0, 0.0);
    for i in 0..m {
        let b = -15.0 + 30.0 * (i as f64 + 0.5) / m as f64;
        let w = model.log_posterior(&ParamState::new(vec![b], LinkSpec::logit())).unwrap().exp();
        z += w;
        s1 += w * b;
    }
    let exact = s1 / z;
    let chain = run_chain(&model, &config(11, 20_000)).unwrap();
    let draws = chain.column("beta[(Intercept)]").unwrap();
    let est = draws.iter().sum::<f64>() / draws.len() as f64;
    let se = mc_se(&draws);
    assert!((est - exact).abs() < 3.0 * se, "mcmc {est} vs quadrature {exact} (se {se})");
}

#[test]
fn fixed_r_coefficients_match_two_dimensional_quadrature() {
    let link = LinkSpec::splogit(0.5).unwrap();
    let spec = ModelSpec::new(link).fix(ShapeParam::R).with_beta_prior(BetaPrior::Normal { variance: 10.0 });
    let model = Model::new(spec, toy(), None).unwrap();
    let grid = grid_2d(&model, link, [-14.0, -14.0], [14.0, 20.0], 500);
    let exact = [grid.mean(|s| s.beta[0]), grid.mean(|s| s.beta[1])];
    let chain = run_chain(&model, &config(5, 20_000)).unwrap();
    for (j, name) in ["beta[(Intercept)]", "beta[x]"].iter().enumerate() {
        let draws = chain.column(name).unwrap();
        let est = draws.iter().sum::<f64>() / draws.len() as f64;
        let se = mc_se(&draws);
        assert!((est - exact[j]).abs() < 3.0 * se, "{name}: mcmc {est} vs quadrature {} (se {se})", exact[j]);
    }
}

#[test]
fn lpml_and_dbar_match_quadrature() {
    let link = LinkSpec::logit();
    let spec = ModelSpec::new(link).with_beta_prior(BetaPrior::Normal { variance: 10.0 });
    let model = Model::new(spec, toy(), None).unwrap();
    let grid = grid_2d(&model, link, [-14.0, -14.0], [14.0, 20.0], 500);
    let data = model.data();
    let exact_lpml: f64 = (0..data.len())
        .map(|i| {
            // CPO_i = 1 / E[1 / p(y_i | theta)]
            let inv_cpo = grid.mean(|s| (-model.row_log_likelihoods(s)[i]).exp());
            -inv_cpo.ln()
        })
        .sum();
    let exact_dbar = grid.mean(|s| -2.0 * model.log_likelihood(s).unwrap());

    let chain = run_chain(&model, &config(9, 40_000)).unwrap();
    let l = lpml(&model, &chain).unwrap();
    assert!((l.lpml - exact_lpml).abs() < 0.05, "lpml {} vs quadrature {exact_lpml}", l.lpml);
    let devs: Vec<f64> = chain.draws().iter().map(|s| -2.0 * model.log_likelihood(s).unwrap()).collect();
    let d = dic(&model, &chain).unwrap();
    let se = mc_se(&devs);
    assert!((d.dbar - exact_dbar).abs() < 3.0 * se, "dbar {} vs quadrature {exact_dbar} (se {se})", d.dbar);
}
