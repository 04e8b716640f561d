use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{derive_seed, SimError};
use crate::evaluation::EffectRequest;
use crate::link::LinkSpec;
use crate::model::{Dataset, ModelSpec};
use rand::SeedableRng;

/// How covariates are drawn for each replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CovariateScheme {
    /// `x1` is 0 or 1 with equal probability and `x2 ~ N(0, x2_sd^2)`.
    BinaryNormal { x2_sd: f64 },
    /// A single standard-normal covariate `x`.
    StandardNormal,
}

impl CovariateScheme {
    pub fn names(&self) -> Vec<String> {
        match self {
            CovariateScheme::BinaryNormal { .. } => vec!["x1".into(), "x2".into()],
            CovariateScheme::StandardNormal => vec!["x".into()],
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match *self {
            CovariateScheme::BinaryNormal { x2_sd } => {
                let x1 = if rng.random::<bool>() { 1.0 } else { 0.0 };
                let x2 = Normal::new(0.0, x2_sd).expect("valid sd").sample(rng);
                vec![x1, x2]
            }
            CovariateScheme::StandardNormal => vec![Normal::new(0.0, 1.0).expect("unit normal").sample(rng)],
        }
    }
}

/// True coefficients (intercept first): fixed, or drawn per replicate from
/// independent normals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BetaScheme {
    Fixed(Vec<f64>),
    Normal { mean: Vec<f64>, sd: f64 },
}

impl BetaScheme {
    fn len(&self) -> usize {
        match self {
            BetaScheme::Fixed(b) => b.len(),
            BetaScheme::Normal { mean, .. } => mean.len(),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            BetaScheme::Fixed(b) => b.clone(),
            BetaScheme::Normal { mean, sd } => mean.iter().map(|&m| Normal::new(m, *sd).expect("valid sd").sample(rng)).collect(),
        }
    }
}

/// A model fitted to every replicate of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FittedModel {
    pub label: String,
    pub spec: ModelSpec,
}

/// Data-generating truth, replicate count and the models fitted to each
/// replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub truth: LinkSpec,
    pub n: usize,
    pub covariates: CovariateScheme,
    pub beta: BetaScheme,
    pub replicates: usize,
    pub models: Vec<FittedModel>,
    pub seed: u64,
    #[serde(default)]
    pub effects: Vec<EffectRequest>,
}

/// Coefficients and data of one replicate.
#[derive(Debug, Clone)]
pub struct Replicate {
    pub beta: Vec<f64>,
    pub data: Dataset,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Invalid(format!("scenario '{}': {m}", self.name)));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if self.models.is_empty() {
            return bad("no fitted models".into());
        }
        let k = self.covariates.names().len() + 1;
        if self.beta.len() != k {
            return bad(format!("{} true coefficients for {k} design columns", self.beta.len()));
        }
        match self.covariates {
            CovariateScheme::BinaryNormal { x2_sd } if !(x2_sd > 0.0 && x2_sd.is_finite()) => return bad(format!("x2_sd {x2_sd}")),
            _ => {}
        }
        if let BetaScheme::Normal { sd, .. } = self.beta {
            if !(sd >= 0.0 && sd.is_finite()) {
                return bad(format!("beta sd {sd}"));
            }
        }
        let mut labels: Vec<&str> = self.models.iter().map(|m| m.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return bad("duplicate model labels".into());
        }
        let names = self.covariates.names();
        if let Some(e) = self.effects.iter().find(|e| !names.contains(&e.covariate)) {
            return bad(format!("effect on unknown covariate '{}'", e.covariate));
        }
        Ok(())
    }

    /// Seed of the data of replicate `index`.
    pub fn data_seed(&self, index: usize) -> u64 {
        derive_seed(self.seed, 2 * index as u64)
    }

    /// Chain seed of model `model` on replicate `index`.
    pub fn fit_seed(&self, index: usize, model: usize) -> u64 {
        derive_seed(derive_seed(self.seed, 2 * index as u64 + 1), model as u64)
    }

    /// Draws replicate `index`: fresh covariates (and coefficients when
    /// random), then `y_i ~ Bernoulli(F(x_i' beta))` under the true link.
    pub fn generate(&self, index: usize) -> Result<Replicate, SimError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.data_seed(index));
        let beta = self.beta.draw(&mut rng);
        let mut x = Vec::with_capacity(self.n);
        let mut y = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let row = self.covariates.draw(&mut rng);
            let eta = beta[0] + row.iter().zip(&beta[1..]).map(|(a, b)| a * b).sum::<f64>();
            let p = self.truth.cdf(eta).clamp(0.0, 1.0);
            let success = Bernoulli::new(p).expect("probability in [0, 1]").sample(&mut rng);
            y.push(success as u32);
            x.push(row);
        }
        let data = Dataset::with_intercept(y, vec![1; self.n], x, self.covariates.names(), None)?;
        Ok(Replicate { beta, data })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(truth: LinkSpec, beta: Vec<f64>) -> ScenarioSpec {
        ScenarioSpec {
            name: "t".into(),
            truth,
            n: 4000,
            covariates: CovariateScheme::BinaryNormal { x2_sd: 3.0 },
            beta: BetaScheme::Fixed(beta),
            replicates: 1,
            models: vec![FittedModel { label: "logit".into(), spec: ModelSpec::new(LinkSpec::logit()) }],
            seed: 17,
            effects: vec![],
        }
    }

    fn success_rate(d: &Dataset) -> f64 {
        d.y().iter().sum::<u32>() as f64 / d.len() as f64
    }

    #[test]
    fn zero_coefficients_give_baseline_rate() {
        for (truth, p) in [(LinkSpec::logit(), 0.5), (LinkSpec::cloglog(), 1.0 - (-1.0f64).exp())] {
            let s = scenario(truth, vec![0.0; 3]);
            let rate = success_rate(&s.generate(0).unwrap().data);
            let se = (p * (1.0 - p) / 4000.0).sqrt();
            assert!((rate - p).abs() < 3.0 * se, "{truth}: {rate} vs {p}");
        }
    }

    #[test]
    fn generation_is_reproducible_and_replicates_differ() {
        let s = scenario(LinkSpec::cloglog(), vec![0.0, 1.0, 1.0]);
        let a = s.generate(3).unwrap().data;
        let b = s.generate(3).unwrap().data;
        let c = s.generate(4).unwrap().data;
        assert_eq!(a.y(), b.y());
        assert_eq!(a.design(), b.design());
        assert_ne!(a.design(), c.design());
        // cloglog truth with x1, x2 as above is skewed towards successes
        assert!(success_rate(&a) > 0.5);
        assert!(a.x(0)[1] == 0.0 || a.x(0)[1] == 1.0);
    }

    #[test]
    fn random_coefficients_are_drawn_per_replicate() {
        let mut s = scenario(LinkSpec::logit(), vec![1.0, 1.0]);
        s.covariates = CovariateScheme::StandardNormal;
        s.beta = BetaScheme::Normal { mean: vec![1.0, 1.0], sd: 0.1 };
        s.validate().unwrap();
        let (a, b) = (s.generate(0).unwrap(), s.generate(1).unwrap());
        assert_ne!(a.beta, b.beta);
        assert!(a.beta.iter().all(|v| (v - 1.0).abs() < 0.6));
        assert_eq!(a.data.names(), &["(Intercept)", "x"]);
    }

    #[test]
    fn validation_catches_mismatches() {
        let mut s = scenario(LinkSpec::logit(), vec![0.0, 1.0]);
        assert!(s.validate().is_err());
        s.beta = BetaScheme::Fixed(vec![0.0; 3]);
        s.validate().unwrap();
        s.effects = vec![EffectRequest { covariate: "z".into(), v0: 0.0, v1: 1.0 }];
        assert!(s.validate().is_err());
    }
}
