use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::chain::BlockStats;

/// Burn-in iterations (100, 200, 400, ...) at which the proposal covariance is
/// re-estimated from the second half of the history seen so far.
fn is_covariance_checkpoint(t: usize) -> bool {
    t % 100 == 0 && (t / 100).is_power_of_two()
}

/// Gaussian random-walk Metropolis kernel with Robbins–Monro scale adaptation
/// and, optionally, covariance adaptation during burn-in.
#[derive(Debug, Clone)]
pub struct AdaptiveRandomWalk {
    chol: DMatrix<f64>,
    log_scale: f64,
    target: f64,
    adapt_covariance: bool,
    history: Vec<Vec<f64>>,
    frozen: bool,
    pub stats: BlockStats,
}

impl AdaptiveRandomWalk {
    /// `covariance` shapes the proposal and `scale` multiplies its Cholesky
    /// factor; a covariance that is not positive definite falls back to its
    /// diagonal.
    pub fn new(name: impl Into<String>, covariance: DMatrix<f64>, scale: f64, target: f64, adapt_covariance: bool) -> Self {
        let chol = cholesky_or_diagonal(covariance);
        AdaptiveRandomWalk {
            chol,
            log_scale: scale.ln(),
            target,
            adapt_covariance,
            history: Vec::new(),
            frozen: false,
            stats: BlockStats::new(name, scale),
        }
    }

    pub fn scalar(name: impl Into<String>, scale: f64, target: f64) -> Self {
        Self::new(name, DMatrix::identity(1, 1), scale, target, false)
    }

    pub fn dim(&self) -> usize {
        self.chol.nrows()
    }

    pub fn scale(&self) -> f64 {
        self.log_scale.exp()
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        &self.chol * self.chol.transpose()
    }

    pub fn propose<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Vec<f64> {
        let z = DVector::from_iterator(self.dim(), (0..self.dim()).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let step = &self.chol * z * self.scale();
        x.iter().zip(step.iter()).map(|(a, b)| a + b).collect()
    }

    /// Metropolis decision for a proposal with log target ratio `log_ratio`.
    /// Returns the acceptance probability and the outcome.
    pub fn accept<R: Rng + ?Sized>(&mut self, log_ratio: f64, rng: &mut R) -> (f64, bool) {
        let prob = if log_ratio.is_nan() { 0.0 } else { log_ratio.min(0.0).exp() };
        let u: f64 = rng.random();
        let accepted = u < prob;
        self.record(prob, accepted);
        (prob, accepted)
    }

    /// Books one Metropolis step; during burn-in also adapts the scale.
    pub fn record(&mut self, prob: f64, accepted: bool) {
        if self.frozen {
            self.stats.proposed += 1;
            self.stats.accepted += accepted as usize;
            return;
        }
        self.stats.proposed_burnin += 1;
        self.stats.accepted_burnin += accepted as usize;
        let t = self.stats.proposed_burnin as f64;
        self.log_scale += (prob - self.target) / t.powf(0.6);
        self.log_scale = self.log_scale.clamp(-30.0, 10.0);
    }

    /// Adds the current state to the burn-in history and re-estimates the
    /// proposal covariance at checkpoints.
    pub fn observe(&mut self, x: &[f64]) {
        if self.frozen || !self.adapt_covariance {
            return;
        }
        self.history.push(x.to_vec());
        let t = self.history.len();
        if is_covariance_checkpoint(t) {
            let recent = &self.history[t / 2..];
            if let Some(cov) = sample_covariance(recent) {
                if let Some(c) = cov.cholesky() {
                    self.chol = c.l();
                    self.log_scale = (2.38 / (self.dim() as f64).sqrt()).ln();
                }
            }
        }
    }

    /// Ends adaptation; scale and covariance stay fixed from here on.
    pub fn freeze(&mut self) {
        self.frozen = true;
        self.history = Vec::new();
        self.stats.scale = self.scale();
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }
}

fn cholesky_or_diagonal(cov: DMatrix<f64>) -> DMatrix<f64> {
    let n = cov.nrows();
    match cov.clone().cholesky() {
        Some(c) => c.l(),
        None => DMatrix::from_fn(n, n, |i, j| if i == j { cov[(i, i)].abs().max(1e-12).sqrt() } else { 0.0 }),
    }
}

/// Sample covariance with a small relative jitter on the diagonal; `None` when
/// some coordinate did not move.
fn sample_covariance(xs: &[Vec<f64>]) -> Option<DMatrix<f64>> {
    let n = xs.len();
    let d = xs.first()?.len();
    if n < 2 {
        return None;
    }
    let mut mean = vec![0.0; d];
    for x in xs {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v / n as f64;
        }
    }
    let mut cov = DMatrix::zeros(d, d);
    for x in xs {
        for i in 0..d {
            for j in 0..=i {
                cov[(i, j)] += (x[i] - mean[i]) * (x[j] - mean[j]) / (n - 1) as f64;
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            cov[(j, i)] = cov[(i, j)];
        }
        if !(cov[(i, i)] > 0.0) {
            return None;
        }
        cov[(i, i)] *= 1.0 + 1e-8;
    }
    Some(cov)
}
