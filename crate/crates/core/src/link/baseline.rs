//! Symmetric baseline distributions F0 (standard location 0, scale 1).

use std::f64::consts::{LN_2, PI};

use crate::special::{ln_beta_inc, ln_gamma, ln_gamma_q, log1mexp, log_sigmoid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Baseline {
    Logistic,
    /// Student-t with `nu` degrees of freedom (continuous `nu`).
    StudentT(f64),
    /// Exponential power (Subbotin) with exponent `p`.
    ExpPower(f64),
}

impl Baseline {
    /// `ln F0(x)`.
    pub fn log_cdf(self, x: f64) -> f64 {
        if x == f64::INFINITY {
            return 0.0;
        }
        if x == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        match self {
            Baseline::Logistic => log_sigmoid(x),
            Baseline::StudentT(nu) => {
                let lower = t_ln_lower_tail(nu, x.abs());
                if x <= 0.0 {
                    lower
                } else {
                    log1mexp(lower)
                }
            }
            Baseline::ExpPower(p) => {
                // F0(x) = 1/2 + sign(x)/2 * P(1/p, |x|^p / p)
                let z = x.abs().powf(p) / p;
                let lower = ln_gamma_q(1.0 / p, z) - LN_2;
                if x <= 0.0 {
                    lower
                } else {
                    log1mexp(lower)
                }
            }
        }
    }

    pub fn cdf(self, x: f64) -> f64 {
        if x <= 0.0 {
            self.log_cdf(x).exp()
        } else {
            -self.log_cdf(-x).exp_m1()
        }
    }

    /// `ln f0(x)`.
    pub fn log_pdf(self, x: f64) -> f64 {
        if x.is_infinite() {
            return f64::NEG_INFINITY;
        }
        match self {
            Baseline::Logistic => log_sigmoid(x) + log_sigmoid(-x),
            Baseline::StudentT(nu) => {
                ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln() - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()
            }
            Baseline::ExpPower(p) => -x.abs().powf(p) / p - ep_log_norm(p),
        }
    }

    pub fn pdf(self, x: f64) -> f64 {
        self.log_pdf(x).exp()
    }
}

/// `ln c` with `c = 2 p^{1/p - 1} Gamma(1/p)` (unit scale).
fn ep_log_norm(p: f64) -> f64 {
    LN_2 + (1.0 / p - 1.0) * p.ln() + ln_gamma(1.0 / p)
}

/// `ln P(T <= -a)` for `a >= 0`, T ~ t(nu).
fn t_ln_lower_tail(nu: f64, a: f64) -> f64 {
    if a == 0.0 {
        return -LN_2;
    }
    let a2 = a * a;
    let (z, one_minus_z) = if a2.is_finite() { (nu / (nu + a2), a2 / (nu + a2)) } else { (0.0, 1.0) };
    if z == 0.0 {
        // a^2 overflowed: leading-order tail a^{-nu}
        return 0.5 * nu * nu.ln() - nu * a.ln() - (0.5 * nu).ln() - crate::special::ln_beta(0.5 * nu, 0.5) - LN_2;
    }
    ln_beta_inc(0.5 * nu, 0.5, z, one_minus_z) - LN_2
}
