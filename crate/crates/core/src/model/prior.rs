use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::link::ShapeParam;
use crate::special::ln_gamma;

/// Prior on one link shape parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum Prior {
    /// Shape-rate parameterisation; `Gamma { shape: 1, rate: 1 }` is exponential(1).
    Gamma {
        shape: f64,
        rate: f64,
    },
    Normal {
        mean: f64,
        variance: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
}

impl Prior {
    /// The default prior for each shape parameter.
    pub fn default_for(param: ShapeParam) -> Prior {
        match param {
            ShapeParam::R => Prior::Gamma { shape: 1.0, rate: 1.0 },
            ShapeParam::Nu => Prior::Gamma { shape: 8.0, rate: 1.0 },
            ShapeParam::P => Prior::Uniform { lo: 1.0, hi: 2.0 },
            ShapeParam::Alpha1 | ShapeParam::Alpha2 => Prior::Normal { mean: 0.0, variance: 100.0 },
            ShapeParam::Xi => Prior::Uniform { lo: -1.0, hi: 1.0 },
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let ok = match *self {
            Prior::Gamma { shape, rate } => shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite(),
            Prior::Normal { mean, variance } => mean.is_finite() && variance > 0.0 && variance.is_finite(),
            Prior::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
        };
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidPrior(format!("{self:?}")))
        }
    }

    /// Normalised log density.
    pub fn log_density(&self, x: f64) -> f64 {
        match *self {
            Prior::Gamma { shape, rate } => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
                }
            }
            Prior::Normal { mean, variance } => -0.5 * (2.0 * PI * variance).ln() - (x - mean).powi(2) / (2.0 * variance),
            Prior::Uniform { lo, hi } => {
                if x < lo || x > hi {
                    f64::NEG_INFINITY
                } else {
                    -(hi - lo).ln()
                }
            }
        }
    }

    /// Support as a closed interval (possibly infinite ends).
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Prior::Gamma { .. } => (0.0, f64::INFINITY),
            Prior::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Prior::Uniform { lo, hi } => (lo, hi),
        }
    }
}

/// Independent zero-mean normal prior on every coefficient, or a flat prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaPrior {
    Normal { variance: f64 },
    Flat,
}

impl Default for BetaPrior {
    fn default() -> Self {
        BetaPrior::Normal { variance: 1e4 }
    }
}

impl BetaPrior {
    pub fn log_density(&self, beta: &[f64]) -> f64 {
        match *self {
            BetaPrior::Normal { variance } => beta.iter().map(|b| -0.5 * (2.0 * PI * variance).ln() - b * b / (2.0 * variance)).sum(),
            BetaPrior::Flat => 0.0,
        }
    }

    /// Prior precision per coefficient (0 for flat).
    pub fn precision(&self) -> f64 {
        match *self {
            BetaPrior::Normal { variance } => 1.0 / variance,
            BetaPrior::Flat => 0.0,
        }
    }
}

/// Inverse-gamma prior on the ICAR variance `tau2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tau2Prior {
    pub shape: f64,
    pub rate: f64,
}

impl Default for Tau2Prior {
    fn default() -> Self {
        Tau2Prior { shape: 0.5, rate: 0.05 }
    }
}

impl Tau2Prior {
    pub fn log_density(&self, tau2: f64) -> f64 {
        if tau2 <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.shape * self.rate.ln() - ln_gamma(self.shape) - (self.shape + 1.0) * tau2.ln() - self.rate / tau2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::distribution::{Continuous, Gamma, InverseGamma, Normal};

    #[test]
    fn densities_match_reference() {
        let g = Gamma::new(8.0, 1.0).unwrap();
        let p = Prior::Gamma { shape: 8.0, rate: 1.0 };
        for &x in &[0.5, 3.0, 8.0, 20.0] {
            assert_relative_eq!(p.log_density(x), g.ln_pdf(x), max_relative = 1e-12);
        }
        let n = Normal::new(0.0, 10.0).unwrap();
        let p = Prior::Normal { mean: 0.0, variance: 100.0 };
        assert_relative_eq!(p.log_density(3.0), n.ln_pdf(3.0), max_relative = 1e-12);
        let ig = InverseGamma::new(0.5, 0.05).unwrap();
        assert_relative_eq!(Tau2Prior::default().log_density(0.7), ig.ln_pdf(0.7), max_relative = 1e-12);
        assert_eq!(Prior::Uniform { lo: 1.0, hi: 2.0 }.log_density(1.5), 0.0);
        assert_eq!(Prior::Uniform { lo: 1.0, hi: 2.0 }.log_density(2.5), f64::NEG_INFINITY);
    }

    #[test]
    fn serde_forms() {
        let p: Prior = serde_json::from_str(r#"{"dist":"gamma","shape":1,"rate":1}"#).unwrap();
        assert_eq!(p, Prior::default_for(ShapeParam::R));
        let b: BetaPrior = serde_json::from_str(r#""flat""#).unwrap();
        assert_eq!(b, BetaPrior::Flat);
        let b: BetaPrior = serde_json::from_str(r#"{"normal":{"variance":10000}}"#).unwrap();
        assert_eq!(b, BetaPrior::default());
    }
}
