use crate::model::Prior;
use crate::special::log_sigmoid;

/// Unconstrained scale on which a shape parameter is proposed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scale {
    Identity,
    /// `phi = ln theta` for positive parameters.
    Log,
    /// `phi = logit((theta - lo) / (hi - lo))` for bounded parameters.
    LogitRange(f64, f64),
}

impl Scale {
    pub fn for_prior(prior: &Prior) -> Scale {
        match prior.support() {
            (lo, hi) if lo.is_finite() && hi.is_finite() => Scale::LogitRange(lo, hi),
            (lo, _) if lo == 0.0 => Scale::Log,
            _ => Scale::Identity,
        }
    }

    pub fn to_unconstrained(self, theta: f64) -> f64 {
        match self {
            Scale::Identity => theta,
            Scale::Log => theta.ln(),
            Scale::LogitRange(lo, hi) => {
                let u = (theta - lo) / (hi - lo);
                u.ln() - (-u).ln_1p()
            }
        }
    }

    pub fn from_unconstrained(self, phi: f64) -> f64 {
        match self {
            Scale::Identity => phi,
            Scale::Log => phi.exp(),
            Scale::LogitRange(lo, hi) => lo + (hi - lo) * log_sigmoid(phi).exp(),
        }
    }

    /// `ln |d theta / d phi|`.
    pub fn log_jacobian(self, phi: f64) -> f64 {
        match self {
            Scale::Identity => 0.0,
            Scale::Log => phi,
            Scale::LogitRange(lo, hi) => (hi - lo).ln() + log_sigmoid(phi) + log_sigmoid(-phi),
        }
    }
}
