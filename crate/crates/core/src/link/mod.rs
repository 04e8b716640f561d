//! Link distributions: the symmetric power families and every comparator.
//!
//! A link is described by a [`LinkSpec`], which is always valid once
//! constructed. All evaluation goes through `(ln F, ln(1 - F))` pairs so the
//! binomial likelihood never takes the log of a rounded-to-zero probability.

mod baseline;
mod transform;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use baseline::Baseline;
pub use transform::{czado_transform, stukel_transform, ALPHA_ZERO};

use crate::special::{log1mexp, log_sigmoid};
use transform::{czado_with_log_derivative, stukel_with_log_derivative};

/// Below this magnitude the GEV shape is treated as the Gumbel limit.
const XI_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error("invalid value {value} for parameter `{param}` of the {family} link: {reason}")]
    InvalidParameter { family: Family, param: ShapeParam, value: f64, reason: &'static str },
    #[error("the {family} link has no `{param}` parameter")]
    NotApplicable { family: Family, param: ShapeParam },
    #[error("probability {0} is outside (0, 1)")]
    ProbabilityOutOfRange(f64),
    #[error("unknown link family `{0}`")]
    UnknownFamily(String),
}

/// Shape parameters a link may carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeParam {
    R,
    Nu,
    P,
    Alpha1,
    Alpha2,
    Xi,
}

impl ShapeParam {
    pub const ALL: [ShapeParam; 6] = [ShapeParam::R, ShapeParam::Nu, ShapeParam::P, ShapeParam::Alpha1, ShapeParam::Alpha2, ShapeParam::Xi];

    pub fn name(self) -> &'static str {
        match self {
            ShapeParam::R => "r",
            ShapeParam::Nu => "nu",
            ShapeParam::P => "p",
            ShapeParam::Alpha1 => "alpha1",
            ShapeParam::Alpha2 => "alpha2",
            ShapeParam::Xi => "xi",
        }
    }
}

impl fmt::Display for ShapeParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Family tag without parameter values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Logit,
    Cloglog,
    Loglog,
    Splogit,
    Spt,
    Spep,
    Plogit,
    Altersplogit,
    Stukel,
    Czado,
    Gev,
    ReflectedGev,
}

impl Family {
    pub const ALL: [Family; 12] = [
        Family::Logit,
        Family::Cloglog,
        Family::Loglog,
        Family::Splogit,
        Family::Spt,
        Family::Spep,
        Family::Plogit,
        Family::Altersplogit,
        Family::Stukel,
        Family::Czado,
        Family::Gev,
        Family::ReflectedGev,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Logit => "logit",
            Family::Cloglog => "cloglog",
            Family::Loglog => "loglog",
            Family::Splogit => "splogit",
            Family::Spt => "spt",
            Family::Spep => "spep",
            Family::Plogit => "plogit",
            Family::Altersplogit => "altersplogit",
            Family::Stukel => "stukel",
            Family::Czado => "czado",
            Family::Gev => "gev",
            Family::ReflectedGev => "reflected_gev",
        }
    }

    /// Shape parameters carried by this family, in canonical order.
    pub fn shape_params(self) -> &'static [ShapeParam] {
        use ShapeParam::*;
        match self {
            Family::Logit | Family::Cloglog | Family::Loglog => &[],
            Family::Splogit | Family::Plogit | Family::Altersplogit => &[R],
            Family::Spt => &[R, Nu],
            Family::Spep => &[R, P],
            Family::Stukel | Family::Czado => &[Alpha1, Alpha2],
            Family::Gev | Family::ReflectedGev => &[Xi],
        }
    }

    /// The link at its symmetric (or reference) special case.
    ///
    /// Czado starts at `alpha = 1`, where its transform is the identity.
    pub fn reference_link(self) -> LinkSpec {
        let kind = match self {
            Family::Logit => LinkKind::Logit,
            Family::Cloglog => LinkKind::Cloglog,
            Family::Loglog => LinkKind::Loglog,
            Family::Splogit => LinkKind::Splogit { r: 1.0 },
            Family::Spt => LinkKind::Spt { r: 1.0, nu: 8.0 },
            Family::Spep => LinkKind::Spep { r: 1.0, p: 1.5 },
            Family::Plogit => LinkKind::Plogit { r: 1.0 },
            Family::Altersplogit => LinkKind::Altersplogit { r: 1.0 },
            Family::Stukel => LinkKind::Stukel { alpha1: 0.0, alpha2: 0.0 },
            Family::Czado => LinkKind::Czado { alpha1: 1.0, alpha2: 1.0 },
            Family::Gev => LinkKind::Gev { xi: 0.0 },
            Family::ReflectedGev => LinkKind::ReflectedGev { xi: 0.0 },
        };
        LinkSpec(kind)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = LinkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL.iter().copied().find(|f| f.name() == s).ok_or_else(|| LinkError::UnknownFamily(s.to_string()))
    }
}

/// Raw link description. Use [`LinkSpec::new`] to obtain a validated link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LinkKind {
    Logit,
    Cloglog,
    Loglog,
    /// Symmetric power logit.
    Splogit {
        r: f64,
    },
    /// Symmetric power Student-t.
    Spt {
        r: f64,
        nu: f64,
    },
    /// Symmetric power exponential power; `p` in `[1, 2]`.
    Spep {
        r: f64,
        p: f64,
    },
    /// One-sided power logit `F0(x)^r`.
    Plogit {
        r: f64,
    },
    /// Symmetric power logit built from the opposite tails.
    Altersplogit {
        r: f64,
    },
    Stukel {
        alpha1: f64,
        alpha2: f64,
    },
    Czado {
        alpha1: f64,
        alpha2: f64,
    },
    /// GEV distribution function with location 0 and scale 1.
    Gev {
        xi: f64,
    },
    /// GEV link `1 - G(-x)`; equals cloglog at `xi = 0`.
    ReflectedGev {
        xi: f64,
    },
}

/// A validated link function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LinkKind", into = "LinkKind")]
pub struct LinkSpec(LinkKind);

impl TryFrom<LinkKind> for LinkSpec {
    type Error = LinkError;

    fn try_from(kind: LinkKind) -> Result<Self, Self::Error> {
        LinkSpec::new(kind)
    }
}

impl From<LinkSpec> for LinkKind {
    fn from(link: LinkSpec) -> Self {
        link.0
    }
}

fn check(family: Family, param: ShapeParam, value: f64) -> Result<(), LinkError> {
    let reason = match param {
        _ if !value.is_finite() => Some("must be finite"),
        ShapeParam::R | ShapeParam::Nu if value <= 0.0 => Some("must be positive"),
        ShapeParam::P if !(1.0..=2.0).contains(&value) => Some("must lie in [1, 2]"),
        _ => None,
    };
    match reason {
        Some(reason) => Err(LinkError::InvalidParameter { family, param, value, reason }),
        None => Ok(()),
    }
}

/// Mode of a link density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub x: f64,
    /// The maximizer sits on the boundary of the support or of the search bracket.
    pub at_boundary: bool,
}

impl LinkSpec {
    pub fn new(kind: LinkKind) -> Result<Self, LinkError> {
        let link = LinkSpec(kind);
        let family = link.family();
        for &param in family.shape_params() {
            check(family, param, link.param_unchecked(param))?;
        }
        Ok(link)
    }

    pub fn logit() -> Self {
        LinkSpec(LinkKind::Logit)
    }

    pub fn cloglog() -> Self {
        LinkSpec(LinkKind::Cloglog)
    }

    pub fn loglog() -> Self {
        LinkSpec(LinkKind::Loglog)
    }

    pub fn splogit(r: f64) -> Result<Self, LinkError> {
        Self::new(LinkKind::Splogit { r })
    }

    pub fn plogit(r: f64) -> Result<Self, LinkError> {
        Self::new(LinkKind::Plogit { r })
    }

    pub fn altersplogit(r: f64) -> Result<Self, LinkError> {
        Self::new(LinkKind::Altersplogit { r })
    }

    pub fn spt(r: f64, nu: f64) -> Result<Self, LinkError> {
        Self::new(LinkKind::Spt { r, nu })
    }

    pub fn spep(r: f64, p: f64) -> Result<Self, LinkError> {
        Self::new(LinkKind::Spep { r, p })
    }

    pub fn stukel(alpha1: f64, alpha2: f64) -> Result<Self, LinkError> {
        Self::new(LinkKind::Stukel { alpha1, alpha2 })
    }

    pub fn czado(alpha1: f64, alpha2: f64) -> Result<Self, LinkError> {
        Self::new(LinkKind::Czado { alpha1, alpha2 })
    }

    pub fn gev(xi: f64) -> Result<Self, LinkError> {
        Self::new(LinkKind::Gev { xi })
    }

    pub fn reflected_gev(xi: f64) -> Result<Self, LinkError> {
        Self::new(LinkKind::ReflectedGev { xi })
    }

    pub fn kind(&self) -> LinkKind {
        self.0
    }

    pub fn family(&self) -> Family {
        match self.0 {
            LinkKind::Logit => Family::Logit,
            LinkKind::Cloglog => Family::Cloglog,
            LinkKind::Loglog => Family::Loglog,
            LinkKind::Splogit { .. } => Family::Splogit,
            LinkKind::Spt { .. } => Family::Spt,
            LinkKind::Spep { .. } => Family::Spep,
            LinkKind::Plogit { .. } => Family::Plogit,
            LinkKind::Altersplogit { .. } => Family::Altersplogit,
            LinkKind::Stukel { .. } => Family::Stukel,
            LinkKind::Czado { .. } => Family::Czado,
            LinkKind::Gev { .. } => Family::Gev,
            LinkKind::ReflectedGev { .. } => Family::ReflectedGev,
        }
    }

    fn param_unchecked(&self, param: ShapeParam) -> f64 {
        self.param(param).unwrap_or(f64::NAN)
    }

    /// Value of a shape parameter; errors when the family does not carry it.
    pub fn param(&self, param: ShapeParam) -> Result<f64, LinkError> {
        use LinkKind::*;
        let value = match (self.0, param) {
            (Splogit { r } | Plogit { r } | Altersplogit { r }, ShapeParam::R) => r,
            (Spt { r, .. } | Spep { r, .. }, ShapeParam::R) => r,
            (Spt { nu, .. }, ShapeParam::Nu) => nu,
            (Spep { p, .. }, ShapeParam::P) => p,
            (Stukel { alpha1, .. } | Czado { alpha1, .. }, ShapeParam::Alpha1) => alpha1,
            (Stukel { alpha2, .. } | Czado { alpha2, .. }, ShapeParam::Alpha2) => alpha2,
            (Gev { xi } | ReflectedGev { xi }, ShapeParam::Xi) => xi,
            _ => return Err(LinkError::NotApplicable { family: self.family(), param }),
        };
        Ok(value)
    }

    /// Copy of this link with one shape parameter replaced.
    pub fn with_param(&self, param: ShapeParam, value: f64) -> Result<Self, LinkError> {
        use LinkKind::*;
        let family = self.family();
        check(family, param, value)?;
        let mut kind = self.0;
        match (&mut kind, param) {
            (Splogit { r } | Plogit { r } | Altersplogit { r }, ShapeParam::R) => *r = value,
            (Spt { r, .. } | Spep { r, .. }, ShapeParam::R) => *r = value,
            (Spt { nu, .. }, ShapeParam::Nu) => *nu = value,
            (Spep { p, .. }, ShapeParam::P) => *p = value,
            (Stukel { alpha1, .. } | Czado { alpha1, .. }, ShapeParam::Alpha1) => *alpha1 = value,
            (Stukel { alpha2, .. } | Czado { alpha2, .. }, ShapeParam::Alpha2) => *alpha2 = value,
            (Gev { xi } | ReflectedGev { xi }, ShapeParam::Xi) => *xi = value,
            _ => return Err(LinkError::NotApplicable { family, param }),
        }
        Ok(LinkSpec(kind))
    }

    /// Symmetric baseline of the power families.
    pub fn baseline(&self) -> Option<Baseline> {
        match self.0 {
            LinkKind::Splogit { .. } | LinkKind::Plogit { .. } | LinkKind::Altersplogit { .. } => Some(Baseline::Logistic),
            LinkKind::Spt { nu, .. } => Some(Baseline::StudentT(nu)),
            LinkKind::Spep { p, .. } => Some(Baseline::ExpPower(p)),
            _ => None,
        }
    }

    /// The link `x -> 1 - F(-x)`, when it belongs to a supported family.
    pub fn mirror(&self) -> Option<LinkSpec> {
        use LinkKind::*;
        let kind = match self.0 {
            Logit => Logit,
            Cloglog => Loglog,
            Loglog => Cloglog,
            Splogit { r } => Splogit { r: 1.0 / r },
            Spt { r, nu } => Spt { r: 1.0 / r, nu },
            Spep { r, p } => Spep { r: 1.0 / r, p },
            Altersplogit { r } => Altersplogit { r: 1.0 / r },
            Stukel { alpha1, alpha2 } => Stukel { alpha1: alpha2, alpha2: alpha1 },
            Czado { alpha1, alpha2 } => Czado { alpha1: alpha2, alpha2: alpha1 },
            Gev { xi } => ReflectedGev { xi },
            ReflectedGev { xi } => Gev { xi },
            Plogit { .. } => return None,
        };
        Some(LinkSpec(kind))
    }

    /// `(ln F(x), ln(1 - F(x)))`.
    pub fn log_cdf_sf(&self, x: f64) -> (f64, f64) {
        use LinkKind::*;
        if x.is_nan() {
            return (f64::NAN, f64::NAN);
        }
        match self.0 {
            Logit => (log_sigmoid(x), log_sigmoid(-x)),
            Cloglog => {
                let ls = -x.exp();
                (log1mexp(ls), ls)
            }
            Loglog => {
                let lc = -(-x).exp();
                (lc, log1mexp(lc))
            }
            Splogit { r } | Spt { r, .. } | Spep { r, .. } => {
                let f0 = self.baseline().expect("power family");
                if r <= 1.0 {
                    scaled_power_log_cdf_sf(f0, r, x)
                } else {
                    mirrored_power_log_cdf_sf(f0, 1.0 / r, x)
                }
            }
            Altersplogit { r } => {
                if r <= 1.0 {
                    mirrored_power_log_cdf_sf(Baseline::Logistic, 1.0 / r, x)
                } else {
                    scaled_power_log_cdf_sf(Baseline::Logistic, r, x)
                }
            }
            Plogit { r } => {
                let lc = r * Baseline::Logistic.log_cdf(x);
                (lc, log1mexp(lc))
            }
            Stukel { alpha1, alpha2 } => {
                let h = stukel_with_log_derivative(alpha1, alpha2, x).0;
                (log_sigmoid(h), log_sigmoid(-h))
            }
            Czado { alpha1, alpha2 } => {
                let h = czado_with_log_derivative(alpha1, alpha2, x).0;
                (log_sigmoid(h), log_sigmoid(-h))
            }
            Gev { xi } => {
                let lc = -gev_ln_t(xi, x).exp();
                (lc, log1mexp(lc))
            }
            ReflectedGev { xi } => {
                let ls = -gev_ln_t(xi, -x).exp();
                (log1mexp(ls), ls)
            }
        }
    }

    pub fn log_cdf(&self, x: f64) -> f64 {
        self.log_cdf_sf(x).0
    }

    pub fn log_sf(&self, x: f64) -> f64 {
        self.log_cdf_sf(x).1
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lc, ls) = self.log_cdf_sf(x);
        if lc <= -std::f64::consts::LN_2 {
            lc.exp()
        } else {
            -ls.exp_m1()
        }
    }

    /// Log of the link density.
    pub fn log_pdf(&self, x: f64) -> f64 {
        use LinkKind::*;
        if x.is_nan() {
            return f64::NAN;
        }
        match self.0 {
            Logit => Baseline::Logistic.log_pdf(x),
            Cloglog => {
                if x.is_infinite() {
                    f64::NEG_INFINITY
                } else {
                    x - x.exp()
                }
            }
            Loglog => {
                if x.is_infinite() {
                    f64::NEG_INFINITY
                } else {
                    -x - (-x).exp()
                }
            }
            Splogit { r } | Spt { r, .. } | Spep { r, .. } => {
                let f0 = self.baseline().expect("power family");
                if r <= 1.0 {
                    scaled_power_log_pdf(f0, r, x)
                } else {
                    scaled_power_log_pdf(f0, 1.0 / r, -x)
                }
            }
            Altersplogit { r } => {
                if r <= 1.0 {
                    scaled_power_log_pdf(Baseline::Logistic, 1.0 / r, -x)
                } else {
                    scaled_power_log_pdf(Baseline::Logistic, r, x)
                }
            }
            Plogit { r } => r.ln() + (r - 1.0) * Baseline::Logistic.log_cdf(x) + Baseline::Logistic.log_pdf(x),
            Stukel { alpha1, alpha2 } => {
                let (h, ld) = stukel_with_log_derivative(alpha1, alpha2, x);
                Baseline::Logistic.log_pdf(h) + ld
            }
            Czado { alpha1, alpha2 } => {
                let (h, ld) = czado_with_log_derivative(alpha1, alpha2, x);
                Baseline::Logistic.log_pdf(h) + ld
            }
            Gev { xi } => gev_log_pdf(xi, x),
            ReflectedGev { xi } => gev_log_pdf(xi, -x),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.log_pdf(x).exp()
    }

    /// Mode of the link density; closed form where one exists.
    pub fn mode(&self) -> Mode {
        use LinkKind::*;
        let interior = |x| Mode { x, at_boundary: false };
        match self.0 {
            Logit | Cloglog | Loglog => interior(0.0),
            Splogit { r } => {
                if r <= 1.0 {
                    interior(r * r.ln())
                } else {
                    interior(r.ln() / r)
                }
            }
            Gev { xi } => gev_mode(xi),
            ReflectedGev { xi } => {
                let m = gev_mode(xi);
                Mode { x: -m.x, ..m }
            }
            _ => self.mode_numeric(),
        }
    }

    /// Mode by golden-section search on the log density.
    pub fn mode_numeric(&self) -> Mode {
        let half_width = 50.0 * self.search_scale();
        golden_section_max(|x| self.log_pdf(x), -half_width, half_width, 1e-10)
    }

    fn search_scale(&self) -> f64 {
        match self.0 {
            LinkKind::Splogit { r } | LinkKind::Spt { r, .. } | LinkKind::Spep { r, .. } | LinkKind::Altersplogit { r } => r.min(1.0 / r),
            _ => 1.0,
        }
    }

    /// Arnold–Groeneveld skewness `1 - 2 F(mode)`.
    ///
    /// For the GEV with `xi <= -1` the density peaks at the upper support
    /// endpoint and the skewness is reported as `-1`.
    pub fn skewness(&self) -> f64 {
        use LinkKind::*;
        match self.0 {
            Logit => 0.0,
            Cloglog => 2.0 * (-1f64).exp() - 1.0,
            Loglog => 1.0 - 2.0 * (-1f64).exp(),
            Splogit { r } => {
                if r <= 1.0 {
                    1.0 - 2.0 * (r / (r + 1.0)).powf(r)
                } else {
                    2.0 * (1.0 / (r + 1.0)).powf(1.0 / r) - 1.0
                }
            }
            Gev { xi } => gev_skewness(xi),
            ReflectedGev { xi } => -gev_skewness(xi),
            _ => self.skewness_numeric(),
        }
    }

    /// Skewness from the numerically located mode, for any family.
    pub fn skewness_numeric(&self) -> f64 {
        1.0 - 2.0 * self.cdf(self.mode_numeric().x)
    }

    /// Inverse of the CDF for `q` in `(0, 1)`.
    pub fn quantile(&self, q: f64) -> Result<f64, LinkError> {
        use LinkKind::*;
        if !(q > 0.0 && q < 1.0) {
            return Err(LinkError::ProbabilityOutOfRange(q));
        }
        let x = match self.0 {
            Logit => q.ln() - (-q).ln_1p(),
            Cloglog => (-(-q).ln_1p()).ln(),
            Loglog => -(-q.ln()).ln(),
            Splogit { r } => {
                if r <= 1.0 {
                    r * logit_of_exp(q.ln() / r)
                } else {
                    -logit_of_exp(r * (-q).ln_1p()) / r
                }
            }
            Plogit { r } => logit_of_exp(q.ln() / r),
            Altersplogit { r } => {
                if r <= 1.0 {
                    // 1 - F0^{1/r}(-r x) = q
                    -logit_of_exp(r * (-q).ln_1p()) / r
                } else {
                    r * logit_of_exp(q.ln() / r)
                }
            }
            Gev { xi } => gev_quantile(xi, q),
            ReflectedGev { xi } => -gev_quantile(xi, 1.0 - q),
            Spt { .. } | Spep { .. } | Stukel { .. } | Czado { .. } => self.quantile_bisect(q),
        };
        Ok(x)
    }

    fn quantile_bisect(&self, q: f64) -> f64 {
        let mut lo = -1.0;
        let mut hi = 1.0;
        while self.cdf(lo) > q && lo > -1e300 {
            lo *= 2.0;
        }
        while self.cdf(hi) < q && hi < 1e300 {
            hi *= 2.0;
        }
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

impl fmt::Display for LinkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family())?;
        let params = self.family().shape_params();
        if !params.is_empty() {
            let parts: Vec<String> = params.iter().map(|&p| format!("{}={}", p, self.param_unchecked(p))).collect();
            write!(f, "({})", parts.join(", "))?;
        }
        Ok(())
    }
}

/// `logit(exp(l))` for `l <= 0`.
fn logit_of_exp(l: f64) -> f64 {
    l - log1mexp(l)
}

/// `F0(x/s)^s` in log form.
fn scaled_power_log_cdf_sf(f0: Baseline, s: f64, x: f64) -> (f64, f64) {
    let u = x / s;
    let lc = s * f0.log_cdf(u);
    if lc < -1e-280 {
        (lc, log1mexp(lc))
    } else {
        // lc has lost its digits to underflow; 1 - F0(u)^s = s (1 - F0(u)) to
        // double precision here, and 1 - F0(u) = F0(-u).
        (lc, s.ln() + f0.log_cdf(-u))
    }
}

/// `1 - F0(-x/s)^s` in log form.
fn mirrored_power_log_cdf_sf(f0: Baseline, s: f64, x: f64) -> (f64, f64) {
    let (lc, ls) = scaled_power_log_cdf_sf(f0, s, -x);
    (ls, lc)
}

/// Log density of `F0(x/s)^s`.
fn scaled_power_log_pdf(f0: Baseline, s: f64, x: f64) -> f64 {
    let u = x / s;
    if u.is_infinite() {
        return f64::NEG_INFINITY;
    }
    (s - 1.0) * f0.log_cdf(u) + f0.log_pdf(u)
}

/// `ln t(x)` with `t(x) = (1 + xi x)_+^{-1/xi}`.
fn gev_ln_t(xi: f64, x: f64) -> f64 {
    if xi.abs() < XI_ZERO {
        return -x;
    }
    let z = xi * x;
    if z <= -1.0 {
        // outside the support: t = +inf below a lower endpoint, 0 above an upper one
        return if xi > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
    }
    -z.ln_1p() / xi
}

fn gev_log_pdf(xi: f64, x: f64) -> f64 {
    let ln_t = gev_ln_t(xi, x);
    if ln_t.is_infinite() || x.is_infinite() {
        return f64::NEG_INFINITY;
    }
    (xi + 1.0) * ln_t - ln_t.exp()
}

fn gev_mode(xi: f64) -> Mode {
    if xi <= -1.0 {
        Mode { x: -1.0 / xi, at_boundary: true }
    } else if xi.abs() < XI_ZERO {
        Mode { x: 0.0, at_boundary: false }
    } else {
        Mode { x: (-xi * xi.ln_1p()).exp_m1() / xi, at_boundary: false }
    }
}

fn gev_skewness(xi: f64) -> f64 {
    if xi <= -1.0 {
        -1.0
    } else {
        1.0 - 2.0 * (-(1.0 + xi)).exp()
    }
}

fn gev_quantile(xi: f64, q: f64) -> f64 {
    let ln_minus_ln_q = (-q.ln()).ln();
    if xi.abs() < XI_ZERO {
        -ln_minus_ln_q
    } else {
        (-xi * ln_minus_ln_q).exp_m1() / xi
    }
}

/// Maximize a unimodal function on `[lo, hi]`: coarse grid scan, then
/// golden-section refinement inside the best grid cell.
fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Mode {
    const GRID: usize = 400;
    let step = (hi - lo) / GRID as f64;
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..=GRID {
        let v = f(lo + step * i as f64);
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    let at_boundary = best == 0 || best == GRID;
    let mut a = lo + step * best.saturating_sub(1) as f64;
    let mut b = (lo + step * (best + 1) as f64).min(hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol * (1.0 + c.abs()) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if b - a <= f64::EPSILON * (a.abs() + b.abs()) {
            break;
        }
    }
    Mode { x: 0.5 * (a + b), at_boundary }
}
