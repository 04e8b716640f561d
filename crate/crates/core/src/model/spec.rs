use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::prior::{BetaPrior, Prior, Tau2Prior};
use super::ModelError;
use crate::link::{Family, LinkSpec, ShapeParam};
use crate::sampler::ChainConfig;

/// ICAR spatial random effects, one per region of the adjacency graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialSpec {
    #[serde(default)]
    pub tau2_prior: Tau2Prior,
    #[serde(default = "one")]
    pub tau2_init: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for SpatialSpec {
    fn default() -> Self {
        SpatialSpec { tau2_prior: Tau2Prior::default(), tau2_init: 1.0 }
    }
}

/// Link choice, priors, spatial switch and sampler settings.
///
/// Every shape parameter of the link is sampled unless it is listed as fixed,
/// in which case it stays at the value given in `link`. Sampled parameters
/// start at that value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModelSpec", into = "RawModelSpec")]
pub struct ModelSpec {
    link: LinkSpec,
    beta_prior: BetaPrior,
    shape_priors: BTreeMap<ShapeParam, Prior>,
    spatial: Option<SpatialSpec>,
    sampler: ChainConfig,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModelSpec {
    link: LinkSpec,
    #[serde(default)]
    beta_prior: BetaPrior,
    #[serde(default)]
    shape_priors: BTreeMap<ShapeParam, Prior>,
    #[serde(default)]
    fixed: Vec<ShapeParam>,
    #[serde(default)]
    spatial: Option<SpatialSpec>,
    #[serde(default)]
    sampler: ChainConfig,
}

impl TryFrom<RawModelSpec> for ModelSpec {
    type Error = ModelError;

    fn try_from(raw: RawModelSpec) -> Result<Self, ModelError> {
        let family = raw.link.family();
        for p in raw.shape_priors.keys().chain(&raw.fixed) {
            if !family.shape_params().contains(p) {
                return Err(ModelError::BadPrior { param: *p, reason: format!("not a parameter of {family}") });
            }
        }
        let mut spec = ModelSpec {
            link: raw.link,
            beta_prior: raw.beta_prior,
            shape_priors: BTreeMap::new(),
            spatial: raw.spatial,
            sampler: raw.sampler,
        };
        for &p in family.shape_params() {
            if raw.fixed.contains(&p) {
                continue;
            }
            let prior = raw.shape_priors.get(&p).copied().unwrap_or_else(|| Prior::default_for(p));
            spec = spec.with_prior(p, prior)?;
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl From<ModelSpec> for RawModelSpec {
    fn from(spec: ModelSpec) -> Self {
        let fixed = spec.fixed_params();
        RawModelSpec {
            link: spec.link,
            beta_prior: spec.beta_prior,
            shape_priors: spec.shape_priors,
            fixed,
            spatial: spec.spatial,
            sampler: spec.sampler,
        }
    }
}

impl ModelSpec {
    /// Default model for a link: N(0, 1e4) coefficients, every shape parameter
    /// sampled under its default prior, no spatial effects.
    pub fn new(link: LinkSpec) -> Self {
        let shape_priors = link.family().shape_params().iter().map(|&p| (p, Prior::default_for(p))).collect();
        ModelSpec { link, beta_prior: BetaPrior::default(), shape_priors, spatial: None, sampler: ChainConfig::default() }
    }

    /// Default model for a family, starting from its reference shape values.
    pub fn for_family(family: Family) -> Self {
        Self::new(family.reference_link())
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model spec serialises")
    }

    fn validate(&self) -> Result<(), ModelError> {
        if let BetaPrior::Normal { variance } = self.beta_prior {
            if !(variance > 0.0 && variance.is_finite()) {
                return Err(ModelError::InvalidPrior(format!("beta variance {variance}")));
            }
        }
        if let Some(s) = &self.spatial {
            let t = s.tau2_prior;
            if !(t.shape > 0.0 && t.rate > 0.0 && s.tau2_init > 0.0) {
                return Err(ModelError::InvalidPrior(format!("tau2 prior {t:?} / init {}", s.tau2_init)));
            }
        }
        self.sampler.validate()?;
        Ok(())
    }

    pub fn link(&self) -> LinkSpec {
        self.link
    }

    pub fn family(&self) -> Family {
        self.link.family()
    }

    pub fn beta_prior(&self) -> BetaPrior {
        self.beta_prior
    }

    pub fn shape_priors(&self) -> &BTreeMap<ShapeParam, Prior> {
        &self.shape_priors
    }

    /// Shape parameters that are sampled, in the family's canonical order.
    pub fn sampled_params(&self) -> Vec<ShapeParam> {
        self.family().shape_params().iter().copied().filter(|p| self.shape_priors.contains_key(p)).collect()
    }

    pub fn fixed_params(&self) -> Vec<ShapeParam> {
        self.family().shape_params().iter().copied().filter(|p| !self.shape_priors.contains_key(p)).collect()
    }

    pub fn spatial(&self) -> Option<&SpatialSpec> {
        self.spatial.as_ref()
    }

    pub fn sampler(&self) -> &ChainConfig {
        &self.sampler
    }

    pub fn sampler_mut(&mut self) -> &mut ChainConfig {
        &mut self.sampler
    }

    pub fn with_link(mut self, link: LinkSpec) -> Result<Self, ModelError> {
        if link.family() != self.family() {
            return Err(ModelError::Dimension(format!("link family {} differs from model family {}", link.family(), self.family())));
        }
        self.link = link;
        for (&p, prior) in &self.shape_priors {
            check_start(p, prior, link.param(p)?)?;
        }
        Ok(self)
    }

    pub fn with_beta_prior(mut self, prior: BetaPrior) -> Self {
        self.beta_prior = prior;
        self
    }

    /// Samples `param` under `prior`.
    pub fn with_prior(mut self, param: ShapeParam, prior: Prior) -> Result<Self, ModelError> {
        if !self.family().shape_params().contains(&param) {
            return Err(ModelError::BadPrior { param, reason: format!("not a parameter of {}", self.family()) });
        }
        prior.validate()?;
        let (lo, hi) = prior.support();
        let ok = match param {
            ShapeParam::R | ShapeParam::Nu => lo >= 0.0,
            ShapeParam::P => lo >= 1.0 && hi <= 2.0,
            _ => true,
        };
        if !ok {
            return Err(ModelError::BadPrior { param, reason: format!("support [{lo}, {hi}] leaves the parameter range") });
        }
        check_start(param, &prior, self.link.param(param)?)?;
        self.shape_priors.insert(param, prior);
        Ok(self)
    }

    /// Holds `param` at its current value in the link.
    pub fn fix(mut self, param: ShapeParam) -> Self {
        self.shape_priors.remove(&param);
        self
    }

    pub fn fix_all(mut self) -> Self {
        self.shape_priors.clear();
        self
    }

    pub fn with_spatial(mut self, spatial: SpatialSpec) -> Self {
        self.spatial = Some(spatial);
        self
    }

    pub fn with_sampler(mut self, sampler: ChainConfig) -> Self {
        self.sampler = sampler;
        self
    }
}

fn check_start(param: ShapeParam, prior: &Prior, value: f64) -> Result<(), ModelError> {
    if prior.log_density(value).is_finite() {
        Ok(())
    } else {
        Err(ModelError::BadPrior { param, reason: format!("starting value {value} has zero prior density under {prior:?}") })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_defaults_sample_every_shape() {
        let spec = ModelSpec::from_json(r#"{"link":{"family":"spt","r":1,"nu":8}}"#).unwrap();
        assert_eq!(spec.sampled_params(), [ShapeParam::R, ShapeParam::Nu]);
        assert_eq!(spec.beta_prior(), BetaPrior::Normal { variance: 1e4 });
        assert!(spec.spatial().is_none());
    }

    #[test]
    fn fixed_parameters_and_round_trip() {
        let text = r#"{
            "link": {"family": "splogit", "r": 0.7},
            "beta_prior": "flat",
            "fixed": ["r"],
            "spatial": {"tau2_prior": {"shape": 1, "rate": 0.1}},
            "sampler": {"n_burnin": 10, "n_samples": 20}
        }"#;
        let spec = ModelSpec::from_json(text).unwrap();
        assert!(spec.sampled_params().is_empty());
        assert_eq!(spec.fixed_params(), [ShapeParam::R]);
        assert_eq!(spec.sampler().n_samples, 20);
        let back = ModelSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn inconsistent_specs_are_rejected() {
        assert!(ModelSpec::from_json(r#"{"link":{"family":"logit"},"fixed":["r"]}"#).is_err());
        assert!(ModelSpec::from_json(
            r#"{"link":{"family":"splogit","r":1},"shape_priors":{"r":{"dist":"normal","mean":0,"variance":1}}}"#
        )
        .is_err());
        assert!(
            ModelSpec::from_json(r#"{"link":{"family":"gev","xi":2.7},"shape_priors":{"xi":{"dist":"uniform","lo":-1,"hi":1}}}"#).is_err()
        );
        assert!(ModelSpec::from_json(r#"{"link":{"family":"logit"},"bogus":1}"#).is_err());
    }
}
