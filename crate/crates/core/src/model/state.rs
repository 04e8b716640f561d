use serde::{Deserialize, Serialize};

use crate::link::LinkSpec;

/// One point of the parameter space: coefficients, link (with its shape
/// values), spatial effects and their variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamState {
    pub beta: Vec<f64>,
    pub link: LinkSpec,
    /// Empty when the model has no spatial component.
    #[serde(default)]
    pub w: Vec<f64>,
    #[serde(default = "one")]
    pub tau2: f64,
}

fn one() -> f64 {
    1.0
}

impl ParamState {
    pub fn new(beta: Vec<f64>, link: LinkSpec) -> Self {
        ParamState { beta, link, w: Vec::new(), tau2: 1.0 }
    }

    pub fn with_spatial(mut self, w: Vec<f64>, tau2: f64) -> Self {
        self.w = w;
        self.tau2 = tau2;
        self
    }

    /// Flattens the state in the column order of [`crate::model::Model::param_names`].
    pub fn values(&self, spatial: bool) -> Vec<f64> {
        let mut v = self.beta.clone();
        v.extend(self.link.family().shape_params().iter().map(|&p| self.link.param(p).expect("own parameter")));
        if spatial {
            v.extend_from_slice(&self.w);
            v.push(self.tau2);
        }
        v
    }
}
