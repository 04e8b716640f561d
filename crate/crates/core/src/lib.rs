//! Bayesian binomial regression with symmetric power links.

pub mod evaluation;
pub mod link;
pub mod model;
pub mod sampler;
pub mod sim;
pub mod special;

pub use link::{Family, LinkError, LinkSpec, ShapeParam};
