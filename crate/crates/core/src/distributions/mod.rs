//! Probability-model primitives: multivariate Gaussians, linear-Gaussian
//! path models and data samples.

mod gaussian;
mod path;
mod sample;

pub use gaussian::{entropy_gaussian, kl_gaussian, log_density, GaussianModel};
pub use path::{topological_order, PathEdge, PathModel};
pub use sample::Sample;
