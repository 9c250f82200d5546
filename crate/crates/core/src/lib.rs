//! Model projection for multi-model inference.
//!
//! A set of fitted candidate models is embedded in a Euclidean model space
//! built from their pairwise Kullback-Leibler divergences. The generating
//! process is then located by its orthogonal projection `m` onto that space,
//! together with its off-plane discrepancy `h²` and its neg-selfentropy
//! `Sgg`, and compared against the Akaike-weight model average.
//!
//! All divergences are on the natural-log scale `KL(g, f) = Sgg - Sgf`.
//!
//! The crate is organized bottom-up:
//!
//! - [`distributions`]: multivariate Gaussians, linear-Gaussian path models, samples.
//! - [`model_fit`]: maximum-likelihood fits of candidate path models, AIC and `Ŝgf`.
//! - [`entropy`]: nearest-neighbour estimates of `Sgg` from raw data.
//! - [`mds`]: divergence matrices and the non-metric MDS model space.
//! - [`projection`]: Akaike weights, model averages and the projection solver.
//! - [`experiments`]: the benchmark, end-to-end pipeline and deletion studies.
//! - [`cli`]: configuration, file formats and the subcommand front end.

pub mod cli;
pub mod distributions;
pub mod entropy;
mod error;
pub mod experiments;
pub mod mds;
pub mod model_fit;
pub mod projection;
pub mod rng;

pub use error::{Error, Result};
