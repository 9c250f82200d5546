//! Locating the generating process in the embedded model space.
//!
//! With `ŝgfᵢ` the cross-entropy estimates, `dᵢ(m)` the embedded distance
//! from model `i` to a candidate projection `m`, and `Sgg` the generating
//! neg-selfentropy, every model must satisfy
//!
//! ```text
//! Sgg - ŝgfᵢ - dᵢ(m)² = h²
//! ```
//!
//! `Sgg` and `h²` only appear as a difference, so `m` is found by making the
//! levels `-ŝgfᵢ - dᵢ(m)²` as equal as possible, and `h²` is recovered
//! afterwards from an independent `Sgg` estimate.

mod deletion;
mod solver;
mod weights;

pub use deletion::{deletion_sweep, Direction, SweepInput, SweepStep};
pub use solver::{projection_gradient, projection_objective, solve_projection, ProjectionOptions, ProjectionResult};
pub use weights::{akaike_weights, model_average_location, AverageResult};
