//! Desk-scale studies: the `Sgg` estimator benchmark, the end-to-end
//! pipeline on a simulated path-model generating process, and the deletion
//! stability study.

mod benchmark;
mod deletion;
mod pipeline;
mod svg;

pub use benchmark::{sgg_benchmark, BenchmarkConfig, BenchmarkReport, CellSummary, Summary};
pub use deletion::{deletion_experiment, DeletionReport, DeletionRow};
pub use pipeline::{run_pipeline, true_projection, PipelineOutput, PipelineReport};
pub use svg::{model_space_svg, SvgOptions};

/// The shipped default study: a 6-variable path model and a 20-model
/// candidate lattice, `n = 450`.
pub const DEFAULT_CONFIG: &str = include_str!("../../configs/default.toml");

pub fn default_config() -> crate::cli::RunConfig {
    crate::cli::RunConfig::from_toml(DEFAULT_CONFIG).expect("shipped default config is valid")
}
