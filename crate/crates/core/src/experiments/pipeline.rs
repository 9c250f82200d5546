use serde::{Deserialize, Serialize};

use crate::cli::RunConfig;
use crate::distributions::{GaussianModel, Sample};
use crate::entropy::{self, EntropyEstimate};
use crate::mds::{self, DivergenceMatrix, Embedding};
use crate::model_fit::{self, FittedModel};
use crate::projection::{
    akaike_weights, model_average_location, solve_projection, AverageResult, ProjectionOptions, ProjectionResult,
};
use crate::Result;

/// Projection of the known generating process from exact divergences.
///
/// Uses `Sgfᵢ = Sgg - KL(g, fᵢ)` and the exact `Sgg` in place of the
/// estimates. Returns `(M, h²_true)` and the full solver result.
pub fn true_projection(
    g: &GaussianModel,
    models: &[GaussianModel],
    e: &Embedding,
    opts: &ProjectionOptions,
) -> Result<ProjectionResult> {
    let sgg = g.neg_selfentropy();
    let sgf: Vec<f64> = models.iter().map(|f| g.neg_crossentropy(f)).collect::<Result<_>>()?;
    solve_projection(&sgf, e, sgg, None, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub n: usize,
    pub models: usize,
    pub stress: f64,
    pub stress_percent: f64,
    /// `max |KLᵢⱼ - KLⱼᵢ|` over the candidate set.
    pub kl_asymmetry: f64,
    pub m_hat: Vec<f64>,
    pub average_location: Vec<f64>,
    pub true_m: Vec<f64>,
    pub h2_hat: f64,
    pub h_hat: f64,
    pub h2_clamped: bool,
    pub h2_true: f64,
    pub h_true: f64,
    pub sgg_hat: f64,
    pub sgg_true: f64,
    pub dist_m_hat_to_true: f64,
    pub dist_average_to_true: f64,
    /// Model with the smallest AIC.
    pub best_aic_model: String,
    /// Model with the smallest estimated `KL(g, fᵢ)`.
    pub nearest_model: String,
}

/// Every product of a pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub sample: Sample,
    pub fits: Vec<FittedModel>,
    pub divergence: DivergenceMatrix,
    pub embedding: Embedding,
    pub entropy: EntropyEstimate,
    pub average: AverageResult,
    pub projection: ProjectionResult,
    pub truth: ProjectionResult,
    pub report: PipelineReport,
}

impl PipelineOutput {
    pub fn names(&self) -> Vec<String> {
        self.fits.iter().map(|f| f.name().to_string()).collect()
    }

    pub fn aics(&self) -> Vec<f64> {
        self.fits.iter().map(|f| f.aic()).collect()
    }

    pub fn sgf_hats(&self) -> Vec<f64> {
        self.fits.iter().map(|f| f.sgf_hat()).collect()
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn argmin(values: &[f64]) -> usize {
    (0..values.len()).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0)
}

/// simulate → fit → divergences → NMDS → `Ŝgg` → projection and average →
/// exact projection → report.
pub fn run_pipeline(cfg: &RunConfig) -> Result<PipelineOutput> {
    let process = cfg.process().map_err(|e| e.at_stage("generating process"))?;
    let g = process.joint().map_err(|e| e.at_stage("generating process"))?;
    let sample = process.simulate(cfg.n, cfg.seeds.data).map_err(|e| e.at_stage("simulate"))?;
    let fits = model_fit::fit_all(&cfg.candidates, &sample).map_err(|e| e.at_stage("fit"))?;
    let divergence = mds::divergence_matrix(&fits).map_err(|e| e.at_stage("divergence"))?;
    let delta = mds::dissimilarities(&divergence);
    let embedding =
        mds::nmds(&delta, divergence.names().to_vec(), &cfg.nmds_options()).map_err(|e| e.at_stage("nmds"))?;
    let entropy = entropy::estimate(&sample, cfg.entropy.estimator, cfg.entropy.k, cfg.entropy.options())
        .map_err(|e| e.at_stage("entropy"))?;
    let aics: Vec<f64> = fits.iter().map(|f| f.aic()).collect();
    let sgf: Vec<f64> = fits.iter().map(|f| f.sgf_hat()).collect();
    let popts = cfg.projection_options();
    let average = akaike_weights(&aics)
        .and_then(|w| model_average_location(&embedding, &w))
        .map_err(|e| e.at_stage("average"))?;
    let projection = solve_projection(&sgf, &embedding, entropy.sgg_hat, Some(&average.location), &popts)
        .map_err(|e| e.at_stage("projection"))?;
    let predictives: Vec<GaussianModel> = fits.iter().map(|f| f.predictive().clone()).collect();
    let truth = true_projection(&g, &predictives, &embedding, &popts).map_err(|e| e.at_stage("true projection"))?;

    let names: Vec<&str> = fits.iter().map(|f| f.name()).collect();
    let report = PipelineReport {
        n: cfg.n,
        models: fits.len(),
        stress: embedding.stress,
        stress_percent: 100.0 * embedding.stress,
        kl_asymmetry: divergence.asymmetry(),
        m_hat: projection.m.clone(),
        average_location: average.location.clone(),
        true_m: truth.m.clone(),
        h2_hat: projection.h2,
        h_hat: projection.h(),
        h2_clamped: projection.clamped,
        h2_true: truth.h2,
        h_true: truth.h(),
        sgg_hat: entropy.sgg_hat,
        sgg_true: g.neg_selfentropy(),
        dist_m_hat_to_true: distance(&projection.m, &truth.m),
        dist_average_to_true: distance(&average.location, &truth.m),
        best_aic_model: names[argmin(&aics)].to_string(),
        nearest_model: names[argmin(&projection.kl_to_g)].to_string(),
    };
    Ok(PipelineOutput { sample, fits, divergence, embedding, entropy, average, projection, truth, report })
}
