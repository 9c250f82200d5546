//! Run configuration: a strict TOML schema with every default materialized
//! on parse.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::distributions::{GaussianModel, PathEdge, PathModel};
use crate::entropy::{default_k_max, EntropyOptions, Estimator};
use crate::mds::NmdsOptions;
use crate::model_fit::{validate_model_set, CandidateSpec};
use crate::projection::ProjectionOptions;
use crate::rng::derive_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    pub variables: Vec<String>,
    #[serde(default)]
    pub edges: Vec<PathEdge>,
    /// Defaults to 1 for every variable.
    #[serde(default)]
    pub noise_sd: Vec<f64>,
    /// Defaults to 0 for every variable.
    #[serde(default)]
    pub intercepts: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    pub variables: Vec<String>,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

/// The known generating process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum GeneratingSpec {
    Path(PathSpec),
    Gaussian(GaussianSpec),
}

/// Either a path model, simulated equation by equation, or a plain Gaussian.
#[derive(Debug, Clone)]
pub enum GeneratingProcess {
    Path(PathModel),
    Gaussian { variables: Vec<String>, model: GaussianModel },
}

impl GeneratingProcess {
    pub fn variables(&self) -> &[String] {
        match self {
            GeneratingProcess::Path(pm) => pm.variables(),
            GeneratingProcess::Gaussian { variables, .. } => variables,
        }
    }

    pub fn joint(&self) -> Result<GaussianModel> {
        match self {
            GeneratingProcess::Path(pm) => pm.reduce(),
            GeneratingProcess::Gaussian { model, .. } => Ok(model.clone()),
        }
    }

    pub fn simulate(&self, n: usize, seed: u64) -> Result<crate::distributions::Sample> {
        match self {
            GeneratingProcess::Path(pm) => pm.simulate(n, seed),
            GeneratingProcess::Gaussian { variables, model } => {
                let s = model.sample(n, seed)?;
                crate::distributions::Sample::new(s.data().clone(), variables.clone())
            }
        }
    }
}

impl GeneratingSpec {
    pub fn build(&self) -> Result<GeneratingProcess> {
        match self {
            GeneratingSpec::Path(p) => {
                let k = p.variables.len();
                let noise = if p.noise_sd.is_empty() { vec![1.0; k] } else { p.noise_sd.clone() };
                let icpt = if p.intercepts.is_empty() { vec![0.0; k] } else { p.intercepts.clone() };
                Ok(GeneratingProcess::Path(PathModel::new(p.variables.clone(), p.edges.clone(), noise, icpt)?))
            }
            GeneratingSpec::Gaussian(g) => {
                let p = g.variables.len();
                if g.mean.len() != p || g.cov.len() != p || g.cov.iter().any(|r| r.len() != p) {
                    return Err(Error::invalid("mean and cov must match the number of variables"));
                }
                let model = GaussianModel::new(
                    DVector::from_column_slice(&g.mean),
                    DMatrix::from_fn(p, p, |i, j| g.cov[i][j]),
                )?;
                Ok(GeneratingProcess::Gaussian { variables: g.variables.clone(), model })
            }
        }
    }

    fn materialize(&mut self) {
        if let GeneratingSpec::Path(p) = self {
            let k = p.variables.len();
            if p.noise_sd.is_empty() {
                p.noise_sd = vec![1.0; k];
            }
            if p.intercepts.is_empty() {
                p.intercepts = vec![0.0; k];
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub data: u64,
    pub nmds: u64,
    pub projection: u64,
}

impl Seeds {
    /// Three child seeds derived from one override value.
    pub fn from_override(seed: u64) -> Self {
        Seeds { data: derive_seed(seed, 1), nmds: derive_seed(seed, 2), projection: derive_seed(seed, 3) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NmdsSettings {
    pub dim: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for NmdsSettings {
    fn default() -> Self {
        let d = NmdsOptions::default();
        NmdsSettings { dim: d.dim, restarts: d.restarts, max_iter: d.max_iter, tol: d.tol }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropySettings {
    #[serde(default = "default_estimator")]
    pub estimator: Estimator,
    /// Neighbour order (`kl`) or `k_max` (`weighted`); filled in on parse.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub jitter: bool,
    #[serde(default)]
    pub standardize: bool,
}

fn default_estimator() -> Estimator {
    Estimator::Weighted
}

impl Default for EntropySettings {
    fn default() -> Self {
        EntropySettings { estimator: Estimator::Weighted, k: None, jitter: false, standardize: false }
    }
}

impl EntropySettings {
    pub fn options(&self) -> EntropyOptions {
        EntropyOptions { jitter: self.jitter, standardize: self.standardize }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectionSettings {
    pub quasi_random_starts: usize,
    pub max_iter: usize,
    pub grad_tol: f64,
}

impl Default for ProjectionSettings {
    fn default() -> Self {
        let d = ProjectionOptions::default();
        ProjectionSettings { quasi_random_starts: d.quasi_random_starts, max_iter: d.max_iter, grad_tol: d.grad_tol }
    }
}

fn default_output_dir() -> String {
    "out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    pub seeds: Seeds,
    pub generating: GeneratingSpec,
    #[serde(default)]
    pub nmds: NmdsSettings,
    #[serde(default)]
    pub entropy: EntropySettings,
    #[serde(default)]
    pub projection: ProjectionSettings,
    pub candidates: Vec<CandidateSpec>,
}

impl RunConfig {
    pub fn nmds_options(&self) -> NmdsOptions {
        NmdsOptions {
            dim: self.nmds.dim,
            restarts: self.nmds.restarts,
            max_iter: self.nmds.max_iter,
            tol: self.nmds.tol,
            seed: self.seeds.nmds,
        }
    }

    pub fn projection_options(&self) -> ProjectionOptions {
        ProjectionOptions {
            seed: self.seeds.projection,
            quasi_random_starts: self.projection.quasi_random_starts,
            max_iter: self.projection.max_iter,
            grad_tol: self.projection.grad_tol,
        }
    }

    pub fn with_seed_override(mut self, seed: u64) -> Self {
        self.seeds = Seeds::from_override(seed);
        self
    }

    /// Validates every invariant and fills in every default.
    pub fn validated(mut self) -> Result<Self> {
        let cfg_err = |field: &str, e: Error| Error::Config(format!("{field}: {e}"));
        self.generating.materialize();
        let process = self.generating.build().map_err(|e| cfg_err("generating", e))?;
        let vars = process.variables().to_vec();
        let p = vars.len();
        if self.n < 2 {
            return Err(Error::Config(format!("n: must be at least 2, got {}", self.n)));
        }
        for (i, c) in self.candidates.iter().enumerate() {
            c.resolve(&vars).map_err(|e| cfg_err(&format!("candidates[{i}] (`{}`)", c.name), e))?;
            let k = c.num_params(p);
            if self.n < k {
                return Err(Error::Config(format!(
                    "candidates[{i}] (`{}`): {k} parameters exceed n = {}",
                    c.name, self.n
                )));
            }
        }
        validate_model_set(&self.candidates).map_err(|e| cfg_err("candidates", e))?;
        if self.nmds.dim == 0 {
            return Err(Error::Config("nmds.dim: must be at least 1".into()));
        }
        if self.nmds.restarts == 0 {
            return Err(Error::Config("nmds.restarts: must be at least 1".into()));
        }
        if !(self.nmds.tol >= 0.0) {
            return Err(Error::Config("nmds.tol: must be nonnegative".into()));
        }
        let needed = (self.nmds.dim + 2).max(3);
        if self.candidates.len() < needed {
            return Err(Error::Config(format!(
                "candidates: need at least {needed} models for a {}-dimensional projection, have {}",
                self.nmds.dim,
                self.candidates.len()
            )));
        }
        let k = match (self.entropy.k, self.entropy.estimator) {
            (Some(k), _) => k,
            (None, Estimator::Kl) => 1,
            (None, Estimator::Weighted) => default_k_max(p, self.n),
        };
        if k == 0 || k > self.n - 1 {
            return Err(Error::Config(format!("entropy.k: must lie in 1..={}, got {k}", self.n - 1)));
        }
        self.entropy.k = Some(k);
        Ok(self)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        raw.validated()
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn process(&self) -> Result<GeneratingProcess> {
        self.generating.build()
    }
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    RunConfig::from_toml(&text)
}
