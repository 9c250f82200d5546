//! File formats shared by the subcommands: JSON documents with stable key
//! order and shortest round-trip floats, CSV with a header row and LF endings.

use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::mds::Embedding;
use crate::model_fit::FitRecord;
use crate::projection::{AverageResult, ProjectionResult};
use crate::{Error, Result};

/// Akaike weights keyed by model name, with the averaged location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedAverage {
    pub weights: IndexMap<String, f64>,
    pub location: Vec<f64>,
}

impl NamedAverage {
    pub fn new(names: &[String], avg: &AverageResult) -> Self {
        NamedAverage {
            weights: names.iter().cloned().zip(avg.weights.iter().copied()).collect(),
            location: avg.location.clone(),
        }
    }
}

/// Output of `project`: the projection with model-named divergences, plus
/// the Akaike-weight average over the same models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionReport {
    pub m: Vec<f64>,
    pub h2: f64,
    pub h: f64,
    pub h2_unclamped: f64,
    pub sgg_used: f64,
    pub kl_to_g: IndexMap<String, f64>,
    pub objective_value: f64,
    pub clamped: bool,
    pub collinear: bool,
    pub converged: bool,
    pub average: NamedAverage,
}

impl ProjectionReport {
    pub fn new(names: &[String], p: &ProjectionResult, avg: &AverageResult) -> Self {
        ProjectionReport {
            m: p.m.clone(),
            h2: p.h2,
            h: p.h(),
            h2_unclamped: p.h2_unclamped,
            sgg_used: p.sgg_used,
            kl_to_g: names.iter().cloned().zip(p.kl_to_g.iter().copied()).collect(),
            objective_value: p.objective_value,
            clamped: p.clamped,
            collinear: p.collinear,
            converged: p.converged,
            average: NamedAverage::new(names, avg),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn open_reader(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| Error::Invalid(format!("cannot open {}: {e}", path.display())))
}

/// Reorders fit records to follow `names`; every name must be present.
pub fn align_fits(names: &[String], fits: &[FitRecord]) -> Result<Vec<FitRecord>> {
    names
        .iter()
        .map(|n| {
            fits.iter()
                .find(|f| &f.name == n)
                .cloned()
                .ok_or_else(|| Error::invalid(format!("no fit record for embedded model `{n}`")))
        })
        .collect()
}

/// AICs and `Ŝgf` values in embedding order.
pub fn fit_columns(e: &Embedding, fits: &[FitRecord]) -> Result<(Vec<f64>, Vec<f64>)> {
    let aligned = align_fits(&e.names, fits)?;
    Ok((aligned.iter().map(|f| f.aic).collect(), aligned.iter().map(|f| f.sgf_hat).collect()))
}
