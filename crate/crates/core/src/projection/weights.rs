use serde::{Deserialize, Serialize};

use crate::mds::Embedding;
use crate::{Error, Result};

/// Akaike weights and the weighted location they imply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AverageResult {
    pub weights: Vec<f64>,
    pub location: Vec<f64>,
}

/// `wᵢ = exp(-Δᵢ/2) / Σ exp(-Δᵣ/2)` with `Δᵢ = AICᵢ - min AIC`.
pub fn akaike_weights(aics: &[f64]) -> Result<Vec<f64>> {
    if aics.is_empty() {
        return Err(Error::invalid("no AIC values"));
    }
    if aics.iter().any(|a| !a.is_finite()) {
        return Err(Error::invalid("non-finite AIC value"));
    }
    let min = aics.iter().copied().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = aics.iter().map(|a| (-(a - min) / 2.0).exp()).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// `Σ wᵢ · coordsᵢ`.
pub fn model_average_location(e: &Embedding, weights: &[f64]) -> Result<AverageResult> {
    if weights.len() != e.len() {
        return Err(Error::Dimension { expected: e.len(), found: weights.len() });
    }
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::invalid("weights must be finite and nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("weights sum to {total}, not 1")));
    }
    let location = (0..e.dim())
        .map(|c| weights.iter().enumerate().map(|(i, w)| w * e.coords[(i, c)]).sum())
        .collect();
    Ok(AverageResult { weights: weights.to_vec(), location })
}
