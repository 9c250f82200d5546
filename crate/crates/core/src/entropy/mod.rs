//! Nonparametric estimation of the neg-selfentropy `Sgg` from raw data.
//!
//! The base estimator is the Kozachenko–Leonenko k-nearest-neighbour form
//!
//! ```text
//! Ĥ = ψ(n) - ψ(k) + ln V_d + (d/n) Σᵢ ln ρ_{k,i}
//! ```
//!
//! with `V_d` the volume of the unit `d`-ball. The weighted variant combines
//! `Ĥ⁽¹⁾..Ĥ⁽ᵏ⁾` with weights that cancel the leading bias terms, which
//! matters for `d ≥ 4`. `Sgg = -Ĥ`.

mod digamma;
mod kdtree;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

pub use digamma::digamma;
pub use kdtree::KdTree;

use crate::distributions::Sample;
use crate::rng;
use crate::{Error, Result};

/// Below this many points the neighbour search is a plain scan.
const BRUTE_FORCE_BELOW: usize = 64;

/// Seed of the optional de-duplication jitter.
const JITTER_SEED: u64 = 0x6a69_7474_6572;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// Kozachenko–Leonenko with a single neighbour order `k`.
    Kl,
    /// Bias-cancelling weighted combination over `k = 1..k_max`.
    Weighted,
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Estimator::Kl => "kl",
            Estimator::Weighted => "weighted",
        })
    }
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kl" => Ok(Estimator::Kl),
            "weighted" => Ok(Estimator::Weighted),
            other => Err(Error::invalid(format!("estimator must be `kl` or `weighted`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntropyOptions {
    /// Add deterministic jitter of size 1e-9 x data scale instead of failing on duplicates.
    pub jitter: bool,
    /// Estimate on standardized columns, then correct back by `Σ ln s_j`.
    pub standardize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    /// Neg-selfentropy estimate, `-h_hat`.
    pub sgg_hat: f64,
    /// Differential entropy estimate.
    pub h_hat: f64,
    pub k: usize,
    pub n: usize,
    pub d: usize,
    pub estimator: Estimator,
    /// Weights over `k = 1..`, for the weighted estimator.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<f64>,
    /// Set when the weighted system was infeasible and the plain estimator was used.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub fallback: bool,
}

impl EntropyEstimate {
    fn new(h_hat: f64, k: usize, n: usize, d: usize, estimator: Estimator) -> Self {
        EntropyEstimate {
            sgg_hat: -h_hat,
            h_hat,
            k,
            n,
            d,
            estimator,
            weights: Vec::new(),
            fallback: false,
        }
    }
}

/// `ln V_d`, the log volume of the unit Euclidean ball.
pub fn ln_unit_ball_volume(d: usize) -> f64 {
    0.5 * d as f64 * PI.ln() - ln_gamma(0.5 * d as f64 + 1.0)
}

pub fn default_k_max(d: usize, n: usize) -> usize {
    (d.div_ceil(2) * 3).min(n - 1).max(1)
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n - 1 {
        return Err(Error::invalid(format!("neighbour order k = {k} must lie in 1..={}", n - 1)));
    }
    Ok(())
}

/// Squared distances from every point to its `k_max` nearest other points.
fn neighbour_table(points: &[f64], d: usize, k_max: usize) -> Result<Vec<Vec<f64>>> {
    let n = points.len() / d;
    let rows: Vec<Vec<f64>> = if n < BRUTE_FORCE_BELOW {
        (0..n).into_par_iter().map(|i| kdtree::knn_brute(points, d, i, k_max)).collect()
    } else {
        let tree = KdTree::new(points, d);
        (0..n).into_par_iter().map(|i| tree.knn_excluding(i, k_max)).collect()
    };
    if let Some(i) = rows.iter().position(|r| r[0] == 0.0) {
        let q = &points[i * d..(i + 1) * d];
        let j = (0..n)
            .find(|&j| j != i && kdtree::sq_dist(q, &points[j * d..(j + 1) * d]) == 0.0)
            .expect("zero distance implies a duplicate");
        return Err(Error::DuplicatePoints(i.min(j), i.max(j)));
    }
    Ok(rows)
}

/// Euclidean distance from each point to its `k`-th nearest other point.
pub fn knn_distances(sample: &Sample, k: usize) -> Result<Vec<f64>> {
    check_k(k, sample.n())?;
    let table = neighbour_table(&sample.row_major(), sample.p(), k)?;
    Ok(table.into_iter().map(|r| r[k - 1].sqrt()).collect())
}

/// Prepared point cloud plus the log-Jacobian to add back to `Ĥ`.
fn prepare(sample: &Sample, opts: EntropyOptions) -> (Vec<f64>, f64) {
    let d = sample.p();
    let mut points = sample.row_major();
    let mut log_jacobian = 0.0;
    if opts.standardize {
        for j in 0..d {
            let col = sample.data().column(j);
            let mean = col.mean();
            let sd = (col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (col.len() - 1) as f64).sqrt();
            if sd > 0.0 {
                for row in points.chunks_mut(d) {
                    row[j] /= sd;
                }
                log_jacobian += sd.ln();
            }
        }
    }
    if opts.jitter {
        let scale = points.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let mut rng = rng::seeded(JITTER_SEED);
        for v in points.iter_mut() {
            *v += 1e-9 * scale * rng.random_range(-1.0..1.0);
        }
    }
    (points, log_jacobian)
}

fn kl_from_table(table: &[Vec<f64>], k: usize, d: usize) -> f64 {
    let n = table.len();
    // ln ρ = ½ ln ρ²
    let sum_ln: f64 = table.iter().map(|r| 0.5 * r[k - 1].ln()).sum();
    digamma(n as f64) - digamma(k as f64) + ln_unit_ball_volume(d) + d as f64 * sum_ln / n as f64
}

pub fn entropy_kl(sample: &Sample, k: usize) -> Result<EntropyEstimate> {
    entropy_kl_with(sample, k, EntropyOptions::default())
}

pub fn entropy_kl_with(sample: &Sample, k: usize, opts: EntropyOptions) -> Result<EntropyEstimate> {
    let (n, d) = (sample.n(), sample.p());
    check_k(k, n)?;
    let (points, log_jacobian) = prepare(sample, opts);
    let table = neighbour_table(&points, d, k)?;
    let h = kl_from_table(&table, k, d) + log_jacobian;
    Ok(EntropyEstimate::new(h, k, n, d, Estimator::Kl))
}

/// Minimum-norm weights over `k = 1..k_max` with `Σ w = 1` and
/// `Σ_k w_k Γ(k + 2l/d)/Γ(k) = 0` for `l = 1..⌊d/4⌋`.
///
/// `None` when the system has no solution for this `k_max`.
pub fn bias_cancelling_weights(d: usize, k_max: usize) -> Option<Vec<f64>> {
    let constraints = d / 4;
    if k_max < constraints + 1 {
        return None;
    }
    let rows = constraints + 1;
    let a = DMatrix::from_fn(rows, k_max, |l, j| {
        if l == 0 {
            1.0
        } else {
            let k = (j + 1) as f64;
            (ln_gamma(k + 2.0 * l as f64 / d as f64) - ln_gamma(k)).exp()
        }
    });
    let mut b = DVector::zeros(rows);
    b[0] = 1.0;
    // min-norm solution via QR of Aᵀ: w = Q R⁻ᵀ b
    let qr = a.transpose().qr();
    let r = qr.r();
    if (0..rows).any(|i| !(r[(i, i)].abs() > 1e-12 * r.amax())) {
        return None;
    }
    let y = r.transpose().solve_lower_triangular(&b)?;
    let w = qr.q() * y;
    w.iter().all(|v| v.is_finite()).then(|| w.iter().copied().collect())
}

pub fn entropy_weighted(sample: &Sample, k_max: usize) -> Result<EntropyEstimate> {
    entropy_weighted_with(sample, k_max, EntropyOptions::default())
}

pub fn entropy_weighted_with(sample: &Sample, k_max: usize, opts: EntropyOptions) -> Result<EntropyEstimate> {
    let (n, d) = (sample.n(), sample.p());
    check_k(k_max, n)?;
    if k_max == 1 || d <= 3 {
        let mut est = entropy_kl_with(sample, k_max, opts)?;
        est.estimator = Estimator::Weighted;
        est.weights = one_hot(k_max);
        return Ok(est);
    }
    let Some(weights) = bias_cancelling_weights(d, k_max) else {
        let mut est = entropy_kl_with(sample, 1, opts)?;
        est.fallback = true;
        return Ok(est);
    };
    let (points, log_jacobian) = prepare(sample, opts);
    let table = neighbour_table(&points, d, k_max)?;
    let h = weights
        .iter()
        .enumerate()
        .map(|(j, w)| w * kl_from_table(&table, j + 1, d))
        .sum::<f64>()
        + log_jacobian;
    let mut est = EntropyEstimate::new(h, k_max, n, d, Estimator::Weighted);
    est.weights = weights;
    Ok(est)
}

fn one_hot(k: usize) -> Vec<f64> {
    let mut w = vec![0.0; k];
    w[k - 1] = 1.0;
    w
}

/// Dispatch on `estimator`; `k` is the neighbour order (or `k_max`), with
/// the documented default when `None`.
pub fn estimate(sample: &Sample, estimator: Estimator, k: Option<usize>, opts: EntropyOptions) -> Result<EntropyEstimate> {
    match estimator {
        Estimator::Kl => entropy_kl_with(sample, k.unwrap_or(1), opts),
        Estimator::Weighted => {
            let k_max = k.unwrap_or_else(|| default_k_max(sample.p(), sample.n()));
            entropy_weighted_with(sample, k_max, opts)
        }
    }
}
