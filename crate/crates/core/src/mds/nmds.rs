//! Kruskal non-metric MDS by alternating monotone regression and Guttman
//! (majorization) updates.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::isotonic::isotonic_unit;
use super::{classical_mds, Embedding};
use crate::rng;
use crate::{Error, Result};

/// Stress values closer than this are ties, resolved by restart index.
const STRESS_TIE: f64 = 1e-12;
const RELAX: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NmdsOptions {
    pub dim: usize,
    /// Total number of starts: one classical-scaling start plus `restarts - 1` random ones.
    pub restarts: usize,
    pub max_iter: usize,
    /// Relative stress change below which a start is converged.
    pub tol: f64,
    pub seed: u64,
}

impl Default for NmdsOptions {
    fn default() -> Self {
        NmdsOptions { dim: 2, restarts: 8, max_iter: 500, tol: 1e-10, seed: 0 }
    }
}

struct Run {
    coords: DMatrix<f64>,
    stress: f64,
    converged: bool,
}

/// Pair bookkeeping: pairs `(i, j)` with `i < j`, sorted by `δ`, plus the
/// boundaries of tie blocks.
struct Pairs {
    pairs: Vec<(usize, usize)>,
    ties: Vec<(usize, usize)>,
}

impl Pairs {
    fn new(delta: &DMatrix<f64>) -> Self {
        let r = delta.nrows();
        let mut pairs: Vec<(usize, usize)> = (0..r).flat_map(|i| (i + 1..r).map(move |j| (i, j))).collect();
        pairs.sort_by(|a, b| delta[*a].total_cmp(&delta[*b]).then(a.cmp(b)));
        let mut ties = Vec::new();
        let mut start = 0;
        for k in 1..=pairs.len() {
            if k == pairs.len() || delta[pairs[k]] != delta[pairs[start]] {
                if k - start > 1 {
                    ties.push((start, k));
                }
                start = k;
            }
        }
        Pairs { pairs, ties }
    }

    /// Monotone-regression targets `d̂` for the current distances, in a
    /// full matrix, and the stress-1 of `(d, d̂)`.
    fn disparities(&self, dist: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
        let mut order = self.pairs.clone();
        // primary approach: tied δ may be reordered to agree with d
        for &(s, e) in &self.ties {
            order[s..e].sort_by(|a, b| dist[*a].total_cmp(&dist[*b]));
        }
        let d: Vec<f64> = order.iter().map(|p| dist[*p]).collect();
        let fit = isotonic_unit(&d);
        let r = dist.nrows();
        let mut dhat = DMatrix::zeros(r, r);
        let (mut num, mut den) = (0.0, 0.0);
        for (k, &(i, j)) in order.iter().enumerate() {
            dhat[(i, j)] = fit[k];
            dhat[(j, i)] = fit[k];
            num += (d[k] - fit[k]).powi(2);
            den += d[k] * d[k];
        }
        let stress = if den > 0.0 { (num / den).sqrt() } else { 1.0 };
        (dhat, stress)
    }
}

fn distances(x: &DMatrix<f64>) -> DMatrix<f64> {
    super::pairwise_distances(x)
}

fn center(x: &mut DMatrix<f64>) {
    for mut col in x.column_iter_mut() {
        let m = col.mean();
        col.add_scalar_mut(-m);
    }
}

/// Guttman transform `X⁺ = R⁻¹ B(X) X` for targets `dhat`.
fn guttman(x: &DMatrix<f64>, dist: &DMatrix<f64>, dhat: &DMatrix<f64>) -> DMatrix<f64> {
    let r = x.nrows();
    let mut b = DMatrix::zeros(r, r);
    for i in 0..r {
        let mut diag = 0.0;
        for j in 0..r {
            if i != j && dist[(i, j)] > 0.0 {
                let v = -dhat[(i, j)] / dist[(i, j)];
                b[(i, j)] = v;
                diag -= v;
            }
        }
        b[(i, i)] = diag;
    }
    (b * x) / r as f64
}

fn refine(pairs: &Pairs, mut x: DMatrix<f64>, opts: &NmdsOptions) -> Run {
    let r = x.nrows();
    let n_pairs = (r * (r - 1) / 2) as f64;
    // start at the scale of the normalized targets so the relaxed step is scale-free
    let ss: f64 = distances(&x).iter().map(|v| v * v).sum::<f64>() / 2.0;
    if ss > 0.0 {
        x *= (n_pairs / ss).sqrt();
    }
    let mut prev = f64::INFINITY;
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let dist = distances(&x);
        let (mut dhat, stress) = pairs.disparities(&dist);
        // normalize targets to a fixed total so the configuration cannot shrink away
        let ss: f64 = dhat.iter().map(|v| v * v).sum::<f64>() / 2.0;
        if ss > 0.0 {
            dhat *= (n_pairs / ss).sqrt();
        }
        // stress-1 itself need not fall every step; raw stress against the
        // normalized targets does, so convergence is judged on that
        let raw = (&dist - &dhat).norm_squared() / 2.0;
        if stress <= f64::EPSILON || (prev.is_finite() && prev - raw <= opts.tol * prev) {
            converged = true;
            break;
        }
        prev = raw;
        // over-relaxed step; any factor below 2 still decreases the majorizer
        let target = guttman(&x, &dist, &dhat);
        x = &x + (target - &x) * RELAX;
    }
    center(&mut x);
    let (_, stress) = pairs.disparities(&distances(&x));
    Run { coords: x, stress, converged }
}

fn validate(delta: &DMatrix<f64>) -> Result<()> {
    let r = delta.nrows();
    if delta.ncols() != r {
        return Err(Error::invalid("dissimilarity matrix must be square"));
    }
    if r < 3 {
        return Err(Error::invalid(format!("need at least 3 objects, have {r}")));
    }
    if delta.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::invalid("dissimilarities must be finite and nonnegative"));
    }
    if (0..r).any(|i| delta[(i, i)] != 0.0) {
        return Err(Error::invalid("dissimilarity matrix must have a zero diagonal"));
    }
    let scale = delta.amax();
    if scale == 0.0 {
        return Err(Error::invalid("all dissimilarities are zero"));
    }
    let asym = (delta - delta.transpose()).amax() / scale;
    if asym > 1e-12 {
        return Err(Error::Asymmetric(asym));
    }
    Ok(())
}

/// Non-metric MDS of a symmetric dissimilarity matrix.
///
/// The best of one classical-scaling start and `restarts - 1` random starts
/// (minimum stress, ties to the lower index) is centred and rescaled by
/// `s* = Σ δd / Σ d²` so embedded distances are in `δ` units.
/// Rows are processed in an order fixed by their own dissimilarities, so
/// relisting the models permutes the coordinates and changes nothing else.
pub fn nmds(delta: &DMatrix<f64>, names: Vec<String>, opts: &NmdsOptions) -> Result<Embedding> {
    validate(delta)?;
    let r = delta.nrows();
    if names.len() != r {
        return Err(Error::Dimension { expected: r, found: names.len() });
    }
    if opts.dim == 0 || opts.restarts == 0 {
        return Err(Error::invalid("NMDS needs dim >= 1 and restarts >= 1"));
    }
    // run in a canonical row order so the result does not depend on how the
    // models were listed; rows are keyed by their sorted dissimilarities
    let order = canonical_order(delta);
    let delta = &DMatrix::from_fn(r, r, |i, j| delta[(order[i], order[j])]);
    let pairs = Pairs::new(delta);
    let rms = (delta.iter().map(|v| v * v).sum::<f64>() / (r * (r - 1)) as f64).sqrt();
    let runs: Vec<Run> = (0..opts.restarts)
        .into_par_iter()
        .map(|start| {
            let x0 = if start == 0 {
                let mut c = classical_mds(delta, opts.dim).coords;
                if c.iter().all(|v| *v == 0.0) {
                    c = random_start(r, opts.dim, rms, opts.seed, 0);
                }
                c
            } else {
                random_start(r, opts.dim, rms, opts.seed, start as u64)
            };
            refine(&pairs, x0, opts)
        })
        .collect();
    let mut best = 0;
    for (k, run) in runs.iter().enumerate().skip(1) {
        if run.stress < runs[best].stress - STRESS_TIE {
            best = k;
        }
    }
    let Run { mut coords, stress, converged } = runs.into_iter().nth(best).expect("at least one start");
    let dist = distances(&coords);
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..r {
        for j in i + 1..r {
            num += delta[(i, j)] * dist[(i, j)];
            den += dist[(i, j)] * dist[(i, j)];
        }
    }
    let scale = if den > 0.0 { num / den } else { 1.0 };
    coords *= scale;
    let mut back = DMatrix::zeros(r, opts.dim);
    for (i, &o) in order.iter().enumerate() {
        back.set_row(o, &coords.row(i));
    }
    let coords = back;
    Ok(Embedding { names, coords, stress: stress.clamp(0.0, 1.0), scale, converged, restarts_used: opts.restarts })
}

fn canonical_order(delta: &DMatrix<f64>) -> Vec<usize> {
    let keys: Vec<Vec<f64>> = delta
        .row_iter()
        .map(|row| {
            let mut v: Vec<f64> = row.iter().copied().collect();
            v.sort_by(f64::total_cmp);
            v
        })
        .collect();
    let mut order: Vec<usize> = (0..delta.nrows()).collect();
    order.sort_by(|&a, &b| {
        keys[a].iter().zip(&keys[b]).map(|(x, y)| x.total_cmp(y)).find(|c| c.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    order
}

fn random_start(r: usize, dim: usize, rms: f64, seed: u64, index: u64) -> DMatrix<f64> {
    let mut rng = rng::stream(seed, index);
    DMatrix::from_fn(r, dim, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        rms * z
    })
}
