use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mds::Embedding;
use crate::rng;
use crate::{Error, Result};

/// Relative singular value below which embedded coordinates are degenerate.
const COLLINEAR_TOL: f64 = 1e-8;
const HALTON_BASES: [u32; 10] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectionOptions {
    pub seed: u64,
    /// Quasi-random starts in the expanded bounding box.
    pub quasi_random_starts: usize,
    pub max_iter: usize,
    pub grad_tol: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions { seed: 0, quasi_random_starts: 16, max_iter: 1000, grad_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    /// Estimated projection of the generating process.
    pub m: Vec<f64>,
    /// Squared off-plane discrepancy, clamped at zero.
    pub h2: f64,
    /// `sgg_used - mean(ŝgfᵢ + dᵢ²)` before clamping.
    pub h2_unclamped: f64,
    pub sgg_used: f64,
    /// Estimated `KL(g, fᵢ) = h² + dᵢ²`.
    pub kl_to_g: Vec<f64>,
    pub objective_value: f64,
    pub clamped: bool,
    /// Coordinates were degenerate and the solve ran in their span.
    pub collinear: bool,
    pub converged: bool,
}

impl ProjectionResult {
    pub fn h(&self) -> f64 {
        self.h2.sqrt()
    }
}

/// `tᵢ(m) = -ŝgfᵢ - dᵢ(m)²` for every model.
fn levels(m: &[f64], sgf_hats: &[f64], coords: &DMatrix<f64>) -> Vec<f64> {
    sgf_hats
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let d2: f64 = coords.row(i).iter().zip(m).map(|(c, x)| (c - x) * (c - x)).sum();
            -s - d2
        })
        .collect()
}

fn deviations(t: &[f64]) -> Vec<f64> {
    let mean = t.iter().sum::<f64>() / t.len() as f64;
    t.iter().map(|v| v - mean).collect()
}

fn check_inputs(m: &[f64], sgf_hats: &[f64], e: &Embedding) -> Result<()> {
    if sgf_hats.len() != e.len() {
        return Err(Error::Dimension { expected: e.len(), found: sgf_hats.len() });
    }
    if m.len() != e.dim() {
        return Err(Error::Dimension { expected: e.dim(), found: m.len() });
    }
    Ok(())
}

/// `Σ_{i<j} (tᵢ - tⱼ)²`, evaluated as `R Σ (tᵢ - t̄)²`.
pub fn projection_objective(m: &[f64], sgf_hats: &[f64], e: &Embedding) -> Result<f64> {
    check_inputs(m, sgf_hats, e)?;
    Ok(objective(m, sgf_hats, &e.coords))
}

fn objective(m: &[f64], sgf_hats: &[f64], coords: &DMatrix<f64>) -> f64 {
    let dev = deviations(&levels(m, sgf_hats, coords));
    sgf_hats.len() as f64 * dev.iter().map(|v| v * v).sum::<f64>()
}

/// Analytic gradient `4R Σ (tᵢ - t̄)(cᵢ - m)`.
pub fn projection_gradient(m: &[f64], sgf_hats: &[f64], e: &Embedding) -> Result<Vec<f64>> {
    check_inputs(m, sgf_hats, e)?;
    Ok(gradient(m, sgf_hats, &e.coords))
}

fn gradient(m: &[f64], sgf_hats: &[f64], coords: &DMatrix<f64>) -> Vec<f64> {
    let r = sgf_hats.len() as f64;
    let dev = deviations(&levels(m, sgf_hats, coords));
    (0..m.len())
        .map(|c| 4.0 * r * dev.iter().enumerate().map(|(i, t)| t * (coords[(i, c)] - m[c])).sum::<f64>())
        .collect()
}

/// Affine parametrization `m = origin + basis · z`.
struct Subspace {
    origin: DVector<f64>,
    basis: DMatrix<f64>,
}

impl Subspace {
    fn to_m(&self, z: &DVector<f64>) -> Vec<f64> {
        (&self.origin + &self.basis * z).iter().copied().collect()
    }

    fn to_z(&self, m: &[f64]) -> DVector<f64> {
        self.basis.transpose() * (DVector::from_column_slice(m) - &self.origin)
    }
}

/// Full space, or the span of the centred coordinates when they are degenerate.
fn subspace(coords: &DMatrix<f64>) -> (Subspace, bool) {
    let dim = coords.ncols();
    let centroid = DVector::from_iterator(dim, coords.column_iter().map(|c| c.mean()));
    let mut centred = coords.clone();
    for (c, mut col) in centred.column_iter_mut().enumerate() {
        col.add_scalar_mut(-centroid[c]);
    }
    let svd = centred.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let s_max = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > COLLINEAR_TOL * s_max)
        .collect();
    if keep.len() == dim {
        return (Subspace { origin: DVector::zeros(dim), basis: DMatrix::identity(dim, dim) }, false);
    }
    let mut basis = DMatrix::zeros(dim, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        basis.set_column(c, &v_t.row(k).transpose());
    }
    (Subspace { origin: centroid, basis }, true)
}

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut f = 1.0 / b;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % base as u64) as f64;
        i /= base as u64;
        f /= b;
    }
    out
}

/// Centroid, optional extra start, then Halton points (randomly shifted by
/// `seed`) in the bounding box of the coordinates expanded 2x about its centre.
fn starts(coords: &DMatrix<f64>, extra: Option<&[f64]>, opts: &ProjectionOptions) -> Vec<Vec<f64>> {
    let dim = coords.ncols();
    let mut out = Vec::new();
    if let Some(a) = extra {
        out.push(a.to_vec());
    }
    out.push(coords.column_iter().map(|c| c.mean()).collect());
    let mut rng = rng::seeded(opts.seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    for i in 1..=opts.quasi_random_starts as u64 {
        let point = (0..dim)
            .map(|c| {
                let u = if c < HALTON_BASES.len() {
                    (radical_inverse(i, HALTON_BASES[c]) + shift[c]).fract()
                } else {
                    rng.random::<f64>()
                };
                let col = coords.column(c);
                let (lo, hi) = (col.min(), col.max());
                let mid = 0.5 * (lo + hi);
                mid + (u - 0.5) * 2.0 * (hi - lo)
            })
            .collect();
        out.push(point);
    }
    out
}

struct Descent {
    z: DVector<f64>,
    value: f64,
    converged: bool,
}

/// BFGS with backtracking (Armijo) line search.
fn bfgs(
    f: impl Fn(&DVector<f64>) -> f64,
    grad: impl Fn(&DVector<f64>) -> DVector<f64>,
    z0: DVector<f64>,
    max_iter: usize,
    grad_tol: f64,
) -> Descent {
    let q = z0.len();
    let mut z = z0;
    let mut fz = f(&z);
    let mut g = grad(&z);
    let mut h_inv = DMatrix::<f64>::identity(q, q);
    let mut first = true;
    for _ in 0..max_iter {
        if g.norm() < grad_tol {
            return Descent { z, value: fz, converged: true };
        }
        let mut dir = -(&h_inv * &g);
        let mut slope = g.dot(&dir);
        if slope >= 0.0 {
            h_inv = DMatrix::identity(q, q);
            dir = -g.clone();
            slope = -g.norm_squared();
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand = &z + &dir * step;
            let fc = f(&cand);
            if fc <= fz + 1e-4 * step * slope {
                accepted = Some((cand, fc, None));
                break;
            }
            // below the resolution of f the gradient still knows the way
            if (fc - fz).abs() <= 4.0 * f64::EPSILON * fz.abs() {
                let gc = grad(&cand);
                if gc.norm() < g.norm() {
                    accepted = Some((cand, fc, Some(gc)));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((z_new, f_new, g_new)) = accepted else {
            // no representable progress in either f or the gradient
            let converged = g.norm() < grad_tol.sqrt();
            return Descent { z, value: fz, converged };
        };
        let g_new = g_new.unwrap_or_else(|| grad(&z_new));
        let s = &z_new - &z;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-300 {
            if first {
                h_inv *= sy / y.norm_squared();
                first = false;
            }
            let rho = 1.0 / sy;
            let eye = DMatrix::<f64>::identity(q, q);
            let left = &eye - &s * y.transpose() * rho;
            let right = &eye - &y * s.transpose() * rho;
            h_inv = left * h_inv * right + &s * s.transpose() * rho;
        }
        z = z_new;
        fz = f_new;
        g = g_new;
    }
    let converged = g.norm() < grad_tol;
    Descent { z, value: fz, converged }
}

/// Minimizes the level-spread objective over `m` (multistart BFGS), then
/// recovers `h²` from `sgg_hat`.
///
/// `extra_start` is typically the model-average location.
pub fn solve_projection(
    sgf_hats: &[f64],
    e: &Embedding,
    sgg_hat: f64,
    extra_start: Option<&[f64]>,
    opts: &ProjectionOptions,
) -> Result<ProjectionResult> {
    let r = e.len();
    let dim = e.dim();
    if sgf_hats.len() != r {
        return Err(Error::Dimension { expected: r, found: sgf_hats.len() });
    }
    if r < dim + 2 {
        return Err(Error::NonIdentifiable { models: r, dim, needed: dim + 2 });
    }
    if sgf_hats.iter().any(|s| !s.is_finite()) || !sgg_hat.is_finite() {
        return Err(Error::invalid("non-finite Sgf or Sgg input"));
    }
    if let Some(a) = extra_start {
        if a.len() != dim {
            return Err(Error::Dimension { expected: dim, found: a.len() });
        }
    }
    let coords = &e.coords;
    let (space, collinear) = subspace(coords);
    let f = |z: &DVector<f64>| objective(&space.to_m(z), sgf_hats, coords);
    let grad = |z: &DVector<f64>| {
        let g = DVector::from_vec(gradient(&space.to_m(z), sgf_hats, coords));
        space.basis.transpose() * g
    };
    let runs: Vec<Descent> = starts(coords, extra_start, opts)
        .par_iter()
        .map(|s| bfgs(f, grad, space.to_z(s), opts.max_iter, opts.grad_tol))
        .collect();
    let mut best = 0;
    for (k, run) in runs.iter().enumerate().skip(1) {
        if run.value < runs[best].value {
            best = k;
        }
    }
    let run = &runs[best];
    let m = space.to_m(&run.z);
    let d2: Vec<f64> = (0..r)
        .map(|i| coords.row(i).iter().zip(&m).map(|(c, x)| (c - x) * (c - x)).sum())
        .collect();
    let mean_level = sgf_hats.iter().zip(&d2).map(|(s, d)| s + d).sum::<f64>() / r as f64;
    let h2_unclamped = sgg_hat - mean_level;
    let clamped = h2_unclamped < 0.0;
    let h2 = h2_unclamped.max(0.0);
    Ok(ProjectionResult {
        kl_to_g: d2.iter().map(|d| h2 + d).collect(),
        m,
        h2,
        h2_unclamped,
        sgg_used: sgg_hat,
        objective_value: run.value,
        clamped,
        collinear,
        converged: run.converged,
    })
}
