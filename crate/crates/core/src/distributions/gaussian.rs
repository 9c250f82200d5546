use std::f64::consts::{E, PI};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Sample;
use crate::rng::{self, Rng};
use crate::{Error, Result};

/// Relative tolerance under which an input covariance is silently symmetrized.
const SYMMETRY_TOL: f64 = 1e-12;

/// Multivariate normal distribution `N(mean, cov)`.
///
/// The covariance is validated on construction (symmetric, positive
/// definite) and its Cholesky factor is cached.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "GaussianRepr", into = "GaussianRepr")]
pub struct GaussianModel {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianRepr {
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

impl TryFrom<GaussianRepr> for GaussianModel {
    type Error = Error;

    fn try_from(repr: GaussianRepr) -> Result<Self> {
        let p = repr.mean.len();
        if repr.cov.len() != p || repr.cov.iter().any(|row| row.len() != p) {
            return Err(Error::invalid("covariance must be a p x p array matching the mean"));
        }
        let cov = DMatrix::from_fn(p, p, |i, j| repr.cov[i][j]);
        GaussianModel::new(DVector::from_vec(repr.mean), cov)
    }
}

impl From<GaussianModel> for GaussianRepr {
    fn from(g: GaussianModel) -> Self {
        let p = g.dim();
        GaussianRepr {
            mean: g.mean.iter().copied().collect(),
            cov: (0..p).map(|i| g.cov.row(i).iter().copied().collect()).collect(),
        }
    }
}

impl PartialEq for GaussianModel {
    fn eq(&self, other: &Self) -> bool {
        self.mean == other.mean && self.cov == other.cov
    }
}

impl GaussianModel {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let p = mean.len();
        if p == 0 {
            return Err(Error::invalid("Gaussian dimension must be at least 1"));
        }
        if cov.nrows() != p || cov.ncols() != p {
            return Err(Error::Dimension {
                expected: p,
                found: cov.nrows().max(cov.ncols()),
            });
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite entry in mean or covariance"));
        }
        let scale = cov.amax().max(f64::MIN_POSITIVE);
        let asym = (&cov - cov.transpose()).amax() / scale;
        if asym > SYMMETRY_TOL {
            return Err(Error::Asymmetric(asym));
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        let chol = Cholesky::new(cov.clone()).ok_or(Error::NotPositiveDefinite)?;
        if chol.l_dirty().diagonal().iter().any(|d| *d <= 0.0 || !d.is_finite()) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(GaussianModel { mean, cov, chol })
    }

    /// Standard normal in `p` dimensions.
    pub fn standard(p: usize) -> Result<Self> {
        Self::new(DVector::zeros(p), DMatrix::identity(p, p))
    }

    pub fn from_slices(mean: &[f64], cov_rows: &[&[f64]]) -> Result<Self> {
        let p = mean.len();
        if cov_rows.len() != p || cov_rows.iter().any(|r| r.len() != p) {
            return Err(Error::invalid("covariance must be p x p"));
        }
        Self::new(
            DVector::from_column_slice(mean),
            DMatrix::from_fn(p, p, |i, j| cov_rows[i][j]),
        )
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn ln_det_cov(&self) -> f64 {
        2.0 * self.chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }

    /// `ln f(x; mean, cov)`.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        let p = self.dim();
        if x.len() != p {
            return Err(Error::Dimension {
                expected: p,
                found: x.len(),
            });
        }
        Ok(self.log_density_unchecked(x.iter().copied()))
    }

    pub(crate) fn log_density_unchecked(&self, x: impl Iterator<Item = f64>) -> f64 {
        let p = self.dim();
        let mut z = DVector::from_iterator(p, x);
        z -= &self.mean;
        self.chol.l_dirty().solve_lower_triangular_mut(&mut z);
        -0.5 * (p as f64 * (2.0 * PI).ln() + self.ln_det_cov() + z.norm_squared())
    }

    /// Neg-selfentropy `Sgg = ∫ g ln g = -½ ln{(2πe)^p det Σ}`.
    ///
    /// The differential entropy is the negation of this value.
    pub fn neg_selfentropy(&self) -> f64 {
        -0.5 * (self.dim() as f64 * (2.0 * PI * E).ln() + self.ln_det_cov())
    }

    /// `KL(self || other) = ∫ self ln(self / other)`, natural-log scale.
    pub fn kl_to(&self, other: &GaussianModel) -> Result<f64> {
        let p = self.dim();
        if other.dim() != p {
            return Err(Error::Dimension {
                expected: p,
                found: other.dim(),
            });
        }
        let l_b = other.chol.l_dirty();
        // tr(Σb⁻¹ Σa) = ‖Lb⁻¹ La‖²_F
        let mut la = self.chol.l();
        l_b.solve_lower_triangular_mut(&mut la);
        let trace = la.norm_squared();
        let mut diff = &other.mean - &self.mean;
        l_b.solve_lower_triangular_mut(&mut diff);
        let maha = diff.norm_squared();
        let kl = 0.5 * (trace + maha - p as f64 + other.ln_det_cov() - self.ln_det_cov());
        Ok(kl.max(0.0))
    }

    /// Neg-crossentropy `Sgf = ∫ self ln other = Sgg - KL(self || other)`.
    pub fn neg_crossentropy(&self, other: &GaussianModel) -> Result<f64> {
        Ok(self.neg_selfentropy() - self.kl_to(other)?)
    }

    /// `n` independent draws as rows of an `n x p` matrix.
    pub fn draw(&self, n: usize, rng: &mut Rng) -> DMatrix<f64> {
        let p = self.dim();
        let l = self.chol.l();
        let mut out = DMatrix::zeros(n, p);
        let mut z = DVector::zeros(p);
        for i in 0..n {
            for v in z.iter_mut() {
                *v = StandardNormal.sample(rng);
            }
            let x = &l * &z + &self.mean;
            out.row_mut(i).tr_copy_from(&x);
        }
        out
    }

    /// Seeded sample with default variable names `x1..xp`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Sample> {
        let mut rng = rng::seeded(seed);
        Sample::with_default_names(self.draw(n, &mut rng))
    }
}

pub fn log_density(model: &GaussianModel, x: &[f64]) -> Result<f64> {
    model.log_density(x)
}

pub fn kl_gaussian(a: &GaussianModel, b: &GaussianModel) -> Result<f64> {
    a.kl_to(b)
}

/// Neg-selfentropy `Sgg` of a Gaussian; see [`GaussianModel::neg_selfentropy`].
pub fn entropy_gaussian(model: &GaussianModel) -> f64 {
    model.neg_selfentropy()
}
