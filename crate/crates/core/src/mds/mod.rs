//! Model space construction: divergence matrices, dissimilarities and the
//! non-metric MDS embedding.
//!
//! KL divergences are read as squared distances, so the embedding is built
//! from `δᵢⱼ = sqrt((KLᵢⱼ + KLⱼᵢ)/2)` and rescaled after NMDS so embedded
//! distances are in `δ` units.

mod classical;
mod isotonic;
mod nmds;

use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use classical::{classical_mds, ClassicalMds};
pub use isotonic::isotonic_regression;
pub use nmds::{nmds, NmdsOptions};

use crate::distributions::GaussianModel;
use crate::model_fit::FittedModel;
use crate::{Error, Result};

/// `R x R` matrix of inter-model KL divergences, `values[(i, j)] = KL(fᵢ || fⱼ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceMatrix {
    values: DMatrix<f64>,
    names: Vec<String>,
}

impl DivergenceMatrix {
    pub fn new(values: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        let r = values.nrows();
        if values.ncols() != r {
            return Err(Error::invalid("divergence matrix must be square"));
        }
        if names.len() != r {
            return Err(Error::Dimension { expected: r, found: names.len() });
        }
        if r < 3 {
            return Err(Error::invalid(format!("need at least 3 models, have {r}")));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("divergences must be finite and nonnegative"));
        }
        if (0..r).any(|i| values[(i, i)] != 0.0) {
            return Err(Error::invalid("divergence matrix must have a zero diagonal"));
        }
        Ok(DivergenceMatrix { values, names })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// `max |KLᵢⱼ - KLⱼᵢ|`.
    pub fn asymmetry(&self) -> f64 {
        (&self.values - self.values.transpose()).amax()
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut values = Vec::new();
        let mut rows = 0;
        for record in rdr.records() {
            for field in record?.iter() {
                values.push(
                    field
                        .trim()
                        .parse::<f64>()
                        .map_err(|_| Error::invalid(format!("`{field}` is not a number")))?,
                );
            }
            rows += 1;
        }
        if rows != names.len() {
            return Err(Error::invalid(format!("matrix has {rows} rows but {} columns", names.len())));
        }
        Self::new(DMatrix::from_row_slice(rows, rows, &values), names)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        wtr.write_record(&self.names)?;
        for row in self.values.row_iter() {
            wtr.write_record(row.iter().map(|v| v.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Exact closed-form divergences between the given Gaussians.
pub fn divergence_matrix_from(names: Vec<String>, models: &[GaussianModel]) -> Result<DivergenceMatrix> {
    if names.len() != models.len() {
        return Err(Error::Dimension { expected: models.len(), found: names.len() });
    }
    let r = models.len();
    let mut values = DMatrix::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            if i != j {
                values[(i, j)] = models[i].kl_to(&models[j])?;
            }
        }
    }
    DivergenceMatrix::new(values, names)
}

/// Divergences between the predictive Gaussians of fitted models.
pub fn divergence_matrix(models: &[FittedModel]) -> Result<DivergenceMatrix> {
    let names = models.iter().map(|m| m.name().to_string()).collect();
    let preds: Vec<GaussianModel> = models.iter().map(|m| m.predictive().clone()).collect();
    divergence_matrix_from(names, &preds)
}

/// Symmetrized dissimilarities `δᵢⱼ = sqrt((KLᵢⱼ + KLⱼᵢ)/2)`.
pub fn dissimilarities(dm: &DivergenceMatrix) -> DMatrix<f64> {
    let v = dm.values();
    let r = dm.len();
    DMatrix::from_fn(r, r, |i, j| if i == j { 0.0 } else { (0.5 * (v[(i, j)] + v[(j, i)])).sqrt() })
}

/// Euclidean distances between the rows of `coords`.
pub fn pairwise_distances(coords: &DMatrix<f64>) -> DMatrix<f64> {
    let r = coords.nrows();
    DMatrix::from_fn(r, r, |i, j| (coords.row(i) - coords.row(j)).norm())
}

/// Embedded model space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EmbeddingRepr", into = "EmbeddingRepr")]
pub struct Embedding {
    pub names: Vec<String>,
    /// `R x dim`, column-centred, in `δ` units.
    pub coords: DMatrix<f64>,
    /// Kruskal stress-1 in `[0, 1]`.
    pub stress: f64,
    /// Factor applied to the NMDS solution to express distances in `δ` units.
    pub scale: f64,
    pub converged: bool,
    pub restarts_used: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingRepr {
    names: Vec<String>,
    coords: Vec<Vec<f64>>,
    dim: usize,
    stress: f64,
    stress_percent: f64,
    scale: f64,
    converged: bool,
    restarts_used: usize,
}

impl From<Embedding> for EmbeddingRepr {
    fn from(e: Embedding) -> Self {
        EmbeddingRepr {
            coords: e.coords.row_iter().map(|r| r.iter().copied().collect()).collect(),
            dim: e.dim(),
            stress: e.stress,
            stress_percent: 100.0 * e.stress,
            scale: e.scale,
            converged: e.converged,
            restarts_used: e.restarts_used,
            names: e.names,
        }
    }
}

impl TryFrom<EmbeddingRepr> for Embedding {
    type Error = Error;

    fn try_from(r: EmbeddingRepr) -> Result<Self> {
        if r.coords.len() != r.names.len() || r.coords.iter().any(|c| c.len() != r.dim) {
            return Err(Error::invalid("embedding coords must be names.len() rows of dim values"));
        }
        let coords = DMatrix::from_fn(r.names.len(), r.dim, |i, j| r.coords[i][j]);
        Embedding::from_coords(r.names, coords).map(|mut e| {
            e.stress = r.stress;
            e.scale = r.scale;
            e.converged = r.converged;
            e.restarts_used = r.restarts_used;
            e
        })
    }
}

impl Embedding {
    /// Wraps externally supplied coordinates (stress 0, unit scale).
    pub fn from_coords(names: Vec<String>, coords: DMatrix<f64>) -> Result<Self> {
        if names.len() != coords.nrows() {
            return Err(Error::Dimension { expected: coords.nrows(), found: names.len() });
        }
        if coords.ncols() == 0 {
            return Err(Error::invalid("embedding dimension must be at least 1"));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite embedding coordinate"));
        }
        Ok(Embedding { names, coords, stress: 0.0, scale: 1.0, converged: true, restarts_used: 0 })
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.nrows() == 0
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.coords.row(i).iter().copied().collect()
    }

    /// Coordinates restricted to the rows in `keep`, in that order. Not re-centred.
    pub fn subset(&self, keep: &[usize]) -> Embedding {
        Embedding {
            names: keep.iter().map(|&i| self.names[i].clone()).collect(),
            coords: self.coords.select_rows(keep),
            ..self.clone()
        }
    }
}

/// Euclidean distance between model `i` and `point`.
pub fn embed_distance(e: &Embedding, i: usize, point: &[f64]) -> Result<f64> {
    if point.len() != e.dim() {
        return Err(Error::Dimension { expected: e.dim(), found: point.len() });
    }
    if i >= e.len() {
        return Err(Error::invalid(format!("model index {i} out of range")));
    }
    Ok(e.coords.row(i).iter().zip(point).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}
