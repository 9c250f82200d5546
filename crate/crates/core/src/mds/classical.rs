use nalgebra::{DMatrix, SymmetricEigen};

/// Result of classical (Torgerson) scaling.
#[derive(Debug, Clone)]
pub struct ClassicalMds {
    /// `R x dim` coordinates.
    pub coords: DMatrix<f64>,
    /// Eigenvalues of the double-centred matrix, descending.
    pub eigenvalues: Vec<f64>,
    /// Fewer than `dim` positive eigenvalues; trailing columns are zero.
    pub padded: bool,
}

/// Double-centres `-½ δ²` and keeps the top `dim` eigenvectors scaled by
/// `sqrt(max(λ, 0))`.
pub fn classical_mds(delta: &DMatrix<f64>, dim: usize) -> ClassicalMds {
    let r = delta.nrows();
    let sq = delta.map(|v| v * v);
    let row_means: Vec<f64> = (0..r).map(|i| sq.row(i).mean()).collect();
    let grand = row_means.iter().sum::<f64>() / r as f64;
    let b = DMatrix::from_fn(r, r, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let top = eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    let positive = eigenvalues.iter().filter(|&&l| l > 1e-12 * top.max(f64::MIN_POSITIVE)).count();
    let mut coords = DMatrix::zeros(r, dim);
    for (c, &idx) in order.iter().take(dim.min(r)).enumerate() {
        if c >= positive {
            break;
        }
        let scale = eig.eigenvalues[idx].max(0.0).sqrt();
        let mut v = eig.eigenvectors.column(idx).into_owned();
        // deterministic sign: largest-magnitude entry positive
        let pivot = v.iamax();
        if v[pivot] < 0.0 {
            v.neg_mut();
        }
        coords.set_column(c, &(v * scale));
    }
    ClassicalMds { coords, eigenvalues, padded: positive < dim }
}
