//! Embed a set of Gaussian models by non-metric scaling of their divergences.
//!
//! ```bash
//! cargo run --example model_space_nmds
//! ```

use modelproj::distributions::GaussianModel;
use modelproj::mds::{dissimilarities, divergence_matrix_from, nmds, pairwise_distances, NmdsOptions};

fn main() -> modelproj::Result<()> {
    // Unit-covariance models whose means sit on a 3 x 3 grid: the symmetrized
    // divergence is half the squared mean distance, so the space is exactly planar.
    let mut names = Vec::new();
    let mut models = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            names.push(format!("g{i}{j}"));
            models.push(GaussianModel::from_slices(&[i as f64, 0.5 * j as f64], &[&[1.0, 0.0], &[0.0, 1.0]])?);
        }
    }
    let dm = divergence_matrix_from(names.clone(), &models)?;
    let delta = dissimilarities(&dm);
    let e = nmds(&delta, names, &NmdsOptions::default())?;
    println!("stress = {:.3e}, scale = {:.4}, converged = {}", e.stress, e.scale, e.converged);
    let d = pairwise_distances(&e.coords);
    let worst = (0..e.len())
        .flat_map(|i| (0..e.len()).map(move |j| (i, j)))
        .filter(|(i, j)| i < j)
        .map(|(i, j)| (d[(i, j)] / delta[(i, j)] - 1.0).abs())
        .fold(0.0, f64::max);
    println!("largest relative distance error: {worst:.2e}");
    for i in 0..e.len() {
        println!("{:>4} {:>9.4} {:>9.4}", e.names[i], e.coords[(i, 0)], e.coords[(i, 1)]);
    }
    Ok(())
}
