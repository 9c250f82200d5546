//! Recover a known projection point and off-plane discrepancy from exact
//! neg-crossentropies, and contrast it with the Akaike-weight average.
//!
//! ```bash
//! cargo run --example projection_exact_geometry
//! ```

use nalgebra::DMatrix;

use modelproj::mds::Embedding;
use modelproj::projection::{akaike_weights, model_average_location, solve_projection, ProjectionOptions};

fn main() -> modelproj::Result<()> {
    let coords = [[0.0, 0.0], [1.0, 0.2], [0.3, 1.1], [1.2, 1.0], [0.6, 0.5], [-0.4, 0.7]];
    let names: Vec<String> = (0..coords.len()).map(|i| format!("f{i}")).collect();
    let e = Embedding::from_coords(names, DMatrix::from_fn(coords.len(), 2, |i, j| coords[i][j]))?;

    // The generating process sits outside the hull of the models.
    let m_star = [1.8, -0.6];
    let h2 = 0.05;
    let sgg = -4.2;
    let sgf: Vec<f64> = coords
        .iter()
        .map(|c| sgg - h2 - (c[0] - m_star[0]).powi(2) - (c[1] - m_star[1]).powi(2))
        .collect();

    let n = 200.0;
    let aics: Vec<f64> = sgf.iter().map(|s| -2.0 * n * s).collect();
    let avg = model_average_location(&e, &akaike_weights(&aics)?)?;
    let p = solve_projection(&sgf, &e, sgg, Some(&avg.location), &ProjectionOptions::default())?;

    println!("true projection   ({:.4}, {:.4}), h2 = {h2}", m_star[0], m_star[1]);
    println!("estimated         ({:.4}, {:.4}), h2 = {:.6}", p.m[0], p.m[1], p.h2);
    println!("Akaike average    ({:.4}, {:.4})", avg.location[0], avg.location[1]);
    Ok(())
}
