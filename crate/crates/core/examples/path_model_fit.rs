//! Simulate a path model, fit candidate structures and compare them by AIC.
//!
//! ```bash
//! cargo run --example path_model_fit
//! ```

use modelproj::distributions::{PathEdge, PathModel};
use modelproj::model_fit::{fit_all, CandidateSpec};
use modelproj::projection::akaike_weights;

fn edge(source: &str, target: &str, coef: f64) -> PathEdge {
    PathEdge { source: source.into(), target: target.into(), coef }
}

fn main() -> modelproj::Result<()> {
    let vars: Vec<String> = ["x1", "x2", "x3", "x4"].iter().map(|s| s.to_string()).collect();
    let truth = PathModel::new(
        vars,
        vec![edge("x1", "x2", 0.8), edge("x2", "x3", 0.5), edge("x1", "x4", 0.4), edge("x3", "x4", 0.3)],
        vec![1.0; 4],
        vec![0.0; 4],
    )?;
    let sample = truth.simulate(500, 7)?;

    let candidates = vec![
        CandidateSpec::new("null", &[]),
        CandidateSpec::new("chain", &[("x1", "x2"), ("x2", "x3"), ("x3", "x4")]),
        CandidateSpec::new("true", &[("x1", "x2"), ("x2", "x3"), ("x1", "x4"), ("x3", "x4")]),
        CandidateSpec::new("saturated", &[
            ("x1", "x2"), ("x1", "x3"), ("x2", "x3"), ("x1", "x4"), ("x2", "x4"), ("x3", "x4"),
        ]),
    ];
    let fits = fit_all(&candidates, &sample)?;
    let weights = akaike_weights(&fits.iter().map(|f| f.aic()).collect::<Vec<_>>())?;

    let g = truth.reduce()?;
    println!("{:<10} {:>4} {:>12} {:>10} {:>10} {:>8}", "model", "k", "AIC", "Sgf_hat", "Sgf", "weight");
    for (f, w) in fits.iter().zip(&weights) {
        println!(
            "{:<10} {:>4} {:>12.3} {:>10.5} {:>10.5} {:>8.4}",
            f.name(),
            f.k(),
            f.aic(),
            f.sgf_hat(),
            g.neg_crossentropy(f.predictive())?,
            w
        );
    }
    println!("Sgg = {:.5}", g.neg_selfentropy());
    Ok(())
}
