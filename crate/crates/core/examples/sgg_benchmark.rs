//! Replicate study of the neg-selfentropy estimator on N(10·1, I7).
//!
//! ```bash
//! cargo run --release --example sgg_benchmark [replicates]
//! ```

use modelproj::entropy::Estimator;
use modelproj::experiments::{sgg_benchmark, BenchmarkConfig};

fn main() -> modelproj::Result<()> {
    let replicates = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2000);
    for estimator in [Estimator::Weighted, Estimator::Kl] {
        let cfg = BenchmarkConfig { estimator, replicates, ..Default::default() };
        let report = sgg_benchmark(&cfg)?;
        println!("{estimator} estimator, truth {:.5}, {replicates} replicates", report.truth);
        println!("{:>5} {:>4} {:>8} {:>8} {:>8}", "n", "k", "q1", "median", "q3");
        for c in &report.cells {
            println!("{:>5} {:>4} {:>8.4} {:>8.4} {:>8.4}", c.n, c.k, c.ratio.q1, c.ratio.median, c.ratio.q3);
        }
    }
    Ok(())
}
