//! Delete the left-most models one at a time and track how far the projection
//! estimate and the model average move.
//!
//! ```bash
//! cargo run --release --example deletion_stability [seeds]
//! ```

use modelproj::experiments::{default_config, deletion_experiment, run_pipeline};
use modelproj::projection::Direction;

fn main() -> modelproj::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5);
    let mut steadier = 0;
    for seed in 0..seeds {
        let cfg = default_config().with_seed_override(seed);
        let out = run_pipeline(&cfg)?;
        let report = deletion_experiment(&cfg, &out, Direction::Left, None)?;
        let last = report.rows.last().expect("step 0 is always present");
        println!(
            "seed {seed}: {} deletions, path length m_hat {:.4}, average {:.4}, final |m_hat - M| {:.4}",
            last.step, report.m_hat_displacement, report.average_displacement, last.dist_m_hat_to_true
        );
        if report.m_hat_displacement < report.average_displacement {
            steadier += 1;
        }
    }
    println!("projection moved less than the average in {steadier} of {seeds} runs");
    Ok(())
}
