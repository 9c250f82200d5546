//! Nearest-neighbour entropy estimates against the Gaussian closed form.
//!
//! ```bash
//! cargo run --release --example entropy_estimation
//! ```

use modelproj::distributions::GaussianModel;
use modelproj::entropy::{entropy_kl, entropy_weighted, default_k_max};

fn main() -> modelproj::Result<()> {
    let g = GaussianModel::standard(5)?;
    let truth = -g.neg_selfentropy();
    println!("true entropy of N(0, I5): {truth:.5}");
    println!("{:>7} {:>10} {:>10} {:>12}", "n", "kl k=1", "kl k=4", "weighted");
    for n in [100, 1_000, 10_000, 50_000] {
        let sample = g.sample(n, 11)?;
        let k_max = default_k_max(5, n);
        println!(
            "{n:>7} {:>10.5} {:>10.5} {:>12.5}",
            entropy_kl(&sample, 1)?.h_hat,
            entropy_kl(&sample, 4)?.h_hat,
            entropy_weighted(&sample, k_max)?.h_hat
        );
    }
    Ok(())
}
