//! The shipped default study end to end, with outputs written to a directory.
//!
//! ```bash
//! cargo run --release --example pipeline [out_dir]
//! ```

use modelproj::cli::write_pipeline;
use modelproj::experiments::{default_config, run_pipeline};

fn main() -> modelproj::Result<()> {
    let cfg = default_config();
    let out = run_pipeline(&cfg)?;
    let r = &out.report;
    println!("{} models, n = {}", r.models, r.n);
    println!("stress          {:.4}%", r.stress_percent);
    println!("Sgg estimate    {:.4} (true {:.4})", r.sgg_hat, r.sgg_true);
    println!("h2 estimate     {:.6} (true {:.6})", r.h2_hat, r.h2_true);
    println!("|m_hat - M|     {:.4}", r.dist_m_hat_to_true);
    println!("|average - M|   {:.4}", r.dist_average_to_true);
    println!("best AIC        {}", r.best_aic_model);
    println!("nearest to g    {}", r.nearest_model);
    if let Some(dir) = std::env::args().nth(1) {
        std::fs::create_dir_all(&dir)?;
        write_pipeline(dir.as_ref(), &out, None)?;
        println!("wrote {dir}");
    }
    Ok(())
}
