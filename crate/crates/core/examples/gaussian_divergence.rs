//! Closed-form Gaussian divergences and entropies.
//!
//! ```bash
//! cargo run --example gaussian_divergence
//! ```

use modelproj::distributions::GaussianModel;

fn main() -> modelproj::Result<()> {
    let narrow = GaussianModel::from_slices(&[0.0], &[&[1.0]])?;
    let wide = GaussianModel::from_slices(&[0.0], &[&[4.0]])?;
    println!("KL(N(0,1) || N(0,4)) = {:.6}", narrow.kl_to(&wide)?);
    println!("KL(N(0,4) || N(0,1)) = {:.6}", wide.kl_to(&narrow)?);

    let shifted = GaussianModel::from_slices(&[1.0, 0.0], &[&[1.0, 0.0], &[0.0, 1.0]])?;
    let standard = GaussianModel::standard(2)?;
    println!("KL(N((1,0), I) || N(0, I)) = {:.6}", shifted.kl_to(&standard)?);

    let g = GaussianModel::standard(7)?;
    println!("Sgg of N(0, I7) = {:.5}", g.neg_selfentropy());

    // KL(g, f) = Sgg - Sgf
    let f = GaussianModel::from_slices(&[0.5, -0.2], &[&[2.0, 0.3], &[0.3, 1.0]])?;
    println!(
        "KL = {:.6}, Sgg - Sgf = {:.6}",
        standard.kl_to(&f)?,
        standard.neg_selfentropy() - standard.neg_crossentropy(&f)?
    );
    Ok(())
}
