use crate::{Error, Result};

/// Weighted least-squares fit that is nondecreasing in index order
/// (pool adjacent violators).
pub fn isotonic_regression(values: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    if values.len() != weights.len() {
        return Err(Error::Dimension { expected: values.len(), found: weights.len() });
    }
    if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::invalid("isotonic regression weights must be positive and finite"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("isotonic regression values must be finite"));
    }
    Ok(pava(values.iter().copied().zip(weights.iter().copied())))
}

/// Unit-weight variant used inside the NMDS loop.
pub(crate) fn isotonic_unit(values: &[f64]) -> Vec<f64> {
    pava(values.iter().map(|&v| (v, 1.0)))
}

fn pava(items: impl Iterator<Item = (f64, f64)>) -> Vec<f64> {
    // blocks of (mean, weight, len)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::new();
    for (v, w) in items {
        let mut cur = (v, w, 1usize);
        while let Some(&(m, bw, len)) = blocks.last() {
            if m <= cur.0 {
                break;
            }
            blocks.pop();
            let tw = bw + cur.1;
            cur = ((m * bw + cur.0 * cur.1) / tw, tw, len + cur.2);
        }
        blocks.push(cur);
    }
    blocks.into_iter().flat_map(|(m, _, len)| std::iter::repeat_n(m, len)).collect()
}
