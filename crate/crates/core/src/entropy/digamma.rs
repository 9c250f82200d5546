/// Digamma function `ψ(x)` for `x > 0`.
///
/// Upward recurrence `ψ(x) = ψ(x+1) - 1/x` until `x ≥ 6`, then the asymptotic
/// series in `1/x²`. Absolute error is below 1e-10 on the positive axis.
pub fn digamma(mut x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut acc = 0.0;
    while x < 6.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let series = inv2
        * (1.0 / 12.0
            - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    acc + x.ln() - 0.5 / x - series
}
