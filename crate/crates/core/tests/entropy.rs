use std::f64::consts::{E, PI};

use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use modelproj::distributions::{GaussianModel, Sample};
use modelproj::entropy::{
    bias_cancelling_weights, digamma, entropy_kl, entropy_kl_with, entropy_weighted, estimate, knn_distances, EntropyOptions,
    Estimator, KdTree,
};
use modelproj::Error;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn line(xs: &[f64]) -> Sample {
    Sample::with_default_names(DMatrix::from_column_slice(xs.len(), 1, xs)).unwrap()
}

/// Squared distances from point `i` to every other point, ascending.
fn brute_sq(points: &[f64], d: usize, i: usize) -> Vec<f64> {
    let n = points.len() / d;
    let mut out: Vec<f64> = (0..n)
        .filter(|&j| j != i)
        .map(|j| (0..d).map(|c| (points[i * d + c] - points[j * d + c]).powi(2)).sum())
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

#[test]
fn knn_examples() {
    let s = line(&[0.0, 1.0, 3.0]);
    assert_eq!(knn_distances(&s, 1).unwrap(), vec![1.0, 1.0, 2.0]);
    assert_eq!(knn_distances(&s, 2).unwrap(), vec![3.0, 2.0, 3.0]);
    assert!(knn_distances(&s, 3).is_err());
    assert!(knn_distances(&s, 0).is_err());
}

#[test]
fn two_point_estimate() {
    for r in [0.1, 1.0, 7.5] {
        let est = entropy_kl(&line(&[2.0, 2.0 + r]), 1).unwrap();
        assert_abs_diff_eq!(est.h_hat, 1.0 + (2.0 * r).ln(), epsilon = 1e-10);
        assert_eq!(est.sgg_hat, -est.h_hat);
        assert_eq!((est.k, est.n, est.d), (1, 2, 1));
    }
}

#[test]
fn digamma_values() {
    assert_abs_diff_eq!(digamma(1.0), -EULER_GAMMA, epsilon = 1e-10);
    assert_abs_diff_eq!(digamma(2.0), 1.0 - EULER_GAMMA, epsilon = 1e-10);
    assert_abs_diff_eq!(digamma(0.5), -EULER_GAMMA - 2.0 * 2f64.ln(), epsilon = 1e-10);
    // ψ(n) = H_{n-1} - γ
    let harmonic: f64 = (1..150).map(|i| 1.0 / i as f64).sum();
    assert_abs_diff_eq!(digamma(150.0), harmonic - EULER_GAMMA, epsilon = 1e-10);
}

#[test]
fn univariate_normal_consistency() {
    let s = GaussianModel::standard(1).unwrap().sample(10_000, 21).unwrap();
    let est = entropy_kl(&s, 1).unwrap();
    assert!((est.h_hat - 0.5 * (2.0 * PI * E).ln()).abs() < 0.05, "{}", est.h_hat);
}

#[test]
fn duplicates_and_jitter() {
    let s = line(&[0.0, 1.0, 1.0, 4.0]);
    match entropy_kl(&s, 1) {
        Err(Error::DuplicatePoints(1, 2)) => {}
        other => panic!("expected duplicate rows 1 and 2, got {other:?}"),
    }
    let opts = EntropyOptions { jitter: true, ..Default::default() };
    let a = entropy_kl_with(&s, 1, opts).unwrap();
    assert!(a.h_hat.is_finite());
    assert_eq!(a, entropy_kl_with(&s, 1, opts).unwrap());
}

#[test]
fn weighted_reduces_and_weights_sum_to_one() {
    let s = GaussianModel::standard(5).unwrap().sample(300, 3).unwrap();
    assert_eq!(entropy_weighted(&s, 1).unwrap().h_hat, entropy_kl(&s, 1).unwrap().h_hat);
    let low = GaussianModel::standard(3).unwrap().sample(300, 3).unwrap();
    assert_eq!(entropy_weighted(&low, 4).unwrap().h_hat, entropy_kl(&low, 4).unwrap().h_hat);
    for d in 1..=12 {
        for k_max in 1..=24 {
            if let Some(w) = bias_cancelling_weights(d, k_max) {
                assert_eq!(w.len(), k_max);
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12, "d {d}, k_max {k_max}");
            }
        }
    }
    // d = 11 needs two bias constraints, k_max = 2 cannot meet them with unit sum
    let s11 = GaussianModel::standard(11).unwrap().sample(100, 1).unwrap();
    let fell_back = entropy_weighted(&s11, 2).unwrap();
    assert!(fell_back.fallback);
}

#[test]
fn serial_and_parallel_agree() {
    let s = GaussianModel::standard(4).unwrap().sample(2_000, 8).unwrap();
    let parallel = estimate(&s, Estimator::Weighted, None, EntropyOptions::default()).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let serial = pool.install(|| estimate(&s, Estimator::Weighted, None, EntropyOptions::default()).unwrap());
    assert_eq!(parallel, serial);
}

/// Ĥ / H over 2000 replicates of N(10·1, I₇) at n = 150.
fn fig8_ratios(estimator: Estimator, k: Option<usize>) -> Vec<f64> {
    let g = GaussianModel::new(DVector::from_element(7, 10.0), DMatrix::identity(7, 7)).unwrap();
    let truth = -g.neg_selfentropy();
    (0..2000)
        .map(|rep| {
            let s = g.sample(150, 9_000 + rep).unwrap();
            estimate(&s, estimator, k, EntropyOptions::default()).unwrap().h_hat / truth
        })
        .collect()
}

fn median(v: &[f64]) -> f64 {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    0.5 * (v[(v.len() - 1) / 2] + v[v.len() / 2])
}

#[test]
fn kl_median_at_n150_d7() {
    let m = median(&fig8_ratios(Estimator::Kl, Some(1)));
    assert!((0.95..=1.05).contains(&m), "median ratio {m}");
}

#[test]
fn weighted_bias_no_worse_than_kl_at_n150_d7() {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let weighted = mean(&fig8_ratios(Estimator::Weighted, None));
    let plain = mean(&fig8_ratios(Estimator::Kl, Some(1)));
    println!("mean ratio: weighted {weighted:.4}, kl(k=1) {plain:.4}");
    assert!((weighted - 1.0).abs() <= (plain - 1.0).abs(), "weighted {weighted:.4} vs kl {plain:.4}");
}

fn cloud() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (1usize..=6, 2usize..=300).prop_flat_map(|(d, n)| (Just(d), prop::collection::vec(-5.0..5.0f64, n * d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kdtree_matches_brute_force((d, pts) in cloud(), k in 1usize..8) {
        let n = pts.len() / d;
        let k = k.min(n - 1);
        let tree = KdTree::new(&pts, d);
        for i in 0..n {
            let want = brute_sq(&pts, d, i);
            prop_assert_eq!(tree.knn_excluding(i, k), want[..k].to_vec());
        }
        let s = Sample::with_default_names(DMatrix::from_row_slice(n, d, &pts)).unwrap();
        let rho = knn_distances(&s, k).unwrap();
        for (i, r) in rho.iter().enumerate() {
            prop_assert_eq!(*r, brute_sq(&pts, d, i)[k - 1].sqrt());
        }
    }

    #[test]
    fn kdtree_handles_distance_ties(d in 1usize..=3, seed in 0u64..1000) {
        // integer lattice points: many equal distances, no duplicates
        let mut pts = Vec::new();
        let mut state = seed;
        let mut seen = std::collections::HashSet::new();
        while seen.len() < 120 {
            let p: Vec<i64> = (0..d).map(|_| { state = modelproj::rng::derive_seed(state, 1); (state % 7) as i64 }).collect();
            if seen.insert(p.clone()) {
                pts.extend(p.iter().map(|v| *v as f64));
            }
            if seen.len() == 7usize.pow(d as u32) { break; }
        }
        let tree = KdTree::new(&pts, d);
        let n = pts.len() / d;
        for i in 0..n {
            prop_assert_eq!(tree.knn_excluding(i, 4.min(n - 1)), brute_sq(&pts, d, i)[..4.min(n - 1)].to_vec());
        }
    }

    #[test]
    fn invariances(d in 1usize..=5, n in 80usize..200, seed in 0u64..1000, shift in -50.0..50.0f64, scale in 0.05..20.0f64) {
        let s = GaussianModel::standard(d).unwrap().sample(n, seed).unwrap();
        let moved = s.translated(&vec![shift; d]).unwrap();
        let scaled = s.scaled(scale).unwrap();
        let perm: Vec<usize> = (0..n).rev().collect();
        let shuffled = s.permuted(&perm).unwrap();
        for (est, k) in [(Estimator::Kl, Some(1)), (Estimator::Kl, Some(3)), (Estimator::Weighted, None)] {
            let base = estimate(&s, est, k, EntropyOptions::default()).unwrap().h_hat;
            let t = estimate(&moved, est, k, EntropyOptions::default()).unwrap().h_hat;
            let z = estimate(&scaled, est, k, EntropyOptions::default()).unwrap().h_hat;
            let p = estimate(&shuffled, est, k, EntropyOptions::default()).unwrap().h_hat;
            prop_assert!((t - base).abs() < 1e-9, "translation {}", t - base);
            prop_assert!((z - base - d as f64 * scale.ln()).abs() < 1e-10, "scale {}", z - base - d as f64 * scale.ln());
            prop_assert!((p - base).abs() < 1e-12, "permutation {}", p - base);
        }
    }
}
