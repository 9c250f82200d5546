use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;

use modelproj::distributions::GaussianModel;
use modelproj::mds::{
    classical_mds, dissimilarities, divergence_matrix_from, embed_distance, isotonic_regression, nmds, pairwise_distances,
    DivergenceMatrix, Embedding, NmdsOptions,
};

fn uni(mean: f64, var: f64) -> GaussianModel {
    GaussianModel::from_slices(&[mean], &[&[var]]).unwrap()
}

fn names(r: usize) -> Vec<String> {
    (0..r).map(|i| format!("m{i}")).collect()
}

fn line_points(xs: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(xs.len(), 1, |i, _| xs[i])
}

#[test]
fn divergence_matrix_examples() {
    let dm = divergence_matrix_from(names(3), &[uni(0.0, 1.0), uni(1.0, 1.0), uni(2.0, 1.0)]).unwrap();
    let v = dm.values();
    for i in 0..3 {
        assert_eq!(v[(i, i)], 0.0);
        for j in 0..3 {
            assert_abs_diff_eq!(v[(i, j)], (i as f64 - j as f64).powi(2) / 2.0, epsilon = 1e-14);
        }
    }
    let delta = dissimilarities(&dm);
    assert_abs_diff_eq!(delta[(0, 1)], 0.5f64.sqrt(), epsilon = 1e-14);
    assert_abs_diff_eq!(delta[(0, 2)], 2f64.sqrt(), epsilon = 1e-14);
    assert_abs_diff_eq!(delta[(1, 2)], 0.5f64.sqrt(), epsilon = 1e-14);

    let dup = divergence_matrix_from(names(3), &[uni(0.0, 1.0), uni(0.0, 4.0), uni(0.0, 1.0)]).unwrap();
    assert_eq!(dup.values()[(0, 2)], 0.0);
    assert_eq!(dup.values()[(2, 0)], 0.0);
    assert!(dup.values()[(0, 1)] != dup.values()[(1, 0)]);
    assert_abs_diff_eq!(dup.asymmetry(), 1.5 - 2f64.ln() - (2f64.ln() - 0.375), epsilon = 1e-14);
    let sym = dissimilarities(&dup);
    assert_abs_diff_eq!(sym[(0, 1)], (0.5 * (dup.values()[(0, 1)] + dup.values()[(1, 0)])).sqrt(), epsilon = 1e-15);

    assert!(divergence_matrix_from(names(2), &[uni(0.0, 1.0), GaussianModel::standard(2).unwrap()]).is_err());
}

#[test]
fn divergence_matrix_invariants() {
    assert!(DivergenceMatrix::new(DMatrix::from_row_slice(3, 3, &[0., 1., 1., 1., 0., 1., 1., 1., 0.]), names(3)).is_ok());
    assert!(DivergenceMatrix::new(DMatrix::from_row_slice(3, 3, &[0., 1., 1., 1., 0.5, 1., 1., 1., 0.]), names(3)).is_err());
    assert!(DivergenceMatrix::new(DMatrix::from_row_slice(3, 3, &[0., -1., 1., 1., 0., 1., 1., 1., 0.]), names(3)).is_err());
    assert!(DivergenceMatrix::new(DMatrix::from_row_slice(2, 2, &[0., 1., 1., 0.]), names(2)).is_err());
}

#[test]
fn csv_and_json_round_trips() {
    let models: Vec<GaussianModel> = (0..4).map(|i| uni(0.1 * i as f64, 1.0 + 1.0 / 3.0 * i as f64)).collect();
    let dm = divergence_matrix_from(names(4), &models).unwrap();
    let mut buf = Vec::new();
    dm.write_csv(&mut buf).unwrap();
    assert!(String::from_utf8(buf.clone()).unwrap().starts_with("m0,m1,m2,m3\n"));
    assert_eq!(DivergenceMatrix::read_csv(buf.as_slice()).unwrap(), dm);

    let e = nmds(&dissimilarities(&dm), names(4), &NmdsOptions::default()).unwrap();
    let text = serde_json::to_string(&e).unwrap();
    let back: Embedding = serde_json::from_str(&text).unwrap();
    assert_eq!(back, e);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["stress_percent"].as_f64().unwrap(), 100.0 * e.stress);
}

#[test]
fn classical_examples() {
    let delta = pairwise_distances(&line_points(&[0.0, 1.0, 3.0]));
    let c = classical_mds(&delta, 2);
    assert!((pairwise_distances(&c.coords) - &delta).amax() < 1e-10);
    assert!(c.padded, "a collinear set has one positive eigenvalue");

    let eq = DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 2.0 });
    let d = pairwise_distances(&classical_mds(&eq, 2).coords);
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        assert_abs_diff_eq!(d[(i, j)], 2.0, epsilon = 1e-10);
    }
}

#[test]
fn isotonic_examples() {
    let w = [1.0; 4];
    assert_eq!(isotonic_regression(&[1.0, 2.0, 2.0, 5.0], &w).unwrap(), vec![1.0, 2.0, 2.0, 5.0]);
    assert_eq!(isotonic_regression(&[3.0, 1.0], &[1.0, 1.0]).unwrap(), vec![2.0, 2.0]);
    assert_eq!(isotonic_regression(&[1.0, 3.0, 2.0, 4.0], &w).unwrap(), vec![1.0, 2.5, 2.5, 4.0]);
    assert!(isotonic_regression(&[1.0, 2.0], &[1.0, 0.0]).is_err());
    assert!(isotonic_regression(&[1.0, 2.0], &[1.0]).is_err());
}

#[test]
fn embed_distance_examples() {
    let e = Embedding::from_coords(names(2), DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 3.0, 4.0])).unwrap();
    assert_eq!(embed_distance(&e, 1, &[3.0, 4.0]).unwrap(), 0.0);
    assert_eq!(embed_distance(&e, 0, &[3.0, 4.0]).unwrap(), 5.0);
    assert_eq!(embed_distance(&e, 1, &[0.0, 0.0]).unwrap(), embed_distance(&e, 0, &[3.0, 4.0]).unwrap());
    assert!(embed_distance(&e, 2, &[0.0, 0.0]).is_err());
    assert!(embed_distance(&e, 0, &[0.0]).is_err());
}

/// Best monotone fit by exhaustive search over consecutive block partitions.
fn brute_isotonic(y: &[f64], w: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut best = (f64::INFINITY, Vec::new());
    for mask in 0u32..(1 << (n - 1)) {
        let mut fit = Vec::with_capacity(n);
        let mut start = 0;
        for end in 1..=n {
            if end == n || mask & (1 << (end - 1)) != 0 {
                let sw: f64 = w[start..end].iter().sum();
                let m = (start..end).map(|i| w[i] * y[i]).sum::<f64>() / sw;
                fit.extend(std::iter::repeat_n(m, end - start));
                start = end;
            }
        }
        if fit.windows(2).all(|p| p[0] <= p[1] + 1e-12) {
            let sse: f64 = (0..n).map(|i| w[i] * (y[i] - fit[i]).powi(2)).sum();
            if sse < best.0 {
                best = (sse, fit);
            }
        }
    }
    best.1
}

/// A non-Euclidean dissimilarity: planar distances with a few pairs stretched.
fn bent(r: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = modelproj::rng::seeded(seed);
    let pts = DMatrix::from_fn(r, 2, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
    let mut d = pairwise_distances(&pts);
    for k in 0..r / 3 {
        let (i, j) = (k, r - 1 - k);
        d[(i, j)] *= 1.3;
        d[(j, i)] = d[(i, j)];
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn isotonic_matches_brute_force(
        pairs in prop::collection::vec((-5.0..5.0f64, 0.1..3.0f64), 1..9)
    ) {
        let (y, w): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let fit = isotonic_regression(&y, &w).unwrap();
        for (a, b) in fit.iter().zip(brute_isotonic(&y, &w)) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        prop_assert!(fit.windows(2).all(|p| p[0] <= p[1]));
        let mean = |v: &[f64]| v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        prop_assert!((mean(&fit) - mean(&y)).abs() < 1e-9);
    }

    #[test]
    fn classical_reproduces_euclidean_input(pts in prop::collection::vec(-3.0..3.0f64, 6..40)) {
        let r = pts.len() / 2;
        prop_assume!(r >= 3);
        let x = DMatrix::from_row_slice(r, 2, &pts[..2 * r]);
        let delta = pairwise_distances(&x);
        let c = classical_mds(&delta, 2);
        prop_assert!((pairwise_distances(&c.coords) - &delta).amax() < 1e-10 * delta.amax().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn nmds_invariances(r in 5usize..12, seed in 0u64..500, c in 0.01..100.0f64) {
        let delta = bent(r, seed);
        let opts = NmdsOptions { seed, ..Default::default() };
        let e = nmds(&delta, names(r), &opts).unwrap();
        prop_assert!((0.0..=1.0).contains(&e.stress));
        for col in e.coords.column_iter() {
            prop_assert!(col.mean().abs() < 1e-10);
        }
        // normal equation of the least-squares rescale
        let d = pairwise_distances(&e.coords);
        let resid: f64 = d.iter().zip(delta.iter()).map(|(d, dl)| (d - dl) * d).sum();
        prop_assert!(resid.abs() < 1e-8, "normal equation {}", resid);

        let scaled = nmds(&(&delta * c), names(r), &opts).unwrap();
        prop_assert!((scaled.stress - e.stress).abs() < 1e-8, "scale {} vs {}", scaled.stress, e.stress);

        let perm: Vec<usize> = (0..r).rev().collect();
        let permuted = DMatrix::from_fn(r, r, |i, j| delta[(perm[i], perm[j])]);
        let p = nmds(&permuted, names(r), &opts).unwrap();
        prop_assert!((p.stress - e.stress).abs() < 1e-8, "permutation {} vs {}", p.stress, e.stress);
    }
}
