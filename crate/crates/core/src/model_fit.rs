//! Maximum-likelihood fits of candidate linear-Gaussian path models.
//!
//! Each candidate is a set of regression edges over the sample's variables.
//! Every variable gets its own intercept and residual variance, so the
//! parameter count is `edges + 2p`. Coefficients come from per-equation
//! least squares and residual variances use the MLE divisor `n`.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{topological_order, GaussianModel, PathEdge, PathModel, Sample};
use crate::{Error, Result};

/// Relative size of a QR pivot below which the design is treated as rank deficient.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateSpec {
    pub name: String,
    /// `(source, target)` regression edges.
    #[serde(default)]
    pub edges: Vec<(String, String)>,
}

impl CandidateSpec {
    pub fn new(name: impl Into<String>, edges: &[(&str, &str)]) -> Self {
        CandidateSpec {
            name: name.into(),
            edges: edges.iter().map(|(s, t)| (s.to_string(), t.to_string())).collect(),
        }
    }

    pub fn num_params(&self, p: usize) -> usize {
        self.edges.len() + 2 * p
    }

    /// Edge endpoints resolved against `variables`, checked for duplicates and cycles.
    pub fn resolve(&self, variables: &[String]) -> Result<Vec<(usize, usize)>> {
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(self.edges.len());
        for (s, t) in &self.edges {
            let find = |v: &str| {
                variables.iter().position(|x| x == v).ok_or_else(|| {
                    Error::invalid(format!("model `{}`: unknown variable `{v}`", self.name))
                })
            };
            let e = (find(s)?, find(t)?);
            if e.0 == e.1 {
                return Err(Error::invalid(format!("model `{}`: self loop on `{s}`", self.name)));
            }
            if !seen.insert(e) {
                return Err(Error::invalid(format!("model `{}`: duplicate edge {s} -> {t}", self.name)));
            }
            out.push(e);
        }
        topological_order(variables, &out)?;
        Ok(out)
    }
}

/// Checks that names are distinct within a model set.
pub fn validate_model_set(specs: &[CandidateSpec]) -> Result<()> {
    let mut seen = HashSet::new();
    for s in specs {
        if !seen.insert(s.name.as_str()) {
            return Err(Error::invalid(format!("duplicate model name `{}`", s.name)));
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct FittedModel {
    spec: CandidateSpec,
    loglik: f64,
    k: usize,
    n: usize,
    fitted: PathModel,
    predictive: GaussianModel,
}

impl FittedModel {
    pub fn spec(&self) -> &CandidateSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    /// Maximized log-likelihood `Σᵢ ln f(xᵢ; θ̂)`.
    pub fn loglik(&self) -> f64 {
        self.loglik
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The path model at the MLE.
    pub fn fitted_path(&self) -> &PathModel {
        &self.fitted
    }

    /// Implied joint Gaussian at the MLE.
    pub fn predictive(&self) -> &GaussianModel {
        &self.predictive
    }

    /// `-2 loglik + 2k`.
    pub fn aic(&self) -> f64 {
        -2.0 * self.loglik + 2.0 * self.k as f64
    }

    /// `Ŝgf = loglik/n - k/n = -AIC / 2n`.
    pub fn sgf_hat(&self) -> f64 {
        -self.aic() / (2.0 * self.n as f64)
    }
}

pub fn aic(fm: &FittedModel) -> f64 {
    fm.aic()
}

pub fn sgf_hat(fm: &FittedModel) -> f64 {
    fm.sgf_hat()
}

/// Ordinary least squares with an intercept column; returns `(coefs, rss)`
/// where `coefs[0]` is the intercept.
fn ols(y: &DVector<f64>, parents: &[DVector<f64>]) -> Option<(DVector<f64>, f64)> {
    let n = y.len();
    let q = parents.len() + 1;
    let mut x = DMatrix::from_element(n, q, 1.0);
    for (j, col) in parents.iter().enumerate() {
        x.set_column(j + 1, col);
    }
    let col_norms: Vec<f64> = x.column_iter().map(|c| c.norm()).collect();
    let qr = x.clone().qr();
    let r = qr.r();
    for j in 0..q {
        if !(r[(j, j)].abs() > RANK_TOL * col_norms[j]) {
            return None;
        }
    }
    let qty = qr.q().transpose() * y;
    let coefs = r.solve_upper_triangular(&qty)?;
    let resid = y - &x * &coefs;
    Some((coefs, resid.norm_squared()))
}

pub fn fit(spec: &CandidateSpec, sample: &Sample) -> Result<FittedModel> {
    let names = sample.names();
    let p = sample.p();
    let n = sample.n();
    let edges = spec.resolve(names)?;
    let k = spec.num_params(p);
    if n < k {
        return Err(Error::TooFewObservations { needed: k, have: n });
    }
    let data = sample.data();
    let mut path_edges = Vec::with_capacity(edges.len());
    let mut noise_sd = vec![0.0; p];
    let mut intercepts = vec![0.0; p];
    let mut loglik = 0.0;
    let ln2pi = (2.0 * std::f64::consts::PI).ln();
    for v in 0..p {
        let parents: Vec<usize> = edges.iter().filter(|e| e.1 == v).map(|e| e.0).collect();
        let y = data.column(v).into_owned();
        let xs: Vec<DVector<f64>> = parents.iter().map(|&s| data.column(s).into_owned()).collect();
        let rank_err = || Error::RankDeficient {
            model: spec.name.clone(),
            variable: names[v].clone(),
        };
        let (coefs, rss) = ols(&y, &xs).ok_or_else(rank_err)?;
        let var = rss / n as f64;
        if !(var > 0.0) {
            return Err(rank_err());
        }
        intercepts[v] = coefs[0];
        noise_sd[v] = var.sqrt();
        for (j, &s) in parents.iter().enumerate() {
            path_edges.push(PathEdge {
                source: names[s].clone(),
                target: names[v].clone(),
                coef: coefs[j + 1],
            });
        }
        loglik += -0.5 * n as f64 * (ln2pi + var.ln() + 1.0);
    }
    let fitted = PathModel::new(names.to_vec(), path_edges, noise_sd, intercepts)?;
    let predictive = fitted.reduce()?;
    Ok(FittedModel {
        spec: spec.clone(),
        loglik,
        k,
        n,
        fitted,
        predictive,
    })
}

/// Fits every candidate (in parallel); output order follows `specs`.
pub fn fit_all(specs: &[CandidateSpec], sample: &Sample) -> Result<Vec<FittedModel>> {
    validate_model_set(specs)?;
    specs.par_iter().map(|s| fit(s, sample)).collect()
}

/// Exported summary of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitRecord {
    pub name: String,
    pub loglik: f64,
    pub k: usize,
    pub n: usize,
    pub aic: f64,
    pub sgf_hat: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictive: Option<GaussianModel>,
}

impl From<&FittedModel> for FitRecord {
    fn from(fm: &FittedModel) -> Self {
        FitRecord {
            name: fm.name().to_string(),
            loglik: fm.loglik(),
            k: fm.k(),
            n: fm.n(),
            aic: fm.aic(),
            sgf_hat: fm.sgf_hat(),
            predictive: Some(fm.predictive().clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::PathEdge;
    use approx::assert_abs_diff_eq;

    fn chain_sample(n: usize, seed: u64) -> (PathModel, Sample) {
        let pm = PathModel::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                PathEdge { source: "a".into(), target: "b".into(), coef: 0.8 },
                PathEdge { source: "b".into(), target: "c".into(), coef: -0.5 },
            ],
            vec![1.0, 0.5, 2.0],
            vec![1.0, 0.0, 3.0],
        )
        .unwrap();
        let s = pm.simulate(n, seed).unwrap();
        (pm, s)
    }

    #[test]
    fn empty_spec_gives_textbook_mle() {
        let (_, s) = chain_sample(200, 1);
        let fm = fit(&CandidateSpec::new("null", &[]), &s).unwrap();
        for j in 0..3 {
            let col = s.data().column(j);
            let mean = col.mean();
            let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / s.n() as f64;
            assert_abs_diff_eq!(fm.predictive().mean()[j], mean, epsilon = 1e-10);
            assert_abs_diff_eq!(fm.predictive().cov()[(j, j)], var, epsilon = 1e-10);
        }
        assert_eq!(fm.k(), 6);
    }

    #[test]
    fn loglik_matches_joint_density() {
        let (_, s) = chain_sample(300, 2);
        let spec = CandidateSpec::new("m", &[("a", "b"), ("a", "c")]);
        let fm = fit(&spec, &s).unwrap();
        let direct: f64 = s
            .data()
            .row_iter()
            .map(|r| fm.predictive().log_density(&r.iter().copied().collect::<Vec<_>>()).unwrap())
            .sum();
        assert_abs_diff_eq!(fm.loglik(), direct, epsilon = 1e-8);
    }

    #[test]
    fn true_structure_is_consistent() {
        let n = 100_000;
        let (pm, s) = chain_sample(n, 3);
        let fm = fit(&CandidateSpec::new("true", &[("a", "b"), ("b", "c")]), &s).unwrap();
        let sd = |v: usize| pm.noise_sd()[v];
        // se(β) ≈ σ_resid / (σ_x √n); var(a)=1, var(b)=0.64+0.25
        let se_ab = sd(1) / (1.0f64 * n as f64).sqrt();
        let se_bc = sd(2) / (0.89f64 * n as f64).sqrt();
        let est = fm.fitted_path().edges();
        assert!((est[0].coef - 0.8).abs() < 4.0 * se_ab, "{}", est[0].coef);
        assert!((est[1].coef + 0.5).abs() < 4.0 * se_bc, "{}", est[1].coef);
        // Ŝgf approaches Sgg of the generating Gaussian
        let sgg = pm.reduce().unwrap().neg_selfentropy();
        assert!((fm.sgf_hat() - sgg).abs() < 0.01, "{} vs {}", fm.sgf_hat(), sgg);
    }

    #[test]
    fn aic_and_sgf_identities() {
        let (_, s) = chain_sample(50, 4);
        let fm = fit(&CandidateSpec::new("m", &[("a", "b")]), &s).unwrap();
        assert_eq!(fm.aic(), -2.0 * fm.loglik() + 2.0 * fm.k() as f64);
        let direct = fm.loglik() / 50.0 - fm.k() as f64 / 50.0;
        assert_abs_diff_eq!(fm.sgf_hat(), direct, epsilon = 1e-12);
        let again = fit(&CandidateSpec::new("m", &[("a", "b")]), &s).unwrap();
        assert_eq!(fm.aic(), again.aic());
    }

    #[test]
    fn nested_models_monotone_loglik() {
        let (_, s) = chain_sample(80, 5);
        let sub = fit(&CandidateSpec::new("sub", &[("a", "b")]), &s).unwrap();
        let sup = fit(&CandidateSpec::new("sup", &[("a", "b"), ("a", "c")]), &s).unwrap();
        assert!(sup.loglik() >= sub.loglik());
        assert!(sup.aic() <= sub.aic() + 2.0 + 1e-9);
    }

    #[test]
    fn rejects_rank_deficiency_and_small_n() {
        let data = DMatrix::from_fn(20, 3, |i, j| if j == 2 { 2.0 * i as f64 } else { (i * (j + 3) % 7) as f64 });
        // c is an exact linear function of the row index; make b identical to c scaled
        let mut data = data;
        for i in 0..20 {
            data[(i, 1)] = data[(i, 2)] * 0.5 + 1.0;
        }
        let s = Sample::new(data, vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let err = fit(&CandidateSpec::new("m", &[("b", "a"), ("c", "a")]), &s).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { .. }), "{err}");

        let (_, tiny) = chain_sample(5, 6);
        assert!(matches!(fit(&CandidateSpec::new("m", &[]), &tiny), Err(Error::TooFewObservations { .. })));
    }

    #[test]
    fn rejects_bad_specs() {
        let (_, s) = chain_sample(30, 7);
        assert!(fit(&CandidateSpec::new("m", &[("a", "q")]), &s).is_err());
        assert!(matches!(
            fit(&CandidateSpec::new("m", &[("a", "b"), ("b", "a")]), &s),
            Err(Error::Cycle(_))
        ));
        let specs = vec![CandidateSpec::new("x", &[]), CandidateSpec::new("x", &[("a", "b")])];
        assert!(fit_all(&specs, &s).is_err());
    }
}
