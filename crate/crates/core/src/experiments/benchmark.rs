use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{GaussianModel, Sample};
use crate::entropy::{self, EntropyOptions, Estimator};
use crate::rng::{self, derive_seed};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchmarkConfig {
    pub p: usize,
    /// Every coordinate of the mean.
    pub mu: f64,
    /// Common standard deviation (covariance `sigma² I`).
    pub sigma: f64,
    pub sample_sizes: Vec<usize>,
    pub replicates: usize,
    pub estimator: Estimator,
    /// Neighbour order or `k_max`; estimator default when `None`.
    pub k: Option<usize>,
    pub seed: u64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            p: 7,
            mu: 10.0,
            sigma: 1.0,
            sample_sizes: vec![10, 25, 50, 75, 150],
            replicates: 2000,
            estimator: Estimator::Weighted,
            k: None,
            seed: 20_170_101,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl Summary {
    /// Five-number summary (linear-interpolation quantiles) plus the mean.
    pub fn of(values: &[f64]) -> Summary {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = (v.len() - 1) as f64 * p;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Summary {
            min: v[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: v[v.len() - 1],
            mean: v.iter().sum::<f64>() / v.len() as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub n: usize,
    /// Neighbour order actually used in this cell.
    pub k: usize,
    pub ratio: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: BenchmarkConfig,
    /// Closed-form differential entropy of the sampled Gaussian.
    pub truth: f64,
    pub cells: Vec<CellSummary>,
    /// Per-cell, per-replicate `Ĥ / truth`.
    #[serde(skip)]
    pub ratios: Vec<Vec<f64>>,
}

/// Draws `replicates` samples from `N(mu·1, sigma² I_p)` for every sample
/// size and summarizes `Ĥ / H_true`.
pub fn sgg_benchmark(cfg: &BenchmarkConfig) -> Result<BenchmarkReport> {
    if cfg.replicates == 0 {
        return Err(Error::invalid("replicates must be at least 1"));
    }
    if cfg.sample_sizes.iter().any(|&n| n < 2) {
        return Err(Error::invalid("every sample size must be at least 2"));
    }
    if !(cfg.sigma > 0.0) {
        return Err(Error::invalid("sigma must be positive"));
    }
    let p = cfg.p;
    let cov = nalgebra::DMatrix::identity(p, p) * (cfg.sigma * cfg.sigma);
    let model = GaussianModel::new(nalgebra::DVector::from_element(p, cfg.mu), cov)?;
    let truth = -model.neg_selfentropy();
    let mut cells = Vec::with_capacity(cfg.sample_sizes.len());
    let mut ratios = Vec::with_capacity(cfg.sample_sizes.len());
    for &n in &cfg.sample_sizes {
        let cell_seed = derive_seed(cfg.seed, n as u64);
        let estimates: Vec<(f64, usize)> = (0..cfg.replicates as u64)
            .into_par_iter()
            .map(|rep| {
                let mut rng = rng::stream(cell_seed, rep);
                let sample = Sample::with_default_names(model.draw(n, &mut rng))?;
                let est = entropy::estimate(&sample, cfg.estimator, cfg.k, EntropyOptions::default())?;
                Ok((est.h_hat / truth, est.k))
            })
            .collect::<Result<_>>()?;
        let values: Vec<f64> = estimates.iter().map(|e| e.0).collect();
        cells.push(CellSummary { n, k: estimates[0].1, ratio: Summary::of(&values) });
        ratios.push(values);
    }
    Ok(BenchmarkReport { config: cfg.clone(), truth, cells, ratios })
}

impl BenchmarkReport {
    /// Per-replicate archive: `n,replicate,ratio`.
    pub fn write_replicates_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        wtr.write_record(["n", "replicate", "ratio"])?;
        for (cell, values) in self.cells.iter().zip(&self.ratios) {
            for (rep, v) in values.iter().enumerate() {
                wtr.write_record([cell.n.to_string(), rep.to_string(), v.to_string()])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Recomputes cell summaries from a per-replicate archive.
    pub fn summaries_from_csv<R: Read>(reader: R) -> Result<Vec<(usize, Summary)>> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut cells: Vec<(usize, Vec<f64>)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse_err = |f: &str| Error::invalid(format!("bad archive field `{f}`"));
            let n: usize = rec[0].parse().map_err(|_| parse_err(&rec[0]))?;
            let v: f64 = rec[2].parse().map_err(|_| parse_err(&rec[2]))?;
            match cells.last_mut() {
                Some((m, vals)) if *m == n => vals.push(v),
                _ => cells.push((n, vec![v])),
            }
        }
        Ok(cells.into_iter().map(|(n, v)| (n, Summary::of(&v))).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_quantiles() {
        let s = Summary::of(&[4.0, 1.0, 3.0, 2.0, 5.0]);
        assert_eq!((s.min, s.q1, s.median, s.q3, s.max, s.mean), (1.0, 2.0, 3.0, 4.0, 5.0, 3.0));
        let s = Summary::of(&[1.0, 2.0]);
        assert_eq!(s.median, 1.5);
        assert_eq!(s.q1, 1.25);
    }

    #[test]
    fn single_replicate_is_reproducible() {
        let cfg = BenchmarkConfig { sample_sizes: vec![30], replicates: 1, ..Default::default() };
        let a = sgg_benchmark(&cfg).unwrap();
        let b = sgg_benchmark(&cfg).unwrap();
        assert_eq!(a.ratios, b.ratios);
        assert_eq!(a.ratios[0].len(), 1);
        assert!((a.truth - 9.93257).abs() < 5e-6);
    }

    #[test]
    fn archive_recomputes_summaries() {
        let cfg = BenchmarkConfig { sample_sizes: vec![20, 40], replicates: 25, ..Default::default() };
        let report = sgg_benchmark(&cfg).unwrap();
        let mut buf = Vec::new();
        report.write_replicates_csv(&mut buf).unwrap();
        let back = BenchmarkReport::summaries_from_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        for ((n, s), cell) in back.iter().zip(&report.cells) {
            assert_eq!(*n, cell.n);
            assert_eq!(*s, cell.ratio);
        }
    }

    #[test]
    fn univariate_mean_ratio() {
        let cfg = BenchmarkConfig {
            p: 1,
            mu: 0.0,
            sample_sizes: vec![10_000],
            replicates: 50,
            estimator: Estimator::Kl,
            k: Some(1),
            ..Default::default()
        };
        let report = sgg_benchmark(&cfg).unwrap();
        assert!((report.truth - 1.418939).abs() < 1e-6);
        assert!((report.cells[0].ratio.mean - 1.0).abs() < 0.03, "{:?}", report.cells[0].ratio);
    }
}
