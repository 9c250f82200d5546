use std::io::Write;

use serde::{Deserialize, Serialize};

use super::pipeline::PipelineOutput;
use crate::cli::RunConfig;
use crate::projection::{deletion_sweep, Direction, SweepInput, SweepStep};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeletionRow {
    pub step: usize,
    pub removed: Option<String>,
    pub remaining: usize,
    pub m_hat: Vec<f64>,
    pub average: Vec<f64>,
    pub h2_hat: f64,
    pub dist_m_hat_to_true: f64,
    pub dist_average_to_true: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeletionReport {
    pub direction: Direction,
    /// Full-set true projection the distances refer to.
    pub true_m: Vec<f64>,
    pub rows: Vec<DeletionRow>,
    /// Path length of the projection estimate across steps.
    pub m_hat_displacement: f64,
    /// Path length of the model average across steps.
    pub average_displacement: f64,
    #[serde(skip)]
    pub steps: Vec<SweepStep>,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn path_length(points: impl Iterator<Item = Vec<f64>>) -> f64 {
    let pts: Vec<Vec<f64>> = points.collect();
    pts.windows(2).map(|w| distance(&w[0], &w[1])).sum()
}

/// Runs a deletion sweep over an existing pipeline result. `steps = None`
/// deletes as many models as identifiability allows.
pub fn deletion_experiment(
    cfg: &RunConfig,
    out: &PipelineOutput,
    direction: Direction,
    steps: Option<usize>,
) -> Result<DeletionReport> {
    let e = &out.embedding;
    let max_steps = e.len().saturating_sub(e.dim() + 2);
    let aics = out.aics();
    let sgf = out.sgf_hats();
    let input = SweepInput { embedding: e, aics: &aics, sgf_hats: &sgf, sgg_hat: out.entropy.sgg_hat };
    let sweep = deletion_sweep(&input, direction, steps.unwrap_or(max_steps), &cfg.projection_options())?;
    let true_m = out.truth.m.clone();
    let rows: Vec<DeletionRow> = sweep
        .iter()
        .map(|s| DeletionRow {
            step: s.step,
            removed: s.removed.clone(),
            remaining: s.remaining.len(),
            m_hat: s.projection.m.clone(),
            average: s.average.location.clone(),
            h2_hat: s.projection.h2,
            dist_m_hat_to_true: distance(&s.projection.m, &true_m),
            dist_average_to_true: distance(&s.average.location, &true_m),
        })
        .collect();
    Ok(DeletionReport {
        direction,
        m_hat_displacement: path_length(rows.iter().map(|r| r.m_hat.clone())),
        average_displacement: path_length(rows.iter().map(|r| r.average.clone())),
        true_m,
        rows,
        steps: sweep,
    })
}

impl DeletionReport {
    /// Trajectory table: one row per step, coordinates as `m_hat_1..`, `average_1..`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let dim = self.true_m.len();
        let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        let mut header = vec!["step".to_string(), "removed".into(), "remaining".into()];
        header.extend((1..=dim).map(|c| format!("m_hat_{c}")));
        header.extend((1..=dim).map(|c| format!("average_{c}")));
        header.extend(["h2_hat".into(), "dist_m_hat_to_true".into(), "dist_average_to_true".into()]);
        wtr.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.step.to_string(), r.removed.clone().unwrap_or_default(), r.remaining.to_string()];
            rec.extend(r.m_hat.iter().map(|v| v.to_string()));
            rec.extend(r.average.iter().map(|v| v.to_string()));
            rec.extend([r.h2_hat.to_string(), r.dist_m_hat_to_true.to_string(), r.dist_average_to_true.to_string()]);
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}
