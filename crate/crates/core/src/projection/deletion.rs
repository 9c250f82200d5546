use serde::{Deserialize, Serialize};

use super::{akaike_weights, model_average_location, solve_projection, AverageResult, ProjectionOptions, ProjectionResult};
use crate::mds::Embedding;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Remove the model with the smallest first embedding coordinate.
    Left,
    /// Remove the model with the largest first embedding coordinate.
    Right,
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Direction::Left),
            "right" => Ok(Direction::Right),
            other => Err(Error::invalid(format!("direction must be `left` or `right`, got `{other}`"))),
        }
    }
}

/// Everything a sweep needs; the embedding stays fixed throughout.
#[derive(Debug, Clone)]
pub struct SweepInput<'a> {
    pub embedding: &'a Embedding,
    pub aics: &'a [f64],
    pub sgf_hats: &'a [f64],
    pub sgg_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepStep {
    pub step: usize,
    /// Model deleted to reach this step (`None` at step 0).
    pub removed: Option<String>,
    pub remaining: Vec<String>,
    pub projection: ProjectionResult,
    pub average: AverageResult,
}

/// Repeatedly deletes the extreme model along the first coordinate and
/// recomputes weights, average and projection over the survivors.
pub fn deletion_sweep(
    input: &SweepInput<'_>,
    direction: Direction,
    steps: usize,
    opts: &ProjectionOptions,
) -> Result<Vec<SweepStep>> {
    let e = input.embedding;
    let r = e.len();
    if input.aics.len() != r || input.sgf_hats.len() != r {
        return Err(Error::Dimension { expected: r, found: input.aics.len().min(input.sgf_hats.len()) });
    }
    let max_steps = r.saturating_sub(e.dim() + 2);
    if steps > max_steps {
        return Err(Error::invalid(format!("at most {max_steps} deletions keep the projection identifiable, asked for {steps}")));
    }
    let mut alive: Vec<usize> = (0..r).collect();
    let mut removed = None;
    let mut out = Vec::with_capacity(steps + 1);
    for step in 0..=steps {
        if step > 0 {
            let pick = |a: &usize, b: &usize| {
                let (x, y) = (e.coords[(*a, 0)], e.coords[(*b, 0)]);
                match direction {
                    Direction::Left => x.total_cmp(&y),
                    Direction::Right => y.total_cmp(&x),
                }
                .then(a.cmp(b))
            };
            let pos = (0..alive.len()).min_by(|&i, &j| pick(&alive[i], &alive[j])).expect("models remain");
            removed = Some(e.names[alive.remove(pos)].clone());
        }
        let sub = e.subset(&alive);
        let aics: Vec<f64> = alive.iter().map(|&i| input.aics[i]).collect();
        let sgf: Vec<f64> = alive.iter().map(|&i| input.sgf_hats[i]).collect();
        let average = model_average_location(&sub, &akaike_weights(&aics)?)?;
        let projection = solve_projection(&sgf, &sub, input.sgg_hat, Some(&average.location), opts)?;
        out.push(SweepStep {
            step,
            removed: removed.clone(),
            remaining: sub.names.clone(),
            projection,
            average,
        });
    }
    Ok(out)
}
