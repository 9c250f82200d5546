use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{GaussianModel, Sample};
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathEdge {
    pub source: String,
    pub target: String,
    pub coef: f64,
}

/// Linear-Gaussian path model `x = c + Bx + ε`, `ε ~ N(0, diag(noise_sd²))`,
/// over an acyclic directed graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PathModel {
    variables: Vec<String>,
    edges: Vec<PathEdge>,
    noise_sd: Vec<f64>,
    intercepts: Vec<f64>,
    order: Vec<usize>,
    // (source index, target index) aligned with `edges`
    index: Vec<(usize, usize)>,
}

pub(crate) fn variable_index(variables: &[String]) -> Result<HashMap<&str, usize>> {
    let mut map = HashMap::with_capacity(variables.len());
    for (i, v) in variables.iter().enumerate() {
        if map.insert(v.as_str(), i).is_some() {
            return Err(Error::invalid(format!("duplicate variable name `{v}`")));
        }
    }
    Ok(map)
}

/// Topological order of `0..p` under the directed `edges`.
///
/// On failure the error names one cycle.
pub fn topological_order(names: &[String], edges: &[(usize, usize)]) -> Result<Vec<usize>> {
    let p = names.len();
    let mut indeg = vec![0usize; p];
    let mut children = vec![Vec::new(); p];
    for &(s, t) in edges {
        children[s].push(t);
        indeg[t] += 1;
    }
    // smallest-index-first keeps the order deterministic
    let mut ready: std::collections::BTreeSet<usize> = (0..p).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(p);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() == p {
        return Ok(order);
    }
    // every remaining node has a remaining parent; walk parents until a repeat
    let mut parent = vec![None; p];
    for &(s, t) in edges {
        if indeg[s] > 0 && indeg[t] > 0 {
            parent[t] = Some(s);
        }
    }
    let start = (0..p).find(|&v| indeg[v] > 0).expect("cycle exists");
    let mut seen = vec![usize::MAX; p];
    let mut walk = Vec::new();
    let mut v = start;
    while seen[v] == usize::MAX {
        seen[v] = walk.len();
        walk.push(v);
        v = parent[v].expect("node on a cycle has a parent");
    }
    let mut cycle: Vec<String> = walk[seen[v]..].iter().rev().map(|&i| names[i].clone()).collect();
    cycle.push(cycle[0].clone());
    Err(Error::Cycle(cycle))
}

impl PathModel {
    pub fn new(
        variables: Vec<String>,
        edges: Vec<PathEdge>,
        noise_sd: Vec<f64>,
        intercepts: Vec<f64>,
    ) -> Result<Self> {
        let p = variables.len();
        if p == 0 {
            return Err(Error::invalid("path model needs at least one variable"));
        }
        if noise_sd.len() != p {
            return Err(Error::Dimension { expected: p, found: noise_sd.len() });
        }
        if intercepts.len() != p {
            return Err(Error::Dimension { expected: p, found: intercepts.len() });
        }
        if let Some((v, sd)) = variables.iter().zip(&noise_sd).find(|(_, sd)| !(**sd > 0.0 && sd.is_finite())) {
            return Err(Error::invalid(format!("noise_sd for `{v}` must be positive, got {sd}")));
        }
        if intercepts.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite intercept"));
        }
        let lookup = variable_index(&variables)?;
        let mut index = Vec::with_capacity(edges.len());
        for e in &edges {
            let find = |name: &str| {
                lookup
                    .get(name)
                    .copied()
                    .ok_or_else(|| Error::invalid(format!("edge references unknown variable `{name}`")))
            };
            let (s, t) = (find(&e.source)?, find(&e.target)?);
            if !e.coef.is_finite() {
                return Err(Error::invalid(format!("non-finite coefficient on {} -> {}", e.source, e.target)));
            }
            if index.contains(&(s, t)) {
                return Err(Error::invalid(format!("duplicate edge {} -> {}", e.source, e.target)));
            }
            index.push((s, t));
        }
        let order = topological_order(&variables, &index)?;
        let pm = PathModel { variables, edges, noise_sd, intercepts, order, index };
        // the implied joint must be a valid Gaussian
        pm.reduce()?;
        Ok(pm)
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn edges(&self) -> &[PathEdge] {
        &self.edges
    }

    pub fn noise_sd(&self) -> &[f64] {
        &self.noise_sd
    }

    pub fn intercepts(&self) -> &[f64] {
        &self.intercepts
    }

    /// Topological order of variable indices.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Exact implied joint Gaussian: `μ = (I-B)⁻¹c`, `Σ = (I-B)⁻¹ D (I-B)⁻ᵀ`.
    pub fn reduce(&self) -> Result<GaussianModel> {
        let p = self.variables.len();
        let mut i_minus_b = DMatrix::<f64>::identity(p, p);
        for (e, &(s, t)) in self.edges.iter().zip(&self.index) {
            i_minus_b[(t, s)] -= e.coef;
        }
        let inv = i_minus_b.try_inverse().ok_or(Error::Singular)?;
        let c = DVector::from_column_slice(&self.intercepts);
        let d = DMatrix::from_diagonal(&DVector::from_iterator(p, self.noise_sd.iter().map(|s| s * s)));
        let mean = &inv * c;
        let cov = &inv * d * inv.transpose();
        let cov = (&cov + cov.transpose()) * 0.5;
        GaussianModel::new(mean, cov)
    }

    /// Sequential simulation of the structural equations in topological order.
    pub fn simulate(&self, n: usize, seed: u64) -> Result<Sample> {
        let p = self.variables.len();
        let mut rng = rng::seeded(seed);
        let mut parents = vec![Vec::new(); p];
        for (e, &(s, t)) in self.edges.iter().zip(&self.index) {
            parents[t].push((s, e.coef));
        }
        let mut data = DMatrix::zeros(n, p);
        let mut row = vec![0.0; p];
        for i in 0..n {
            for &v in &self.order {
                let eps: f64 = StandardNormal.sample(&mut rng);
                row[v] = self.intercepts[v]
                    + parents[v].iter().map(|&(s, b)| b * row[s]).sum::<f64>()
                    + self.noise_sd[v] * eps;
            }
            for j in 0..p {
                data[(i, j)] = row[j];
            }
        }
        Sample::new(data, self.variables.clone())
    }
}
