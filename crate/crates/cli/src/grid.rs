//! Exhaustive parameter grid search.

use anyhow::{bail, Context, Result};
use serde::Serialize;

/// One swept parameter and its candidate values, as config-file literals.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<String>,
}

impl std::str::FromStr for Axis {
    type Err = anyhow::Error;
    /// `key=v1,v2,...`
    fn from_str(s: &str) -> Result<Self> {
        let (key, vals) = s.split_once('=').with_context(|| format!("axis `{s}` is not key=v1,v2,..."))?;
        let values: Vec<String> = vals.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
        if key.trim().is_empty() || values.is_empty() {
            bail!("axis `{s}` needs a key and at least one value");
        }
        Ok(Axis { key: key.trim().to_string(), values })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Score {
    pub objective: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub assignment: Vec<(String, String)>,
    pub score: Score,
}

/// Every combination of the axes, last axis varying fastest.
pub fn enumerate(axes: &[Axis]) -> Vec<Vec<(String, String)>> {
    let mut points = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p: Vec<(String, String)>| {
                axis.values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((axis.key.clone(), v.clone()));
                    q
                })
            })
            .collect();
    }
    points
}

/// Evaluates every point and returns all scores plus the index of the best.
/// Ties keep the point that comes first in enumeration order.
pub fn search<F>(axes: &[Axis], mut evaluate: F) -> Result<(Vec<GridPoint>, usize)>
where
    F: FnMut(&[(String, String)]) -> Result<Score>,
{
    if axes.is_empty() {
        bail!("grid search needs at least one axis");
    }
    let mut scored = Vec::new();
    let mut best = 0;
    for (i, assignment) in enumerate(axes).into_iter().enumerate() {
        let score = evaluate(&assignment)?;
        if score.objective > scored.get(best).map(|p: &GridPoint| p.score.objective).unwrap_or(f64::NEG_INFINITY) {
            best = i;
        }
        scored.push(GridPoint { assignment, score });
    }
    Ok((scored, best))
}
