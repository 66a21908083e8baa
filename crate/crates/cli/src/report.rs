//! CSV rows for episodes, per-tick series, aggregates, deltas and ablations.

use crate::scenario::{pct, Job};
use anyhow::{Context, Result};
use rtnua::engine::mean_stderr;
use rtnua::{ControllerKind, EpisodeResult, Mode};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub config_id: String,
    pub size: String,
    pub attrition_pct: f64,
    pub controller: ControllerKind,
    pub mode: Mode,
    pub seed: u64,
    pub tu1: f64,
    pub tu2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub config_id: String,
    pub controller: ControllerKind,
    pub mode: Mode,
    pub seed: u64,
    pub tick: u64,
    pub alive: usize,
    pub active: usize,
    pub connected_tasks: usize,
    pub retained_tasks: usize,
    pub discovered_tasks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub config_id: String,
    pub size: String,
    pub attrition_pct: f64,
    pub controller: ControllerKind,
    pub mode: Mode,
    pub n: usize,
    pub tu1_mean: f64,
    pub tu1_stderr: f64,
    pub tu2_mean: f64,
    pub tu2_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub config_id: String,
    pub size: String,
    pub attrition_pct: f64,
    pub mode: Mode,
    pub tu1_delta: f64,
    pub tu2_delta: f64,
}

/// Episode rows with uptimes in percent, in batch order.
pub fn episode_rows(jobs: &[Job], results: &[EpisodeResult]) -> Vec<EpisodeRow> {
    let by_id: HashMap<&str, &Job> = jobs.iter().map(|j| (j.id.as_str(), j)).collect();
    results
        .iter()
        .map(|r| {
            let job = by_id[r.config_id.as_str()];
            EpisodeRow {
                config_id: r.config_id.clone(),
                size: job.size.clone(),
                attrition_pct: pct(job.config.attrition_per_tick),
                controller: r.controller,
                mode: r.mode,
                seed: r.seed,
                tu1: 100.0 * r.tu1,
                tu2: 100.0 * r.tu2,
            }
        })
        .collect()
}

pub fn series_rows(results: &[EpisodeResult]) -> Vec<SeriesRow> {
    results
        .iter()
        .flat_map(|r| {
            r.series.iter().enumerate().map(move |(t, s)| SeriesRow {
                config_id: r.config_id.clone(),
                controller: r.controller,
                mode: r.mode,
                seed: r.seed,
                tick: t as u64,
                alive: s.alive,
                active: s.active,
                connected_tasks: s.connected_tasks,
                retained_tasks: s.retained_tasks,
                discovered_tasks: s.discovered_tasks,
            })
        })
        .collect()
}

/// One row per (config, controller, mode), in first-seen order.
pub fn aggregate_rows(episodes: &[EpisodeRow]) -> Vec<AggregateRow> {
    let mut order: Vec<(String, ControllerKind, Mode)> = Vec::new();
    let mut groups: HashMap<(String, ControllerKind, Mode), Vec<&EpisodeRow>> = HashMap::new();
    for e in episodes {
        let key = (e.config_id.clone(), e.controller, e.mode);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(e);
    }
    order
        .into_iter()
        .map(|key| {
            let g = &groups[&key];
            let (tu1_mean, tu1_stderr) = mean_stderr(&g.iter().map(|e| e.tu1).collect::<Vec<_>>());
            let (tu2_mean, tu2_stderr) = mean_stderr(&g.iter().map(|e| e.tu2).collect::<Vec<_>>());
            AggregateRow {
                config_id: key.0,
                size: g[0].size.clone(),
                attrition_pct: g[0].attrition_pct,
                controller: key.1,
                mode: key.2,
                n: g.len(),
                tu1_mean,
                tu1_stderr,
                tu2_mean,
                tu2_stderr,
            }
        })
        .collect()
}

/// ΦIREMAN minus DCCRS per config, for configs that have both.
pub fn delta_rows(aggregates: &[AggregateRow]) -> Vec<DeltaRow> {
    aggregates
        .iter()
        .filter(|a| a.controller == ControllerKind::Phireman)
        .filter_map(|p| {
            let d = aggregates
                .iter()
                .find(|d| d.controller == ControllerKind::Dccrs && d.config_id == p.config_id && d.mode == p.mode)?;
            Some(DeltaRow {
                config_id: p.config_id.clone(),
                size: p.size.clone(),
                attrition_pct: p.attrition_pct,
                mode: p.mode,
                tu1_delta: p.tu1_mean - d.tu1_mean,
                tu2_delta: p.tu2_mean - d.tu2_mean,
            })
        })
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    r.deserialize().collect::<std::result::Result<_, _>>().with_context(|| format!("reading {}", path.display()))
}

/// Aligned text table of aggregates for the terminal.
pub fn format_aggregates(rows: &[AggregateRow]) -> String {
    let mut out = format!("{:<14} {:<9} {:<6} {:>4} {:>15} {:>15}\n", "config", "controller", "mode", "n", "TU1 %", "TU2 %");
    for r in rows {
        out += &format!(
            "{:<14} {:<9} {:<6} {:>4} {:>8.2} ±{:>5.2} {:>8.2} ±{:>5.2}\n",
            r.config_id, r.controller, r.mode, r.n, r.tu1_mean, r.tu1_stderr, r.tu2_mean, r.tu2_stderr
        );
    }
    out
}
