//! Building a scenario from a config file, a preset and flag overrides.

use anyhow::{Context, Result};
use rtnua::{Mode, ScenarioConfig, SizePreset};
use std::path::Path;

/// A labeled scenario ready to be batched.
#[derive(Debug, Clone)]
pub struct Job {
    pub id: String,
    pub size: String,
    pub config: ScenarioConfig,
}

impl Job {
    pub fn new(config: ScenarioConfig) -> Self {
        let size = size_label(&config);
        let id = format!("{size}/{}%", pct(config.attrition_per_tick));
        Job { id, size, config }
    }

    pub fn named(id: impl Into<String>, config: ScenarioConfig) -> Self {
        Job { id: id.into(), size: size_label(&config), config }
    }
}

/// Attrition rate as a percentage, without float noise like `0.5000000001`.
pub fn pct(p: f64) -> f64 {
    (p * 100.0 * 1e9).round() / 1e9
}

/// The preset whose dimensions the config uses, or `custom`.
pub fn size_label(c: &ScenarioConfig) -> String {
    SizePreset::ALL
        .into_iter()
        .find(|s| s.dimensions() == (c.n_drones, c.m_tasks, c.field_half_width))
        .map(|s| s.name().to_string())
        .unwrap_or_else(|| "custom".into())
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ScenarioConfig::from_kv_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Layers, in order: config file (or defaults), preset dimensions, attrition
/// in percent per tick, mode, then `key=value` overrides.
pub fn build_config(
    file: Option<&Path>,
    preset: Option<SizePreset>,
    attrition_pct: Option<f64>,
    mode: Option<Mode>,
    overrides: &[String],
) -> Result<ScenarioConfig> {
    let mut c = match file {
        Some(p) => load_config(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = preset {
        (c.n_drones, c.m_tasks, c.field_half_width) = s.dimensions();
    }
    if let Some(a) = attrition_pct {
        c.attrition_per_tick = a / 100.0;
    }
    if let Some(m) = mode {
        c.mode = m;
    }
    for kv in overrides {
        let (k, v) = kv.split_once('=').with_context(|| format!("override `{kv}` is not key=value"))?;
        c = c.with_override(k.trim(), v.trim()).with_context(|| format!("override `{kv}`"))?;
    }
    c.validate()?;
    Ok(c)
}
