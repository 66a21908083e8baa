//! Scenario and algorithm parameters, problem-size presets, and the flat
//! `key = value` config file format.

use crate::error::{Result, SimError};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// How the potential-field controller obtains its information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Centralized planner with perfect knowledge of every networked drone.
    Sync,
    /// Per-drone planning from flooded, possibly stale knowledge.
    Async,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Mode::Sync => "sync",
            Mode::Async => "async",
        })
    }
}

impl FromStr for Mode {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sync" => Ok(Mode::Sync),
            "async" => Ok(Mode::Async),
            other => Err(SimError::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

/// Every problem and algorithm parameter of one scenario.
///
/// The struct is flat so that it maps one-to-one onto the config file
/// format: one `key = value` line per field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    // problem
    pub n_drones: usize,
    pub m_tasks: usize,
    pub field_half_width: f64,
    pub base_comm_radius: f64,
    pub horizon: u64,
    pub attrition_per_tick: f64,
    pub task_walk_sigma: f64,
    pub init_ring_radius: f64,
    pub init_ring_sigma: f64,
    pub comm_radius: f64,
    pub repulsion_radius: f64,
    pub max_speed: f64,
    pub seed: u64,

    // task tree
    pub c_b: f64,
    pub nu: f64,
    pub topology_period: u64,
    pub steiner_refinement: bool,

    // potential field
    pub theta: f64,
    pub attraction: f64,
    pub repulsion: f64,
    pub singularity_floor: f64,
    /// Drones closer than this to the tree feel no pull from it.
    pub tree_floor: f64,
    pub nodes_only: bool,

    // descent planner
    pub step_size: f64,
    pub max_inner_steps: usize,
    pub equilibrium_tol: f64,

    // messaging
    pub mode: Mode,
    pub max_report_age: u64,
    /// `None` means three communication radii.
    pub max_report_distance: Option<f64>,
    pub max_tree_age: u64,

    // flocking baseline
    pub dccrs_attraction: f64,
    pub dccrs_repulsion: f64,
    pub dccrs_alignment: f64,
    pub dccrs_density_gain: f64,
    pub dccrs_leader: f64,
    pub dccrs_leader_falloff: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_drones: 50,
            m_tasks: 10,
            field_half_width: 5.0,
            base_comm_radius: 2.0,
            horizon: 200,
            attrition_per_tick: 0.01,
            task_walk_sigma: 0.1,
            init_ring_radius: 1.0,
            init_ring_sigma: 0.2,
            comm_radius: 2.0,
            repulsion_radius: 1.0,
            max_speed: 0.15,
            seed: 0,

            c_b: 1.0,
            nu: 0.99,
            topology_period: 1,
            steiner_refinement: true,

            theta: 0.05,
            attraction: 0.05,
            repulsion: 0.3,
            singularity_floor: 0.5,
            tree_floor: 0.3,
            nodes_only: false,

            step_size: 0.1,
            max_inner_steps: 20,
            equilibrium_tol: 1e-4,

            mode: Mode::Async,
            max_report_age: 2,
            max_report_distance: None,
            max_tree_age: 5,

            dccrs_attraction: 0.05,
            dccrs_repulsion: 0.3,
            dccrs_alignment: 0.1,
            dccrs_density_gain: 0.5,
            dccrs_leader: 0.1,
            dccrs_leader_falloff: 0.0,
        }
    }
}

impl ScenarioConfig {
    /// Default algorithm parameters on a named problem size and attrition rate.
    pub fn preset(size: SizePreset, attrition_per_tick: f64) -> Self {
        let (n, m, half) = size.dimensions();
        ScenarioConfig {
            n_drones: n,
            m_tasks: m,
            field_half_width: half,
            attrition_per_tick,
            ..ScenarioConfig::default()
        }
    }

    /// Reported-data distance cutoff for knowledge pruning.
    pub fn report_distance(&self) -> f64 {
        self.max_report_distance.unwrap_or(3.0 * self.comm_radius)
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(msg: impl Into<String>) -> Result<()> {
            Err(SimError::InvalidConfig(msg.into()))
        }
        let positive = [
            ("field_half_width", self.field_half_width),
            ("base_comm_radius", self.base_comm_radius),
            ("init_ring_radius", self.init_ring_radius),
            ("comm_radius", self.comm_radius),
            ("repulsion_radius", self.repulsion_radius),
            ("max_speed", self.max_speed),
            ("singularity_floor", self.singularity_floor),
            ("step_size", self.step_size),
            ("equilibrium_tol", self.equilibrium_tol),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be a positive finite number, got {v}"));
            }
        }
        let nonneg = [
            ("task_walk_sigma", self.task_walk_sigma),
            ("init_ring_sigma", self.init_ring_sigma),
            ("c_b", self.c_b),
            ("theta", self.theta),
            ("tree_floor", self.tree_floor),
            ("attraction", self.attraction),
            ("repulsion", self.repulsion),
            ("dccrs_attraction", self.dccrs_attraction),
            ("dccrs_repulsion", self.dccrs_repulsion),
            ("dccrs_alignment", self.dccrs_alignment),
            ("dccrs_density_gain", self.dccrs_density_gain),
            ("dccrs_leader", self.dccrs_leader),
            ("dccrs_leader_falloff", self.dccrs_leader_falloff),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be a nonnegative finite number, got {v}"));
            }
        }
        if self.m_tasks == 0 {
            return bad("m_tasks must be positive");
        }
        if self.horizon == 0 {
            return bad("horizon must be positive");
        }
        if !(0.0..1.0).contains(&self.attrition_per_tick) {
            return bad(format!(
                "attrition_per_tick must lie in [0, 1), got {}",
                self.attrition_per_tick
            ));
        }
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return bad(format!("nu must lie in (0, 1], got {}", self.nu));
        }
        if self.topology_period == 0 {
            return bad("topology_period must be at least 1");
        }
        if self.max_inner_steps == 0 {
            return bad("max_inner_steps must be at least 1");
        }
        if let Some(d) = self.max_report_distance {
            if !(d > 0.0) {
                return bad("max_report_distance must be positive");
            }
        }
        Ok(())
    }

    /// Parses the flat `key = value` format. Unknown keys are rejected.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Renders the config in the same flat format `from_kv_str` reads.
    pub fn to_kv_string(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    /// Applies a single `key = value` override on top of this config.
    pub fn with_override(&self, key: &str, value: &str) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(&self.to_kv_string())
            .map_err(|e| SimError::Parse(e.to_string()))?;
        let parsed: toml::Table = toml::from_str(&format!("{key} = {value}"))
            .or_else(|_| toml::from_str(&format!("{key} = \"{value}\"")))
            .map_err(|e| SimError::Parse(e.to_string()))?;
        for (k, v) in parsed {
            let v = match (table.get(&k), v) {
                (Some(toml::Value::Float(_)), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
                (_, v) => v,
            };
            table.insert(k, v);
        }
        let text = toml::to_string(&table).map_err(|e| SimError::Parse(e.to_string()))?;
        Self::from_kv_str(&text)
    }
}

/// Named problem sizes used by the comparison sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SizePreset {
    XS,
    S,
    M,
    L,
    XL,
}

impl SizePreset {
    pub const ALL: [SizePreset; 5] = [
        SizePreset::XS,
        SizePreset::S,
        SizePreset::M,
        SizePreset::L,
        SizePreset::XL,
    ];

    /// (drones, tasks, field half-width)
    pub fn dimensions(self) -> (usize, usize, f64) {
        match self {
            SizePreset::XS => (20, 5, 2.0),
            SizePreset::S => (50, 10, 5.0),
            SizePreset::M => (100, 20, 10.0),
            SizePreset::L => (200, 50, 20.0),
            SizePreset::XL => (500, 100, 50.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SizePreset::XS => "XS",
            SizePreset::S => "S",
            SizePreset::M => "M",
            SizePreset::L => "L",
            SizePreset::XL => "XL",
        }
    }
}

impl fmt::Display for SizePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for SizePreset {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xs" => Ok(SizePreset::XS),
            "s" => Ok(SizePreset::S),
            "m" => Ok(SizePreset::M),
            "l" => Ok(SizePreset::L),
            "xl" => Ok(SizePreset::XL),
            other => Err(SimError::Parse(format!("unknown preset `{other}`"))),
        }
    }
}

/// Per-tick attrition probabilities of the comparison sweep.
pub const ATTRITION_GRID: [f64; 5] = [0.0, 0.005, 0.01, 0.02, 0.05];
