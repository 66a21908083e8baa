//! World state: drones, tasks, the base station, and the per-tick
//! stochastic dynamics (task random walk, attrition) plus motion application.

use crate::config::ScenarioConfig;
use crate::error::{Result, SimError};
use crate::geometry::Vec2;
use crate::rng::RngStreams;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// Motion instructions keyed by drone id.
pub type Instructions = BTreeMap<usize, Vec2>;

/// Probability that a drone with half-life `half_life` attrits within `dt`.
pub fn attrition_probability(half_life: f64, dt: f64) -> f64 {
    assert!(half_life > 0.0 && dt > 0.0, "half-life and duration must be positive");
    1.0 - 0.5f64.powf(dt / half_life)
}

/// Half-life giving per-tick attrition probability `p`; `None` when `p == 0`.
pub fn half_life_for(p: f64) -> Option<f64> {
    if p <= 0.0 {
        None
    } else {
        Some(0.5f64.ln() / (1.0 - p).ln())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneState {
    pub id: usize,
    pub position: Vec2,
    /// Per-tick attrition probability; the half-life is derived from it.
    pub attrition_per_tick: f64,
    pub comm_radius: f64,
    pub repulsion_radius: f64,
    pub max_speed: f64,
    pub attrited: bool,
    pub active: bool,
    /// Displacement realized during the previous tick.
    pub velocity: Vec2,
}

impl DroneState {
    pub fn half_life(&self) -> Option<f64> {
        half_life_for(self.attrition_per_tick)
    }

    pub fn alive(&self) -> bool {
        !self.attrited
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskState {
    pub id: usize,
    pub position: Vec2,
    pub connected: bool,
    pub ever_connected: bool,
    pub first_connect_tick: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub tick: u64,
    pub drones: Vec<DroneState>,
    pub tasks: Vec<TaskState>,
    /// The base station sits at the origin; only its radius varies.
    pub base_radius: f64,
}

impl WorldState {
    pub const BASE: Vec2 = Vec2::ZERO;

    pub fn alive_count(&self) -> usize {
        self.drones.iter().filter(|d| d.alive()).count()
    }

    pub fn active_count(&self) -> usize {
        self.drones.iter().filter(|d| d.active).count()
    }

    pub fn connected_task_count(&self) -> usize {
        self.tasks.iter().filter(|t| t.connected).count()
    }

    pub fn task_positions(&self) -> Vec<Vec2> {
        self.tasks.iter().map(|t| t.position).collect()
    }
}

/// Samples the initial world: tasks uniform over the square field, drones on
/// a noisy ring about the base.
pub fn generate_scenario(config: &ScenarioConfig, streams: &RngStreams) -> Result<WorldState> {
    config.validate()?;
    let mut rng = streams.scenario_init();
    let half = config.field_half_width;
    let tasks = (0..config.m_tasks)
        .map(|id| TaskState {
            id,
            position: Vec2::new(rng.gen_range(-half..half), rng.gen_range(-half..half)),
            connected: false,
            ever_connected: false,
            first_connect_tick: None,
        })
        .collect();
    let drones = (0..config.n_drones)
        .map(|id| {
            let angle = rng.gen_range(0.0..TAU);
            let nx: f64 = rng.sample(StandardNormal);
            let ny: f64 = rng.sample(StandardNormal);
            let ring = Vec2::new(angle.cos(), angle.sin()) * config.init_ring_radius;
            DroneState {
                id,
                position: ring + Vec2::new(nx, ny) * config.init_ring_sigma,
                attrition_per_tick: config.attrition_per_tick,
                comm_radius: config.comm_radius,
                repulsion_radius: config.repulsion_radius,
                max_speed: config.max_speed,
                attrited: false,
                active: false,
                velocity: Vec2::ZERO,
            }
        })
        .collect();
    Ok(WorldState { tick: 0, drones, tasks, base_radius: config.base_comm_radius })
}

/// Independent Bernoulli attrition for every surviving drone at the current tick.
pub fn step_attrition(world: &mut WorldState, streams: &RngStreams) {
    let tick = world.tick;
    for d in world.drones.iter_mut().filter(|d| !d.attrited) {
        if streams.attrition_uniform(d.id, tick) < d.attrition_per_tick {
            d.attrited = true;
            d.active = false;
        }
    }
}

/// Isotropic Gaussian random walk of every task.
pub fn step_tasks<R: Rng>(world: &mut WorldState, sigma: f64, rng: &mut R) {
    if sigma == 0.0 {
        return;
    }
    for t in &mut world.tasks {
        let dx: f64 = StandardNormal.sample(rng);
        let dy: f64 = StandardNormal.sample(rng);
        t.position += Vec2::new(dx, dy) * sigma;
    }
}

/// Moves every drone for one tick.
///
/// Active drones follow their instruction clamped to their speed; attrited
/// drones stay put; alive but disconnected drones head straight for the base.
pub fn apply_motion(world: &mut WorldState, instructions: &Instructions) -> Result<()> {
    for (&id, v) in instructions {
        if !v.is_finite() {
            return Err(SimError::NonFinite {
                drone: id,
                tick: world.tick,
                detail: format!("instruction ({}, {})", v.x, v.y),
            });
        }
    }
    for d in &mut world.drones {
        let step = if d.attrited {
            Vec2::ZERO
        } else if d.active {
            instructions.get(&d.id).copied().unwrap_or(Vec2::ZERO).clamp_norm(d.max_speed)
        } else {
            return_to_base_step(d.position, d.max_speed)
        };
        d.position += step;
        d.velocity = step;
    }
    Ok(())
}

/// Full-speed displacement toward the origin, stopping exactly on it.
pub fn return_to_base_step(position: Vec2, speed: f64) -> Vec2 {
    let dist = position.norm();
    if dist <= speed {
        -position
    } else {
        -position * (speed / dist)
    }
}
