//! Flocking baseline with tasks acting as leaders.
//!
//! Each drone sums five influences and clamps the result to its speed:
//! cohesion toward the centroid of its neighbors, elastic repulsion from
//! neighbors closer than `q_i + q_j`, velocity matching, and a pull toward
//! the nearest task that falls off with distance and is damped by local
//! crowding.

use crate::geometry::Vec2;
use crate::world::Instructions;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DccrsParams {
    pub attraction: f64,
    pub repulsion: f64,
    pub alignment: f64,
    pub density_gain: f64,
    pub leader: f64,
    pub leader_falloff: f64,
}

impl Default for DccrsParams {
    fn default() -> Self {
        let c = crate::config::ScenarioConfig::default();
        DccrsParams::from(&c)
    }
}

impl From<&crate::config::ScenarioConfig> for DccrsParams {
    fn from(c: &crate::config::ScenarioConfig) -> Self {
        DccrsParams {
            attraction: c.dccrs_attraction,
            repulsion: c.dccrs_repulsion,
            alignment: c.dccrs_alignment,
            density_gain: c.dccrs_density_gain,
            leader: c.dccrs_leader,
            leader_falloff: c.dccrs_leader_falloff,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlockAgent {
    pub id: usize,
    pub position: Vec2,
    pub velocity: Vec2,
    pub repulsion_radius: f64,
    pub comm_radius: f64,
    pub max_speed: f64,
}

const MIN_SEPARATION: f64 = 1e-3;

/// Instruction for `me` given the agents it can see and the known tasks.
/// Only agents within `me`'s communication radius count as neighbors.
pub fn flock_instruction(me: &FlockAgent, others: &[FlockAgent], tasks: &[Vec2], params: &DccrsParams) -> Vec2 {
    let mut centroid = Vec2::ZERO;
    let mut mean_vel = Vec2::ZERO;
    let mut count = 0usize;
    let mut push = Vec2::ZERO;
    for o in others {
        if o.id == me.id {
            continue;
        }
        let diff = me.position - o.position;
        let d = diff.norm();
        if d > me.comm_radius.min(o.comm_radius) {
            continue;
        }
        count += 1;
        centroid += o.position;
        mean_vel += o.velocity;
        let reach = me.repulsion_radius + o.repulsion_radius;
        if d < reach {
            push += diff * ((reach - d) / d.max(MIN_SEPARATION));
        }
    }
    let mut force = push * params.repulsion;
    if count > 0 {
        let k = count as f64;
        force += (centroid / k - me.position) * params.attraction;
        force += (mean_vel / k - me.velocity) * params.alignment;
    }
    let nearest = tasks
        .iter()
        .copied()
        .min_by(|a, b| (*a - me.position).norm_sq().total_cmp(&(*b - me.position).norm_sq()));
    if let Some(t) = nearest {
        let to = t - me.position;
        let d = to.norm();
        let falloff = if params.leader_falloff > 0.0 { params.leader_falloff / (params.leader_falloff + d) } else { 1.0 };
        let density = 1.0 / (1.0 + params.density_gain * count as f64);
        force += to.normalized() * (params.leader * falloff * density);
    }
    force.clamp_norm(me.max_speed)
}

/// Centralized flocking plan: every supplied drone sees every other one
/// within communication range.
pub fn plan_motion_dccrs(drones: &[FlockAgent], tasks: &[Vec2], params: &DccrsParams) -> Instructions {
    drones.iter().map(|d| (d.id, flock_instruction(d, drones, tasks, params))).collect()
}
