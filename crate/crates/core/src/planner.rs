//! Potential-field motion planner: a few steps of gradient descent on the
//! swarm energy per tick, capped by each drone's speed.

use crate::error::{Result, SimError};
use crate::field::{energy_gradient, single_gradient, Body, FieldCoefficients};
use crate::geometry::Vec2;
use crate::steiner::TaskTree;
use crate::world::Instructions;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerParams {
    pub step_size: f64,
    pub max_inner_steps: usize,
    /// Descent stops once every gradient component is below this.
    pub equilibrium_tol: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams { step_size: 0.1, max_inner_steps: 20, equilibrium_tol: 1e-4 }
    }
}

/// A drone as the planner sees it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanDrone {
    pub id: usize,
    pub position: Vec2,
    pub repulsion_radius: f64,
    pub max_speed: f64,
}

impl PlanDrone {
    fn body_at(&self, position: Vec2) -> Body {
        Body { position, repulsion_radius: self.repulsion_radius }
    }
}

/// Largest `alpha` in [0, 1] with `|offset + alpha * step| <= limit`,
/// assuming `|offset| <= limit`.
fn admissible_fraction(offset: Vec2, step: Vec2, limit: f64) -> f64 {
    if (offset + step).norm() <= limit {
        return 1.0;
    }
    let a = step.norm_sq();
    let b = offset.dot(step);
    let c = (offset.norm_sq() - limit * limit).min(0.0);
    let disc = (b * b - a * c).max(0.0);
    ((-b + disc.sqrt()) / a).clamp(0.0, 1.0)
}

fn max_component(g: &[Vec2]) -> f64 {
    g.iter().fold(0.0f64, |m, v| m.max(v.x.abs()).max(v.y.abs()))
}

/// Joint descent over all supplied drones.
///
/// Terminates at equilibrium or after `max_inner_steps`. A drone whose next
/// step would carry it past its speed limit takes a shortened step that
/// lands exactly on the limit and is then held there while the rest of the
/// swarm keeps descending.
pub fn plan_motion(
    drones: &[PlanDrone],
    tree: &TaskTree,
    coeffs: &FieldCoefficients,
    params: &PlannerParams,
) -> Result<Instructions> {
    let start: Vec<Vec2> = drones.iter().map(|d| d.position).collect();
    let mut pos = start.clone();
    let mut capped = vec![false; drones.len()];
    let mut bodies: Vec<Body> = drones.iter().map(|d| d.body_at(d.position)).collect();
    for _ in 0..params.max_inner_steps {
        for (b, p) in bodies.iter_mut().zip(&pos) {
            b.position = *p;
        }
        let mut grad = energy_gradient(&bodies, tree, coeffs);
        if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
            return Err(SimError::NonFinite {
                drone: drones[i].id,
                tick: tree.built_at_tick,
                detail: "energy gradient".into(),
            });
        }
        for (g, &c) in grad.iter_mut().zip(&capped) {
            if c {
                *g = Vec2::ZERO;
            }
        }
        if max_component(&grad) < params.equilibrium_tol {
            break;
        }
        for (i, d) in drones.iter().enumerate() {
            if capped[i] {
                continue;
            }
            let step = grad[i] * -params.step_size;
            let alpha = admissible_fraction(pos[i] - start[i], step, d.max_speed);
            pos[i] += step * alpha;
            capped[i] = alpha < 1.0;
        }
    }
    Ok(drones
        .iter()
        .enumerate()
        .map(|(i, d)| (d.id, (pos[i] - start[i]).clamp_norm(d.max_speed)))
        .collect())
}

/// Descent on one drone's coordinate with every other drone frozen.
pub fn plan_single(
    me: &PlanDrone,
    others: &[Body],
    tree: &TaskTree,
    coeffs: &FieldCoefficients,
    params: &PlannerParams,
) -> Result<Vec2> {
    let start = me.position;
    let mut pos = start;
    for _ in 0..params.max_inner_steps {
        let g = single_gradient(&me.body_at(pos), others, tree, coeffs);
        if !g.is_finite() {
            return Err(SimError::NonFinite { drone: me.id, tick: tree.built_at_tick, detail: "energy gradient".into() });
        }
        if g.x.abs().max(g.y.abs()) < params.equilibrium_tol {
            break;
        }
        let step = g * -params.step_size;
        let alpha = admissible_fraction(pos - start, step, me.max_speed);
        pos += step * alpha;
        if alpha < 1.0 {
            break;
        }
    }
    Ok((pos - start).clamp_norm(me.max_speed))
}
