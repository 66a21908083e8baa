//! Task-space potential and the swarm energy.
//!
//! For a set of drones with positions `x_i` and repulsion radii `q_i`:
//!
//! ```text
//! E_i  = theta * h(x_i)                                   (tree potential)
//!      + M * sum_{j != i} -1 / max(|x_j - x_i|, eps)      (attraction)
//!      + P/2 * sum_{|x_i - x_j| < q_i + q_j} (q_i + q_j - |x_i - x_j|)^2
//! E    = sum_i E_i
//! ```
//!
//! `h` is the distance to the nearest point of the task tree (nearest node
//! when `nodes_only`). Pair terms appear in both `E_i` and `E_j`, so the
//! gradient of `E` carries a factor of two on them.

use crate::geometry::{closest_point_on_segment, Vec2};
use crate::steiner::TaskTree;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldCoefficients {
    pub theta: f64,
    pub attraction: f64,
    pub repulsion: f64,
    /// Clamp on pair distances.
    pub floor: f64,
    /// Dead band around the tree inside which the task pull vanishes.
    pub tree_floor: f64,
    pub nodes_only: bool,
}

impl Default for FieldCoefficients {
    fn default() -> Self {
        FieldCoefficients { theta: 0.05, attraction: 0.05, repulsion: 0.3, floor: 0.5, tree_floor: 0.3, nodes_only: false }
    }
}

/// The two per-drone quantities the energy depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Body {
    pub position: Vec2,
    pub repulsion_radius: f64,
}

/// Nearest point of the tree to `x`; ties go to the lowest edge (or node) index.
pub fn nearest_tree_point(x: Vec2, tree: &TaskTree, nodes_only: bool) -> Vec2 {
    let mut best = tree.nodes[0].position;
    let mut best_d = f64::INFINITY;
    if nodes_only || tree.edges.is_empty() {
        for n in &tree.nodes {
            let d = (x - n.position).norm_sq();
            if d < best_d {
                best_d = d;
                best = n.position;
            }
        }
    } else {
        for &(a, b) in &tree.edges {
            let p = closest_point_on_segment(x, tree.nodes[a].position, tree.nodes[b].position);
            let d = (x - p).norm_sq();
            if d < best_d {
                best_d = d;
                best = p;
            }
        }
    }
    best
}

/// Distance from `x` to the tree.
pub fn task_potential(x: Vec2, tree: &TaskTree, nodes_only: bool) -> f64 {
    x.distance(nearest_tree_point(x, tree, nodes_only))
}

/// Gradient of [`task_potential`]: the unit vector away from the nearest tree
/// point, or zero within `floor` of the tree.
pub fn task_potential_gradient(x: Vec2, tree: &TaskTree, nodes_only: bool, floor: f64) -> Vec2 {
    let diff = x - nearest_tree_point(x, tree, nodes_only);
    let d = diff.norm();
    if d < floor {
        Vec2::ZERO
    } else {
        diff / d
    }
}

/// Pair energy of two drones as it enters the total (both halves).
fn pair_energy(a: &Body, b: &Body, coeffs: &FieldCoefficients) -> f64 {
    let d = a.position.distance(b.position);
    let mut e = -2.0 * coeffs.attraction / d.max(coeffs.floor);
    let reach = a.repulsion_radius + b.repulsion_radius;
    if d < reach {
        e += coeffs.repulsion * (reach - d) * (reach - d);
    }
    e
}

/// Gradient of the pair energy with respect to `a`'s position.
#[inline]
fn pair_gradient(a: &Body, b: &Body, coeffs: &FieldCoefficients) -> Vec2 {
    let diff = a.position - b.position;
    let d = diff.norm();
    let dc = d.max(coeffs.floor);
    let mut g = diff * (2.0 * coeffs.attraction / (dc * dc * dc));
    let reach = a.repulsion_radius + b.repulsion_radius;
    if d < reach && d > 0.0 {
        g -= diff * (2.0 * coeffs.repulsion * (reach - d) / d);
    }
    g
}

/// Elastic energy alone, `sum_i P/2 * sum_j (q_i + q_j - d_ij)^2` over close pairs.
pub fn elastic_energy(bodies: &[Body], coeffs: &FieldCoefficients) -> f64 {
    let mut e = 0.0;
    for i in 0..bodies.len() {
        for j in (i + 1)..bodies.len() {
            let d = bodies[i].position.distance(bodies[j].position);
            let reach = bodies[i].repulsion_radius + bodies[j].repulsion_radius;
            if d < reach {
                e += coeffs.repulsion * (reach - d) * (reach - d);
            }
        }
    }
    e
}

/// Total energy of the supplied drones.
pub fn total_energy(bodies: &[Body], tree: &TaskTree, coeffs: &FieldCoefficients) -> f64 {
    let mut e = 0.0;
    for (i, a) in bodies.iter().enumerate() {
        if coeffs.theta != 0.0 {
            e += coeffs.theta * task_potential(a.position, tree, coeffs.nodes_only);
        }
        for b in &bodies[i + 1..] {
            e += pair_energy(a, b, coeffs);
        }
    }
    e
}

/// Analytic gradient of [`total_energy`] with respect to every drone.
pub fn energy_gradient(bodies: &[Body], tree: &TaskTree, coeffs: &FieldCoefficients) -> Vec<Vec2> {
    let mut grad: Vec<Vec2> = bodies
        .iter()
        .map(|b| {
            if coeffs.theta == 0.0 {
                Vec2::ZERO
            } else {
                task_potential_gradient(b.position, tree, coeffs.nodes_only, coeffs.tree_floor) * coeffs.theta
            }
        })
        .collect();
    for i in 0..bodies.len() {
        for j in (i + 1)..bodies.len() {
            let g = pair_gradient(&bodies[i], &bodies[j], coeffs);
            grad[i] += g;
            grad[j] -= g;
        }
    }
    grad
}

/// Gradient of the total energy with respect to one drone, all others fixed.
pub fn single_gradient(me: &Body, others: &[Body], tree: &TaskTree, coeffs: &FieldCoefficients) -> Vec2 {
    let mut g = if coeffs.theta == 0.0 {
        Vec2::ZERO
    } else {
        task_potential_gradient(me.position, tree, coeffs.nodes_only, coeffs.tree_floor) * coeffs.theta
    };
    for o in others {
        g += pair_gradient(me, o, coeffs);
    }
    g
}
