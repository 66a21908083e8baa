//! Reference implementations used as test oracles. They are written for
//! clarity rather than speed and share no code with the library paths they
//! check.
#![allow(dead_code)]

use rand::Rng;
use rtnua::field::{total_energy, Body, FieldCoefficients};
use rtnua::steiner::TaskTree;
use rtnua::world::{DroneState, TaskState, WorldState};
use rtnua::Vec2;

/// Activation by iterating the recursive definition to a fixed point: a drone
/// is active when it survives and either reaches the base directly or links
/// to an active drone. Starts from nobody active.
pub fn fixed_point_activation(world: &WorldState) -> Vec<usize> {
    let n = world.drones.len();
    let mut active = vec![false; n];
    loop {
        let mut next = active.clone();
        for (i, di) in world.drones.iter().enumerate() {
            if di.attrited {
                next[i] = false;
                continue;
            }
            let direct = (di.position.x.powi(2) + di.position.y.powi(2)).sqrt() <= world.base_radius.min(di.comm_radius);
            let relayed = world.drones.iter().enumerate().any(|(j, dj)| {
                j != i
                    && active[j]
                    && ((di.position.x - dj.position.x).powi(2) + (di.position.y - dj.position.y).powi(2)).sqrt()
                        <= di.comm_radius.min(dj.comm_radius)
            });
            next[i] = direct || relayed;
        }
        if next == active {
            break;
        }
        active = next;
    }
    (0..n).filter(|&i| active[i]).map(|i| world.drones[i].id).collect()
}

pub fn random_drone(rng: &mut impl Rng, id: usize, half: f64) -> DroneState {
    DroneState {
        id,
        position: Vec2::new(rng.gen_range(-half..half), rng.gen_range(-half..half)),
        attrition_per_tick: 0.0,
        comm_radius: rng.gen_range(0.5..3.0),
        repulsion_radius: 1.0,
        max_speed: 0.15,
        attrited: rng.gen_bool(0.15),
        active: false,
        velocity: Vec2::ZERO,
    }
}

/// A random world with up to `max_drones` drones and a few tasks.
pub fn random_world(rng: &mut impl Rng, max_drones: usize) -> WorldState {
    let n = rng.gen_range(0..=max_drones);
    let half = rng.gen_range(1.0..6.0);
    let drones = (0..n).map(|id| random_drone(rng, id, half)).collect();
    let tasks = (0..rng.gen_range(1..5))
        .map(|id| TaskState {
            id,
            position: Vec2::new(rng.gen_range(-half..half), rng.gen_range(-half..half)),
            connected: false,
            ever_connected: false,
            first_connect_tick: None,
        })
        .collect();
    WorldState { tick: 0, drones, tasks, base_radius: rng.gen_range(0.5..3.0) }
}

/// Minimum spanning tree length by enumerating every labeled tree through its
/// Pruefer sequence. Fine up to about eight points.
pub fn brute_force_mst(points: &[Vec2]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return points[0].distance(points[1]);
    }
    let mut seq = vec![0usize; n - 2];
    let mut best = f64::INFINITY;
    loop {
        best = best.min(pruefer_tree_length(&seq, points));
        // odometer increment over {0..n}^(n-2)
        let mut k = 0;
        loop {
            if k == seq.len() {
                return best;
            }
            seq[k] += 1;
            if seq[k] < n {
                break;
            }
            seq[k] = 0;
            k += 1;
        }
    }
}

fn pruefer_tree_length(seq: &[usize], points: &[Vec2]) -> f64 {
    let n = points.len();
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut total = 0.0;
    for &s in seq {
        let leaf = (0..n).find(|&i| degree[i] == 1).unwrap();
        total += points[leaf].distance(points[s]);
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| degree[i] == 1).collect();
    total + points[rest[0]].distance(points[rest[1]])
}

fn fermat_objective(p: Vec2, pts: &[Vec2; 3]) -> f64 {
    pts.iter().map(|q| p.distance(*q)).sum()
}

/// Minimizer of the summed distance to three points by repeated dense grid
/// search, each round zooming in around the best cell of the last.
pub fn grid_fermat(pts: &[Vec2; 3]) -> Vec2 {
    let lo = Vec2::new(pts.iter().map(|p| p.x).fold(f64::INFINITY, f64::min), pts.iter().map(|p| p.y).fold(f64::INFINITY, f64::min));
    let hi = Vec2::new(pts.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max), pts.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max));
    let mut center = (lo + hi) * 0.5;
    let mut half = (hi.x - lo.x).max(hi.y - lo.y) * 0.5 + 1e-9;
    const N: i32 = 60;
    for _ in 0..40 {
        let mut best = (f64::INFINITY, center);
        for i in -N..=N {
            for j in -N..=N {
                let p = center + Vec2::new(i as f64, j as f64) * (half / N as f64);
                let f = fermat_objective(p, pts);
                if f < best.0 {
                    best = (f, p);
                }
            }
        }
        center = best.1;
        half *= 4.0 / N as f64;
        if half < 1e-9 {
            break;
        }
    }
    center
}

/// Central finite-difference gradient of the total energy.
pub fn fd_gradient(bodies: &[Body], tree: &TaskTree, coeffs: &FieldCoefficients, h: f64) -> Vec<Vec2> {
    let mut work = bodies.to_vec();
    (0..bodies.len())
        .map(|i| {
            let mut g = Vec2::ZERO;
            for axis in 0..2 {
                let base = work[i].position;
                let shift = if axis == 0 { Vec2::new(h, 0.0) } else { Vec2::new(0.0, h) };
                work[i].position = base + shift;
                let up = total_energy(&work, tree, coeffs);
                work[i].position = base - shift;
                let down = total_energy(&work, tree, coeffs);
                work[i].position = base;
                let d = (up - down) / (2.0 * h);
                if axis == 0 {
                    g.x = d;
                } else {
                    g.y = d;
                }
            }
            g
        })
        .collect()
}

/// Distance from `x` to every tree segment, sorted ascending.
pub fn segment_distances(x: Vec2, tree: &TaskTree) -> Vec<f64> {
    let mut d: Vec<f64> = tree
        .edges
        .iter()
        .map(|&(a, b)| point_segment_distance(x, tree.nodes[a].position, tree.nodes[b].position))
        .collect();
    d.sort_by(f64::total_cmp);
    d
}

/// Point-to-segment distance by dense sampling along the segment, then a
/// local ternary refinement.
pub fn point_segment_distance(x: Vec2, a: Vec2, b: Vec2) -> f64 {
    let at = |t: f64| x.distance(a + (b - a) * t);
    let samples = 200;
    let mut best_t = 0.0;
    for k in 0..=samples {
        let t = k as f64 / samples as f64;
        if at(t) < at(best_t) {
            best_t = t;
        }
    }
    let (mut lo, mut hi) = ((best_t - 1.0 / samples as f64).max(0.0), (best_t + 1.0 / samples as f64).min(1.0));
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if at(m1) < at(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    at(0.5 * (lo + hi)).min(at(0.0)).min(at(1.0))
}

/// Random bodies with every pair distance at least `min_sep`, avoiding the
/// repulsion-range boundary by `margin`.
pub fn spaced_bodies(rng: &mut impl Rng, n: usize, half: f64, min_sep: f64, margin: f64) -> Vec<Body> {
    let mut out: Vec<Body> = Vec::with_capacity(n);
    let mut guard = 0;
    while out.len() < n && guard < 100_000 {
        guard += 1;
        let p = Vec2::new(rng.gen_range(-half..half), rng.gen_range(-half..half));
        let ok = out.iter().all(|b| {
            let d = b.position.distance(p);
            d > min_sep && (d - (b.repulsion_radius + 1.0)).abs() > margin
        });
        if ok {
            out.push(Body { position: p, repulsion_radius: 1.0 });
        }
    }
    out
}
