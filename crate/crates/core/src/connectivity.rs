//! Communication graph, drone activation, task connectivity, and the task
//! uptime metrics.

use crate::error::{Result, SimError};
use crate::world::WorldState;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Undirected communication graph over the surviving drones plus the base.
///
/// Vertices are indices into `WorldState::drones`; the base station has no
/// index of its own and is tracked through `base_links`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommGraph {
    pub adjacency: Vec<Vec<usize>>,
    pub base_links: Vec<usize>,
}

impl CommGraph {
    pub fn build(world: &WorldState) -> Self {
        let n = world.drones.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut base_links = Vec::new();
        for i in 0..n {
            let di = &world.drones[i];
            if di.attrited {
                continue;
            }
            if di.position.norm() <= world.base_radius.min(di.comm_radius) {
                base_links.push(i);
            }
            for j in (i + 1)..n {
                let dj = &world.drones[j];
                if dj.attrited {
                    continue;
                }
                let range = di.comm_radius.min(dj.comm_radius);
                if (di.position - dj.position).norm_sq() <= range * range {
                    adjacency[i].push(j);
                    adjacency[j].push(i);
                }
            }
        }
        CommGraph { adjacency, base_links }
    }

    /// Drone-drone links as index pairs with `i < j`.
    pub fn links(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, nbrs) in self.adjacency.iter().enumerate() {
            out.extend(nbrs.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    /// Breadth-first reachability from the base.
    pub fn reachable_from_base(&self) -> Vec<bool> {
        let mut seen = vec![false; self.adjacency.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &i in &self.base_links {
            if !seen[i] {
                seen[i] = true;
                queue.push_back(i);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}

/// Marks every drone active iff it survives and is reachable from the base.
/// Returns the sorted ids of the active drones.
pub fn compute_activation(world: &mut WorldState) -> Vec<usize> {
    compute_activation_with_graph(world).0
}

pub fn compute_activation_with_graph(world: &mut WorldState) -> (Vec<usize>, CommGraph) {
    let graph = CommGraph::build(world);
    let reach = graph.reachable_from_base();
    let mut active = Vec::new();
    for (d, &r) in world.drones.iter_mut().zip(&reach) {
        d.active = r && !d.attrited;
        if d.active {
            active.push(d.id);
        }
    }
    (active, graph)
}

/// A task is connected iff some active drone lies strictly within that
/// drone's communication radius of it.
pub fn compute_task_connectivity(world: &mut WorldState) -> Vec<bool> {
    let tick = world.tick;
    let drones = &world.drones;
    world
        .tasks
        .iter_mut()
        .map(|t| {
            let connected = drones
                .iter()
                .filter(|d| d.active)
                .any(|d| (t.position - d.position).norm_sq() < d.comm_radius * d.comm_radius);
            t.connected = connected;
            if connected && !t.ever_connected {
                t.ever_connected = true;
                t.first_connect_tick = Some(tick);
            }
            connected
        })
        .collect()
}

/// One pre-motion sample of the world.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TickRecord {
    pub alive: usize,
    pub active: usize,
    pub connected_tasks: usize,
    /// Connected tasks that were also connected at some earlier tick.
    pub retained_tasks: usize,
    /// Tasks connected at this tick or earlier.
    pub discovered_tasks: usize,
}

/// Final uptime scores as fractions in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uptime {
    pub tu1: f64,
    pub tu2: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsAccumulator {
    pub records: Vec<TickRecord>,
    pub tu1_sum: f64,
    pub tu2_sum: f64,
    pub tu2_ticks: u64,
}

impl MetricsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds the current tick's sample. Activation and task connectivity must
    /// already reflect this tick.
    pub fn accumulate(&mut self, world: &WorldState) {
        let m = world.tasks.len();
        let connected = world.connected_task_count();
        let discovered = world.tasks.iter().filter(|t| t.ever_connected).count();
        let retained = world
            .tasks
            .iter()
            .filter(|t| t.connected && t.first_connect_tick.is_some_and(|f| f < world.tick))
            .count();
        self.push(
            TickRecord {
                alive: world.alive_count(),
                active: world.active_count(),
                connected_tasks: connected,
                retained_tasks: retained,
                discovered_tasks: discovered,
            },
            m,
        );
    }

    pub fn push(&mut self, record: TickRecord, m_tasks: usize) {
        if m_tasks > 0 {
            self.tu1_sum += record.connected_tasks as f64 / m_tasks as f64;
        }
        if record.discovered_tasks > 0 {
            self.tu2_sum += record.connected_tasks as f64 / record.discovered_tasks as f64;
            self.tu2_ticks += 1;
        }
        self.records.push(record);
    }

    /// TU1 averages over the horizon; TU2 averages over ticks with at least
    /// one discovered task and falls back to TU1 when there are none.
    pub fn finalize(&self, horizon: u64) -> Result<Uptime> {
        if horizon == 0 {
            return Err(SimError::InvalidConfig("horizon must be positive".into()));
        }
        let tu1 = self.tu1_sum / horizon as f64;
        let tu2 = if self.tu2_ticks > 0 { self.tu2_sum / self.tu2_ticks as f64 } else { tu1 };
        Ok(Uptime { tu1, tu2 })
    }
}
