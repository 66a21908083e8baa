//! Asynchronous knowledge model.
//!
//! Every surviving drone broadcasts, once per tick, its own position plus
//! everything it currently retains (neighbor reports and its copy of the task
//! tree). Broadcasts travel one hop and are merged by the receivers at the
//! start of the next tick, keeping the freshest stamp per subject and
//! dropping reports that are too old or too far away. The base station knows
//! the tree exactly and injects a fresh copy into its direct neighbors.

use crate::connectivity::CommGraph;
use crate::error::Result;
use crate::field::{Body, FieldCoefficients};
use crate::geometry::Vec2;
use crate::planner::{plan_single, PlanDrone, PlannerParams};
use crate::steiner::TaskTree;
use crate::world::{return_to_base_step, DroneState, WorldState};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborReport {
    pub subject: usize,
    pub position: Vec2,
    /// Tick at which `position` was true.
    pub stamp: u64,
    pub repulsion_radius: f64,
    /// The subject's last realized displacement.
    pub velocity: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreePacket {
    pub tree: Arc<TaskTree>,
    pub stamp: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnowledgeParams {
    pub max_report_age: u64,
    pub max_report_distance: f64,
    pub max_tree_age: u64,
}

impl Default for KnowledgeParams {
    fn default() -> Self {
        KnowledgeParams { max_report_age: 2, max_report_distance: 6.0, max_tree_age: 5 }
    }
}

/// Reports keyed by subject id, stored densely since ids are small.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportTable {
    slots: Vec<Option<NeighborReport>>,
    len: usize,
}

impl ReportTable {
    pub fn get(&self, subject: &usize) -> Option<&NeighborReport> {
        self.slots.get(*subject).and_then(Option::as_ref)
    }

    pub fn contains_key(&self, subject: &usize) -> bool {
        self.get(subject).is_some()
    }

    pub fn insert(&mut self, subject: usize, report: NeighborReport) {
        if subject >= self.slots.len() {
            self.slots.resize(subject + 1, None);
        }
        if self.slots[subject].replace(report).is_none() {
            self.len += 1;
        }
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&usize, &NeighborReport) -> bool) {
        for (id, slot) in self.slots.iter_mut().enumerate() {
            if let Some(r) = slot {
                if !keep(&id, r) {
                    *slot = None;
                    self.len -= 1;
                }
            }
        }
    }

    /// Reports in ascending subject order.
    pub fn values(&self) -> impl Iterator<Item = &NeighborReport> {
        self.slots.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

impl std::ops::Index<&usize> for ReportTable {
    type Output = NeighborReport;

    fn index(&self, subject: &usize) -> &NeighborReport {
        self.get(subject).expect("no report for subject")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    pub owner: usize,
    pub reports: ReportTable,
    pub tree: Option<TreePacket>,
}

impl KnowledgeBase {
    pub fn new(owner: usize) -> Self {
        KnowledgeBase { owner, reports: ReportTable::default(), tree: None }
    }

    /// Keeps the fresher of the stored and offered report.
    pub fn merge_report(&mut self, report: NeighborReport) {
        if report.subject == self.owner {
            return;
        }
        match self.reports.get(&report.subject) {
            Some(old) if old.stamp >= report.stamp => {}
            _ => {
                self.reports.insert(report.subject, report);
            }
        }
    }

    pub fn merge_tree(&mut self, packet: &TreePacket) {
        match &self.tree {
            Some(old) if old.stamp >= packet.stamp => {}
            _ => self.tree = Some(packet.clone()),
        }
    }

    /// Drops reports older than the age limit or farther than the distance
    /// limit from `owner_position`.
    pub fn prune(&mut self, now: u64, owner_position: Vec2, params: &KnowledgeParams) {
        let max_d2 = params.max_report_distance * params.max_report_distance;
        self.reports.retain(|_, r| {
            now.saturating_sub(r.stamp) <= params.max_report_age && (r.position - owner_position).norm_sq() <= max_d2
        });
    }

    /// The tree, if one is held and it is no older than the limit.
    pub fn fresh_tree(&self, now: u64, params: &KnowledgeParams) -> Option<&TaskTree> {
        self.tree
            .as_ref()
            .filter(|p| now.saturating_sub(p.stamp) <= params.max_tree_age)
            .map(|p| p.tree.as_ref())
    }

    pub fn tree_age(&self, now: u64) -> Option<u64> {
        self.tree.as_ref().map(|p| now.saturating_sub(p.stamp))
    }
}

#[derive(Debug, Clone)]
struct Broadcast {
    own: NeighborReport,
    reports: Vec<NeighborReport>,
    tree: Option<TreePacket>,
}

/// Knowledge bases of every drone plus the broadcasts in flight.
#[derive(Debug, Clone)]
pub struct KnowledgeNetwork {
    pub bases: Vec<KnowledgeBase>,
    pub params: KnowledgeParams,
    in_flight: Vec<Broadcast>,
    /// receiver -> indices into `in_flight`
    deliveries: Vec<Vec<usize>>,
    base_delivery: Option<(TreePacket, Vec<usize>)>,
}

fn self_report(d: &DroneState, stamp: u64) -> NeighborReport {
    NeighborReport {
        subject: d.id,
        position: d.position,
        stamp,
        repulsion_radius: d.repulsion_radius,
        velocity: d.velocity,
    }
}

impl KnowledgeNetwork {
    pub fn new(n_drones: usize, params: KnowledgeParams) -> Self {
        KnowledgeNetwork {
            bases: (0..n_drones).map(KnowledgeBase::new).collect(),
            params,
            in_flight: Vec::new(),
            deliveries: vec![Vec::new(); n_drones],
            base_delivery: None,
        }
    }

    /// Sends every surviving drone's current broadcast to its graph
    /// neighbors; the base sends `base_packet` to its direct neighbors.
    pub fn broadcast(&mut self, world: &WorldState, graph: &CommGraph, base_packet: Option<TreePacket>) {
        let tick = world.tick;
        let mut senders = vec![usize::MAX; world.drones.len()];
        self.in_flight.clear();
        for d in world.drones.iter().filter(|d| !d.attrited) {
            let kb = &self.bases[d.id];
            senders[d.id] = self.in_flight.len();
            self.in_flight.push(Broadcast {
                own: self_report(d, tick),
                reports: kb.reports.values().copied().collect(),
                tree: kb.tree.clone(),
            });
        }
        for r in &mut self.deliveries {
            r.clear();
        }
        for (i, nbrs) in graph.adjacency.iter().enumerate() {
            if world.drones[i].attrited {
                continue;
            }
            self.deliveries[i].extend(nbrs.iter().map(|&j| senders[j]));
        }
        self.base_delivery = base_packet.map(|p| (p, graph.base_links.clone()));
    }

    /// Merges everything broadcast last tick into the receivers, then prunes
    /// against the receivers' current positions and the current tick.
    pub fn receive(&mut self, world: &WorldState) {
        let now = world.tick;
        for d in world.drones.iter().filter(|d| !d.attrited) {
            let kb = &mut self.bases[d.id];
            for &s in &self.deliveries[d.id] {
                let b = &self.in_flight[s];
                kb.merge_report(b.own);
                for r in &b.reports {
                    kb.merge_report(*r);
                }
                if let Some(t) = &b.tree {
                    kb.merge_tree(t);
                }
            }
            kb.prune(now, d.position, &self.params);
        }
        if let Some((packet, links)) = self.base_delivery.take() {
            for i in links {
                if !world.drones[i].attrited {
                    self.bases[i].merge_tree(&packet);
                }
            }
        }
        self.in_flight.clear();
        for r in &mut self.deliveries {
            r.clear();
        }
    }

    /// One full exchange round: broadcasts made at `world.tick` are merged as
    /// of the following tick.
    pub fn exchange(&mut self, world: &WorldState, graph: &CommGraph, base_packet: Option<TreePacket>) {
        self.broadcast(world, graph, base_packet);
        let mut next = world.clone();
        next.tick += 1;
        self.receive(&next);
    }
}

/// What one drone does with its local knowledge: descend its own coordinate
/// against the known neighbors on its tree copy, or head for the base when the
/// tree copy is missing or stale.
pub fn local_plan(
    drone: &DroneState,
    kb: &KnowledgeBase,
    now: u64,
    kparams: &KnowledgeParams,
    coeffs: &FieldCoefficients,
    params: &PlannerParams,
) -> Result<Vec2> {
    let Some(tree) = kb.fresh_tree(now, kparams) else {
        return Ok(return_to_base_step(drone.position, drone.max_speed));
    };
    let others: Vec<Body> = kb
        .reports
        .values()
        .map(|r| Body { position: r.position, repulsion_radius: r.repulsion_radius })
        .collect();
    let me = PlanDrone {
        id: drone.id,
        position: drone.position,
        repulsion_radius: drone.repulsion_radius,
        max_speed: drone.max_speed,
    };
    plan_single(&me, &others, tree, coeffs, params)
}
