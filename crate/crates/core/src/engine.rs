//! Episode loop and seeded batches.
//!
//! Per tick, in order:
//! 1. activation and task connectivity,
//! 2. metric sampling (pre-motion),
//! 3. task-tree maintenance at the base (and knowledge exchange in async mode),
//! 4. controller planning for the active drones,
//! 5. motion, including return-to-base for disconnected drones,
//! 6. task random walk,
//! 7. attrition,
//! 8. clock advance.

use crate::config::{Mode, ScenarioConfig};
use crate::connectivity::{compute_activation_with_graph, compute_task_connectivity, CommGraph, MetricsAccumulator, TickRecord};
use crate::dccrs::{flock_instruction, plan_motion_dccrs, DccrsParams, FlockAgent};
use crate::error::{Result, SimError};
use crate::field::FieldCoefficients;
use crate::geometry::Vec2;
use crate::messaging::{local_plan, KnowledgeNetwork, KnowledgeParams, TreePacket};
use crate::planner::{plan_motion, PlanDrone, PlannerParams};
use crate::rng::RngStreams;
use crate::steiner::{build_semi_steiner, maybe_accept_topology, relocate_steiner_nodes, NodeKind, TaskTree};
use crate::world::{apply_motion, generate_scenario, return_to_base_step, step_attrition, step_tasks, Instructions, WorldState};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    Phireman,
    Dccrs,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 2] = [ControllerKind::Phireman, ControllerKind::Dccrs];

    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Phireman => "phireman",
            ControllerKind::Dccrs => "dccrs",
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for ControllerKind {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "phireman" => Ok(ControllerKind::Phireman),
            "dccrs" => Ok(ControllerKind::Dccrs),
            other => Err(SimError::Parse(format!("unknown controller `{other}`"))),
        }
    }
}

/// Parameters bundled from a [`ScenarioConfig`] for the controllers.
#[derive(Debug, Clone, Copy)]
pub struct AlgorithmParams {
    pub coeffs: FieldCoefficients,
    pub planner: PlannerParams,
    pub knowledge: KnowledgeParams,
    pub dccrs: DccrsParams,
}

impl From<&ScenarioConfig> for AlgorithmParams {
    fn from(c: &ScenarioConfig) -> Self {
        AlgorithmParams {
            coeffs: FieldCoefficients {
                theta: c.theta,
                attraction: c.attraction,
                repulsion: c.repulsion,
                floor: c.singularity_floor,
                tree_floor: c.tree_floor,
                nodes_only: c.nodes_only,
            },
            planner: PlannerParams {
                step_size: c.step_size,
                max_inner_steps: c.max_inner_steps,
                equilibrium_tol: c.equilibrium_tol,
            },
            knowledge: KnowledgeParams {
                max_report_age: c.max_report_age,
                max_report_distance: c.report_distance(),
                max_tree_age: c.max_tree_age,
            },
            dccrs: DccrsParams::from(c),
        }
    }
}

/// Picture of the world at the start of a tick, for rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub tick: u64,
    pub world: WorldState,
    /// Drone-drone links as pairs of drone ids.
    pub links: Vec<(usize, usize)>,
    pub base_links: Vec<usize>,
    pub tree: TaskTree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub config_id: String,
    pub controller: ControllerKind,
    pub mode: Mode,
    pub seed: u64,
    pub series: Vec<TickRecord>,
    pub tu1: f64,
    pub tu2: f64,
    /// Tick at which each drone attrited, if it did.
    pub attrition_ticks: Vec<Option<u64>>,
    /// Digest of every task position at every tick.
    pub task_track_digest: u64,
    /// Largest realized per-tick displacement minus the drone's speed limit.
    pub max_speed_excess: f64,
    #[serde(skip)]
    pub snapshots: Vec<Snapshot>,
}

#[derive(Debug, Clone, Default)]
pub struct EpisodeOptions {
    /// Ticks at which to keep a [`Snapshot`]; the horizon itself is allowed.
    pub snapshot_ticks: Vec<u64>,
}

fn snapshot(world: &WorldState, graph: &CommGraph, tree: &TaskTree) -> Snapshot {
    Snapshot {
        tick: world.tick,
        world: world.clone(),
        links: graph.links().into_iter().map(|(i, j)| (world.drones[i].id, world.drones[j].id)).collect(),
        base_links: graph.base_links.iter().map(|&i| world.drones[i].id).collect(),
        tree: tree.clone(),
    }
}

fn flock_agent(d: &crate::world::DroneState) -> FlockAgent {
    FlockAgent {
        id: d.id,
        position: d.position,
        velocity: d.velocity,
        repulsion_radius: d.repulsion_radius,
        comm_radius: d.comm_radius,
        max_speed: d.max_speed,
    }
}

fn plan_sync(
    world: &WorldState,
    tree: &TaskTree,
    controller: ControllerKind,
    params: &AlgorithmParams,
) -> Result<Instructions> {
    match controller {
        ControllerKind::Phireman => {
            let drones: Vec<PlanDrone> = world
                .drones
                .iter()
                .filter(|d| d.active)
                .map(|d| PlanDrone { id: d.id, position: d.position, repulsion_radius: d.repulsion_radius, max_speed: d.max_speed })
                .collect();
            plan_motion(&drones, tree, &params.coeffs, &params.planner)
        }
        ControllerKind::Dccrs => {
            let agents: Vec<FlockAgent> = world.drones.iter().filter(|d| d.active).map(flock_agent).collect();
            Ok(plan_motion_dccrs(&agents, &world.task_positions(), &params.dccrs))
        }
    }
}

fn plan_async(
    world: &WorldState,
    net: &KnowledgeNetwork,
    controller: ControllerKind,
    params: &AlgorithmParams,
) -> Result<Instructions> {
    let now = world.tick;
    let mut out = Instructions::new();
    for d in world.drones.iter().filter(|d| d.active) {
        let kb = &net.bases[d.id];
        let step = match controller {
            ControllerKind::Phireman => local_plan(d, kb, now, &params.knowledge, &params.coeffs, &params.planner)?,
            ControllerKind::Dccrs => match kb.fresh_tree(now, &params.knowledge) {
                None => return_to_base_step(d.position, d.max_speed),
                Some(tree) => {
                    let tasks: Vec<Vec2> = tree
                        .nodes
                        .iter()
                        .filter(|n| matches!(n.kind, NodeKind::Task(_)))
                        .map(|n| n.position)
                        .collect();
                    let others: Vec<FlockAgent> = kb
                        .reports
                        .values()
                        .map(|r| FlockAgent {
                            id: r.subject,
                            position: r.position,
                            velocity: r.velocity,
                            repulsion_radius: r.repulsion_radius,
                            comm_radius: d.comm_radius,
                            max_speed: d.max_speed,
                        })
                        .collect();
                    flock_instruction(&flock_agent(d), &others, &tasks, &params.dccrs)
                }
            },
        };
        out.insert(d.id, step);
    }
    Ok(out)
}

fn hash_positions(hasher: &mut DefaultHasher, world: &WorldState) {
    for t in &world.tasks {
        t.position.x.to_bits().hash(hasher);
        t.position.y.to_bits().hash(hasher);
    }
}

/// Runs one seeded episode.
pub fn run_episode(config: &ScenarioConfig, controller: ControllerKind) -> Result<EpisodeResult> {
    run_episode_with(config, controller, "custom", &EpisodeOptions::default())
}

pub fn run_episode_with(
    config: &ScenarioConfig,
    controller: ControllerKind,
    config_id: &str,
    options: &EpisodeOptions,
) -> Result<EpisodeResult> {
    let wrap = |e: SimError| SimError::Episode { seed: config.seed, controller: controller.to_string(), source: Box::new(e) };
    let streams = RngStreams::new(config.seed);
    let mut world = generate_scenario(config, &streams).map_err(wrap)?;
    let params = AlgorithmParams::from(config);
    let mut dynamics = streams.scenario_dynamics();
    let refine = config.steiner_refinement;

    let mut tree = build_semi_steiner(WorldState::BASE, &world.task_positions(), config.c_b, refine);
    let mut network = (config.mode == Mode::Async).then(|| KnowledgeNetwork::new(world.drones.len(), params.knowledge));
    let mut acc = MetricsAccumulator::new();
    let mut attrition_ticks = vec![None; world.drones.len()];
    let mut digest = DefaultHasher::new();
    let mut max_speed_excess = f64::NEG_INFINITY;
    let mut snapshots = Vec::new();

    for t in 0..config.horizon {
        world.tick = t;
        hash_positions(&mut digest, &world);
        let (_, graph) = compute_activation_with_graph(&mut world);
        compute_task_connectivity(&mut world);
        acc.accumulate(&world);

        if t > 0 {
            tree = relocate_steiner_nodes(&tree, &world.task_positions());
            if t % config.topology_period == 0 {
                let candidate = build_semi_steiner(WorldState::BASE, &world.task_positions(), config.c_b, refine);
                tree = maybe_accept_topology(&tree, candidate, config.nu).0;
            }
        }
        tree.built_at_tick = t;
        if options.snapshot_ticks.contains(&t) {
            snapshots.push(snapshot(&world, &graph, &tree));
        }

        let instructions = match network.as_mut() {
            None => plan_sync(&world, &tree, controller, &params),
            Some(net) => {
                net.receive(&world);
                let plan = plan_async(&world, net, controller, &params);
                net.broadcast(&world, &graph, Some(TreePacket { tree: Arc::new(tree.clone()), stamp: t }));
                plan
            }
        }
        .map_err(wrap)?;

        let before: Vec<Vec2> = world.drones.iter().map(|d| d.position).collect();
        apply_motion(&mut world, &instructions).map_err(wrap)?;
        for (d, p) in world.drones.iter().zip(&before) {
            max_speed_excess = max_speed_excess.max(d.position.distance(*p) - d.max_speed);
        }

        step_tasks(&mut world, config.task_walk_sigma, &mut dynamics);
        step_attrition(&mut world, &streams);
        for d in &world.drones {
            if d.attrited && attrition_ticks[d.id].is_none() {
                attrition_ticks[d.id] = Some(t);
            }
        }
    }

    world.tick = config.horizon;
    if options.snapshot_ticks.contains(&world.tick) {
        let (_, graph) = compute_activation_with_graph(&mut world);
        compute_task_connectivity(&mut world);
        let tree = relocate_steiner_nodes(&tree, &world.task_positions());
        snapshots.push(snapshot(&world, &graph, &tree));
    }

    let uptime = acc.finalize(config.horizon).map_err(wrap)?;
    Ok(EpisodeResult {
        config_id: config_id.to_string(),
        controller,
        mode: config.mode,
        seed: config.seed,
        series: acc.records,
        tu1: uptime.tu1,
        tu2: uptime.tu2,
        attrition_ticks,
        task_track_digest: digest.finish(),
        max_speed_excess: if max_speed_excess.is_finite() { max_speed_excess } else { 0.0 },
        snapshots,
    })
}

/// One configuration of a batch.
#[derive(Debug, Clone)]
pub struct BatchConfig {
    pub id: String,
    pub config: ScenarioConfig,
}

/// Mean and standard error of the two metrics for one (config, controller).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub config_id: String,
    pub controller: ControllerKind,
    pub mode: Mode,
    pub n: usize,
    pub tu1_mean: f64,
    pub tu1_stderr: f64,
    pub tu2_mean: f64,
    pub tu2_stderr: f64,
}

/// Mean and standard error (sample standard deviation over sqrt(n)).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Runs every (config, seed, controller) episode; each seed overrides the
/// config's own. Results come back ordered by config, then seed, then
/// controller, whatever the execution order.
pub fn run_batch(configs: &[BatchConfig], seeds: &[u64], controllers: &[ControllerKind]) -> Result<Vec<EpisodeResult>> {
    let jobs: Vec<(usize, u64, ControllerKind)> = configs
        .iter()
        .enumerate()
        .flat_map(|(ci, _)| seeds.iter().flat_map(move |&s| controllers.iter().map(move |&c| (ci, s, c))))
        .collect();
    let mut results: Vec<((usize, u64, ControllerKind), EpisodeResult)> = jobs
        .par_iter()
        .map(|&(ci, seed, c)| {
            let bc = &configs[ci];
            let cfg = ScenarioConfig { seed, ..bc.config.clone() };
            run_episode_with(&cfg, c, &bc.id, &EpisodeOptions::default()).map(|r| ((ci, seed, c), r))
        })
        .collect::<Result<_>>()?;
    results.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(results.into_iter().map(|(_, r)| r).collect())
}

/// Groups episodes by (config, controller), keeping first-seen order.
pub fn aggregate(results: &[EpisodeResult]) -> Vec<Aggregate> {
    let mut keys: Vec<(String, ControllerKind, Mode)> = Vec::new();
    for r in results {
        let k = (r.config_id.clone(), r.controller, r.mode);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(id, c, mode)| {
            let mut group: Vec<&EpisodeResult> =
                results.iter().filter(|r| r.config_id == id && r.controller == c && r.mode == mode).collect();
            group.sort_by_key(|r| r.seed);
            let tu1: Vec<f64> = group.iter().map(|r| r.tu1).collect();
            let tu2: Vec<f64> = group.iter().map(|r| r.tu2).collect();
            let (tu1_mean, tu1_stderr) = mean_stderr(&tu1);
            let (tu2_mean, tu2_stderr) = mean_stderr(&tu2);
            Aggregate { config_id: id, controller: c, mode, n: group.len(), tu1_mean, tu1_stderr, tu2_mean, tu2_stderr }
        })
        .collect()
}
