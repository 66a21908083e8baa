use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rtnua::connectivity::{compute_activation_with_graph, CommGraph};
use rtnua::field::FieldCoefficients;
use rtnua::messaging::{local_plan, KnowledgeNetwork, KnowledgeParams, TreePacket};
use rtnua::planner::{plan_motion, PlanDrone, PlannerParams};
use rtnua::steiner::build_semi_steiner;
use rtnua::world::{DroneState, WorldState};
use rtnua::Vec2;
use std::collections::VecDeque;
use std::sync::Arc;

fn drone(id: usize, position: Vec2) -> DroneState {
    DroneState {
        id,
        position,
        attrition_per_tick: 0.0,
        comm_radius: 2.0,
        repulsion_radius: 1.0,
        max_speed: 0.15,
        attrited: false,
        active: false,
        velocity: Vec2::ZERO,
    }
}

/// A connected random cloud of drones grown outward from the base.
fn connected_world(rng: &mut ChaCha8Rng, n: usize) -> WorldState {
    let mut drones = vec![drone(0, Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))];
    while drones.len() < n {
        let anchor = drones[rng.gen_range(0..drones.len())].position;
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let p = anchor + Vec2::new(angle.cos(), angle.sin()) * rng.gen_range(0.6..1.9);
        drones.push(drone(drones.len(), p));
    }
    WorldState { tick: 0, drones, tasks: Vec::new(), base_radius: 2.0 }
}

fn hop_diameter(graph: &CommGraph) -> usize {
    let n = graph.adjacency.len();
    let mut worst = 0;
    for s in 0..n {
        let mut dist = vec![usize::MAX; n];
        dist[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &v in &graph.adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
            }
        }
        worst = worst.max(dist.into_iter().max().unwrap());
    }
    worst
}

#[test]
fn knowledge_floods_within_diameter() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let n = rng.gen_range(2..25);
        let mut world = connected_world(&mut rng, n);
        let (_, graph) = compute_activation_with_graph(&mut world);
        let diameter = hop_diameter(&graph);
        let params = KnowledgeParams { max_report_age: u64::MAX, max_report_distance: f64::INFINITY, max_tree_age: u64::MAX };
        let mut net = KnowledgeNetwork::new(n, params);
        for t in 0..diameter as u64 {
            world.tick = t;
            net.exchange(&world, &graph, None);
        }
        for kb in &net.bases {
            assert_eq!(kb.reports.len(), n - 1, "diameter {diameter}");
        }
    }
}

#[test]
fn fresh_local_knowledge_reproduces_the_central_first_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let params = PlannerParams { max_inner_steps: 1, ..Default::default() };
    let coeffs = FieldCoefficients::default();
    for _ in 0..20 {
        let n = rng.gen_range(2..15);
        let mut world = connected_world(&mut rng, n);
        let (_, graph) = compute_activation_with_graph(&mut world);
        let tasks: Vec<Vec2> = (0..3).map(|_| Vec2::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0))).collect();
        let tree = Arc::new(build_semi_steiner(Vec2::ZERO, &tasks, 1.0, true));
        let kparams = KnowledgeParams { max_report_age: 1_000, max_report_distance: f64::INFINITY, max_tree_age: 1_000 };
        let mut net = KnowledgeNetwork::new(n, kparams);
        // static scene: nobody moves while knowledge spreads
        let rounds = hop_diameter(&graph) as u64 + 2;
        for t in 0..rounds {
            world.tick = t;
            net.exchange(&world, &graph, Some(TreePacket { tree: tree.clone(), stamp: t }));
        }
        let now = rounds;
        let central: Vec<PlanDrone> = world
            .drones
            .iter()
            .map(|d| PlanDrone { id: d.id, position: d.position, repulsion_radius: d.repulsion_radius, max_speed: d.max_speed })
            .collect();
        let joint = plan_motion(&central, &tree, &coeffs, &params).unwrap();
        for d in &world.drones {
            let local = local_plan(d, &net.bases[d.id], now, &kparams, &coeffs, &params).unwrap();
            assert!((local - joint[&d.id]).norm() < 1e-6);
        }
    }
}
