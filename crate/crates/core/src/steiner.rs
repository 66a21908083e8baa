//! Semi-Steiner task tree.
//!
//! The tree joins the base station to every task and may contain auxiliary
//! degree-3 Steiner nodes. Its cost trades total edge length against the
//! summed task-to-base path lengths:
//!
//! ```text
//! l_e   = sum of edge lengths
//! l_b   = sum over tasks of the tree-path length to the base
//! l_sum = l_e + c_b * l_b
//! ```
//!
//! Rooting the tree at the base, `l_sum` is also `sum_e (1 + c_b * below(e)) * len(e)`
//! where `below(e)` counts the tasks whose base path crosses `e`. Every local
//! move below (greedy attachment, Steiner insertion, Steiner relocation) is
//! evaluated with that edge-weighted form.

use crate::error::{Result, SimError};
use crate::geometry::{angle_at, Vec2};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

const WEISZFELD_TOL: f64 = 1e-9;
const WEISZFELD_MAX_ITERS: usize = 1000;
const RELOCATE_TOL: f64 = 1e-6;
const RELOCATE_MAX_SWEEPS: usize = 50;
const MIN_IMPROVEMENT: f64 = 1e-9;
const COINCIDENT_NUDGE: f64 = 1e-9;
const STEINER_ANGLE: f64 = 2.0 * std::f64::consts::FRAC_PI_3;

/// Point minimizing the summed distance to `a`, `b`, `c`.
///
/// When an interior angle is at least 120 degrees the minimizer is that
/// vertex; collinear and coincident inputs fall under the same rule.
pub fn fermat_point(a: Vec2, b: Vec2, c: Vec2) -> Vec2 {
    let pts = [a, b, c];
    for k in 0..3 {
        let (p, q) = (pts[(k + 1) % 3], pts[(k + 2) % 3]);
        if angle_at(pts[k], p, q) >= STEINER_ANGLE {
            return pts[k];
        }
    }
    // all angles below 120 degrees: barycentric weights |opposite side| / sin(angle + 60)
    let mut num = Vec2::ZERO;
    let mut den = 0.0;
    for k in 0..3 {
        let (p, q) = (pts[(k + 1) % 3], pts[(k + 2) % 3]);
        let w = p.distance(q) / (angle_at(pts[k], p, q) + std::f64::consts::FRAC_PI_3).sin();
        num += pts[k] * w;
        den += w;
    }
    num / den
}

/// Point minimizing `sum_k weights[k] * |x - points[k]|` (the Fermat-Weber point).
pub fn weighted_fermat_point(points: &[Vec2; 3], weights: &[f64; 3]) -> Vec2 {
    // A vertex is optimal iff the weighted pull of the other two does not
    // exceed its own weight.
    for k in 0..3 {
        let mut pull = Vec2::ZERO;
        let mut degenerate = false;
        for j in 0..3 {
            if j == k {
                continue;
            }
            let d = points[j] - points[k];
            let n = d.norm();
            if n == 0.0 {
                degenerate = true;
                break;
            }
            pull += d * (weights[j] / n);
        }
        if degenerate || pull.norm() <= weights[k] {
            return points[k];
        }
    }
    weiszfeld(points, weights)
}

fn weiszfeld(points: &[Vec2; 3], weights: &[f64; 3]) -> Vec2 {
    let wsum: f64 = weights.iter().sum();
    let mut x = (points[0] * weights[0] + points[1] * weights[1] + points[2] * weights[2]) / wsum;
    for _ in 0..WEISZFELD_MAX_ITERS {
        let mut num = Vec2::ZERO;
        let mut den = 0.0;
        for (p, w) in points.iter().zip(weights) {
            let d = x.distance(*p);
            if d < 1e-15 {
                continue;
            }
            num += *p * (w / d);
            den += w / d;
        }
        if den == 0.0 {
            break;
        }
        let next = num / den;
        let moved = next.distance(x);
        x = next;
        if moved < WEISZFELD_TOL {
            break;
        }
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "task", rename_all = "lowercase")]
pub enum NodeKind {
    Base,
    Task(usize),
    Steiner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: usize,
    pub kind: NodeKind,
    pub position: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TreeCosts {
    pub edge_length: f64,
    pub base_path: f64,
    pub total: f64,
}

/// Geometric tree over base, task, and Steiner nodes. Node 0 is the base;
/// node ids are indices into `nodes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskTree {
    pub nodes: Vec<TreeNode>,
    pub edges: Vec<(usize, usize)>,
    pub costs: TreeCosts,
    pub c_b: f64,
    pub version: u64,
    pub built_at_tick: u64,
}

/// Tree rooted at the base: parents, base-path lengths, and task counts.
#[derive(Debug, Clone)]
struct Rooted {
    adjacency: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    /// Tasks in the subtree below each node, the node itself included.
    below: Vec<usize>,
    base_dist: Vec<f64>,
}

impl Rooted {
    fn new(nodes: &[TreeNode], edges: &[(usize, usize)]) -> Result<Self> {
        let n = nodes.len();
        if n == 0 {
            return Err(SimError::Structure("tree has no base node".into()));
        }
        if edges.len() + 1 != n {
            return Err(SimError::Structure(format!("{} nodes but {} edges", n, edges.len())));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(SimError::Structure(format!("bad edge ({a}, {b})")));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let mut parent = vec![None; n];
        let mut base_dist = vec![0.0; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in &adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    base_dist[v] = base_dist[u] + nodes[u].position.distance(nodes[v].position);
                    queue.push_back(v);
                }
            }
        }
        if order.len() != n {
            return Err(SimError::Structure("edge set is disconnected".into()));
        }
        let mut below: Vec<usize> = nodes.iter().map(|nd| matches!(nd.kind, NodeKind::Task(_)) as usize).collect();
        for &u in order.iter().rev() {
            if let Some(p) = parent[u] {
                below[p] += below[u];
            }
        }
        Ok(Rooted { adjacency, parent, below, base_dist })
    }

    fn costs(&self, nodes: &[TreeNode], edges: &[(usize, usize)], c_b: f64) -> TreeCosts {
        let edge_length: f64 = edges
            .iter()
            .map(|&(a, b)| nodes[a].position.distance(nodes[b].position))
            .sum();
        let base_path: f64 = nodes
            .iter()
            .filter(|nd| matches!(nd.kind, NodeKind::Task(_)))
            .map(|nd| self.base_dist[nd.id])
            .sum();
        TreeCosts { edge_length, base_path, total: edge_length + c_b * base_path }
    }

    /// Weight of the edge between `u` and its neighbor `v`.
    fn edge_weight(&self, u: usize, v: usize, c_b: f64) -> f64 {
        let child = if self.parent[v] == Some(u) { v } else { u };
        1.0 + c_b * self.below[child] as f64
    }
}

/// Edge length, base-path, and combined costs of `tree` at weight `c_b`.
pub fn tree_cost(tree: &TaskTree, c_b: f64) -> Result<TreeCosts> {
    let rooted = Rooted::new(&tree.nodes, &tree.edges)?;
    Ok(rooted.costs(&tree.nodes, &tree.edges, c_b))
}

impl TaskTree {
    /// Tree consisting of the base node alone.
    pub fn base_only(base: Vec2, c_b: f64) -> Self {
        TaskTree {
            nodes: vec![TreeNode { id: 0, kind: NodeKind::Base, position: base }],
            edges: Vec::new(),
            costs: TreeCosts::default(),
            c_b,
            version: 0,
            built_at_tick: 0,
        }
    }

    /// Assembles a tree from explicit nodes and edges, checking the structure.
    pub fn from_parts(nodes: Vec<TreeNode>, edges: Vec<(usize, usize)>, c_b: f64) -> Result<Self> {
        for (i, n) in nodes.iter().enumerate() {
            if n.id != i {
                return Err(SimError::Structure(format!("node {i} carries id {}", n.id)));
            }
        }
        if !matches!(nodes.first().map(|n| n.kind), Some(NodeKind::Base)) {
            return Err(SimError::Structure("node 0 must be the base".into()));
        }
        let rooted = Rooted::new(&nodes, &edges)?;
        let costs = rooted.costs(&nodes, &edges, c_b);
        Ok(TaskTree { nodes, edges, costs, c_b, version: 0, built_at_tick: 0 })
    }

    pub fn segment(&self, edge: usize) -> (Vec2, Vec2) {
        let (a, b) = self.edges[edge];
        (self.nodes[a].position, self.nodes[b].position)
    }

    pub fn steiner_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Steiner).count()
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == node || b == node).count()
    }

    fn refresh_costs(&mut self) {
        let rooted = Rooted::new(&self.nodes, &self.edges).expect("tree invariant");
        self.costs = rooted.costs(&self.nodes, &self.edges, self.c_b);
    }
}

/// Greedy semi-Steiner tree over `base` and `tasks`.
///
/// Phase one attaches tasks one by one, always choosing the unattached task
/// and existing node with the smallest marginal `l_sum`. With `c_b = 0` this
/// is Prim's algorithm. Phase two (when `refine` is set) repeatedly splits a
/// node's pair of edges meeting at under 120 degrees through a new Steiner
/// node placed at their cost-weighted Fermat point, keeping only strict
/// improvements, until no split helps.
pub fn build_semi_steiner(base: Vec2, tasks: &[Vec2], c_b: f64, refine: bool) -> TaskTree {
    let mut nodes = vec![TreeNode { id: 0, kind: NodeKind::Base, position: base }];
    let mut positions: Vec<Vec2> = vec![base];
    for (tid, &p) in tasks.iter().enumerate() {
        let mut p = p;
        while positions.iter().any(|&q| q == p) {
            p.x += COINCIDENT_NUDGE;
        }
        positions.push(p);
        nodes.push(TreeNode { id: tid + 1, kind: NodeKind::Task(tid), position: p });
    }

    let n = nodes.len();
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut base_dist = vec![0.0; n];
    let mut attached = vec![false; n];
    attached[0] = true;
    // best (marginal cost, attachment node) per unattached task
    let mut best: Vec<(f64, usize)> = (0..n)
        .map(|i| (positions[i].distance(base) * (1.0 + c_b), 0))
        .collect();
    for _ in 1..n {
        let mut pick: Option<usize> = None;
        for i in 1..n {
            if attached[i] {
                continue;
            }
            match pick {
                Some(p) if best[p].0 <= best[i].0 => {}
                _ => pick = Some(i),
            }
        }
        let t = pick.expect("an unattached task remains");
        let at = best[t].1;
        attached[t] = true;
        base_dist[t] = base_dist[at] + positions[at].distance(positions[t]);
        edges.push((at, t));
        for i in 1..n {
            if attached[i] {
                continue;
            }
            let d = positions[i].distance(positions[t]);
            let cost = d * (1.0 + c_b) + c_b * base_dist[t];
            if cost < best[i].0 {
                best[i] = (cost, t);
            }
        }
    }

    let mut tree = TaskTree { nodes, edges, costs: TreeCosts::default(), c_b, version: 0, built_at_tick: 0 };
    if refine {
        refine_with_steiner_nodes(&mut tree);
    }
    tree.refresh_costs();
    tree
}

fn refine_with_steiner_nodes(tree: &mut TaskTree) {
    let c_b = tree.c_b;
    let mut rooted = Rooted::new(&tree.nodes, &tree.edges).expect("greedy output is a tree");
    loop {
        let mut changed = false;
        let mut u = 0;
        while u < tree.nodes.len() {
            if let Some((v, w, f)) = best_split(tree, &rooted, u, c_b) {
                apply_split(tree, u, v, w, f);
                rooted = Rooted::new(&tree.nodes, &tree.edges).expect("split keeps a tree");
                changed = true;
            }
            u += 1;
        }
        if !changed {
            break;
        }
    }
}

/// Cheapest improving split at `u`: the two neighbors and the new node's position.
fn best_split(tree: &TaskTree, rooted: &Rooted, u: usize, c_b: f64) -> Option<(usize, usize, Vec2)> {
    let nbrs = &rooted.adjacency[u];
    // splitting at a Steiner node would leave it with degree two
    if nbrs.len() < 2 || tree.nodes[u].kind == NodeKind::Steiner {
        return None;
    }
    let pu = tree.nodes[u].position;
    let mut best: Option<(f64, usize, usize, Vec2)> = None;
    for a in 0..nbrs.len() {
        for b in (a + 1)..nbrs.len() {
            let (v, w) = (nbrs[a], nbrs[b]);
            let (pv, pw) = (tree.nodes[v].position, tree.nodes[w].position);
            if angle_at(pu, pv, pw) >= STEINER_ANGLE {
                continue;
            }
            let wv = rooted.edge_weight(u, v, c_b);
            let ww = rooted.edge_weight(u, w, c_b);
            // edge from the new node back to u carries whatever passes through
            // either of the replaced edges on u's side
            let wu = split_weight_to_u(rooted, u, v, w, c_b);
            let f = weighted_fermat_point(&[pu, pv, pw], &[wu, wv, ww]);
            if f == pu || f == pv || f == pw {
                continue;
            }
            let old = wv * pu.distance(pv) + ww * pu.distance(pw);
            let new = wu * f.distance(pu) + wv * f.distance(pv) + ww * f.distance(pw);
            let delta = new - old;
            if delta < -MIN_IMPROVEMENT && best.as_ref().map_or(true, |b| delta < b.0) {
                best = Some((delta, v, w, f));
            }
        }
    }
    best.map(|(_, v, w, f)| (v, w, f))
}

fn split_weight_to_u(rooted: &Rooted, u: usize, v: usize, w: usize, c_b: f64) -> f64 {
    let v_child = rooted.parent[v] == Some(u);
    let w_child = rooted.parent[w] == Some(u);
    let tasks = match (v_child, w_child) {
        // both hang below u: the new node carries both subtrees
        (true, true) => rooted.below[v] + rooted.below[w],
        // one of them is u's parent: the new node sits above u, so its edge to
        // u carries u's subtree minus the other child's
        (false, true) => rooted.below[u] - rooted.below[w],
        (true, false) => rooted.below[u] - rooted.below[v],
        (false, false) => unreachable!("a node has at most one parent"),
    };
    1.0 + c_b * tasks as f64
}

fn apply_split(tree: &mut TaskTree, u: usize, v: usize, w: usize, f: Vec2) {
    let id = tree.nodes.len();
    tree.nodes.push(TreeNode { id, kind: NodeKind::Steiner, position: f });
    tree.edges.retain(|&(a, b)| {
        let e = (a.min(b), a.max(b));
        e != (u.min(v), u.max(v)) && e != (u.min(w), u.max(w))
    });
    tree.edges.push((id, u));
    tree.edges.push((id, v));
    tree.edges.push((id, w));
}

/// Refreshes task positions and moves every Steiner node to the cost-weighted
/// Fermat point of its three neighbors, sweeping until things settle.
pub fn relocate_steiner_nodes(tree: &TaskTree, task_positions: &[Vec2]) -> TaskTree {
    let mut out = tree.clone();
    for node in &mut out.nodes {
        if let NodeKind::Task(t) = node.kind {
            node.position = task_positions[t];
        }
    }
    let steiner: Vec<usize> = out.nodes.iter().filter(|n| n.kind == NodeKind::Steiner).map(|n| n.id).collect();
    if !steiner.is_empty() {
        let rooted = Rooted::new(&out.nodes, &out.edges).expect("tree invariant");
        for _ in 0..RELOCATE_MAX_SWEEPS {
            let mut max_move: f64 = 0.0;
            for &s in &steiner {
                let nb = &rooted.adjacency[s];
                debug_assert_eq!(nb.len(), 3);
                let pts = [out.nodes[nb[0]].position, out.nodes[nb[1]].position, out.nodes[nb[2]].position];
                let weights = [
                    rooted.edge_weight(s, nb[0], out.c_b),
                    rooted.edge_weight(s, nb[1], out.c_b),
                    rooted.edge_weight(s, nb[2], out.c_b),
                ];
                let f = weighted_fermat_point(&pts, &weights);
                max_move = max_move.max(f.distance(out.nodes[s].position));
                out.nodes[s].position = f;
            }
            if max_move < RELOCATE_TOL {
                break;
            }
        }
    }
    out.refresh_costs();
    out
}

/// Keeps `current` unless `candidate` is cheaper by the factor `nu`.
/// Returns the retained tree and whether the candidate won.
pub fn maybe_accept_topology(current: &TaskTree, candidate: TaskTree, nu: f64) -> (TaskTree, bool) {
    if candidate.costs.total < nu * current.costs.total {
        let version = current.version + 1;
        (TaskTree { version, ..candidate }, true)
    } else {
        (current.clone(), false)
    }
}
