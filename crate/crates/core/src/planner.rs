//! A* over oriented poses with a learned social term.
//!
//! Priority of a node reached from `s-` by action `a`:
//!
//! ```text
//! f = g_n + h_n + w * (g_s + h_s)
//! ```
//!
//! where `h_n` is the Manhattan distance to the goal, `h_s` is the thresholded
//! learned cost of the incoming transition and `g_s` accumulates the same
//! thresholded cost along the path. The planner never sees the virtual
//! obstacles; social knowledge arrives only through `Q_s`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::grid::{step_unchecked, Action, Cell, GridMap, Pose};
use crate::learner::DualQ;
use crate::observation::{observe_scene, Observation};
use crate::scenario::{QueueScenario, Scene};

/// How raw social values are scaled into a cost in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `Z = k_s`: one expected crossing saturates the cost.
    Crossing,
    /// `Z = k_s / (1 - gamma)`: only a crossing on every future step does.
    Horizon,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    pub w: f64,
    pub k_thresh: f64,
    pub reopen_closed: bool,
    pub normalization: Normalization,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            w: 1.0,
            k_thresh: 0.3,
            reopen_closed: true,
            normalization: Normalization::Crossing,
        }
    }
}

impl PlannerConfig {
    pub fn baseline() -> Self {
        PlannerConfig {
            w: 0.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w >= 0.0 && self.w.is_finite()) {
            return Err(Error::InvalidConfig(format!("w must be >= 0, got {}", self.w)));
        }
        if !(0.0..1.0).contains(&self.k_thresh) {
            return Err(Error::InvalidConfig(format!(
                "k_thresh must be in [0, 1), got {}",
                self.k_thresh
            )));
        }
        Ok(())
    }
}

/// Normalization constant `Z` for a model.
pub fn normalizer(dq: &DualQ, n: Normalization) -> f64 {
    match n {
        Normalization::Crossing => dq.reward.k_s,
        Normalization::Horizon => dq.reward.k_s / (1.0 - dq.gamma),
    }
}

/// `c_s = 1 - Q_hat`, with `Q_hat = clamp(1 + Q_s / Z, 0, 1)`.
pub fn social_cost_from_value(q_s: f64, z: f64) -> f64 {
    let q_hat = (1.0 + q_s / z).clamp(0.0, 1.0);
    (1.0 - q_hat).clamp(0.0, 1.0)
}

/// Learned cost of taking `action` from the state observed as `obs_prev`.
pub fn learned_social_cost(dq: &DualQ, obs_prev: &Observation, action: Action, n: Normalization) -> f64 {
    social_cost_from_value(dq.social_value(obs_prev, action), normalizer(dq, n))
}

/// Pass the cost through only when it exceeds the confidence threshold.
pub fn social_heuristic(c_s: f64, k_thresh: f64) -> f64 {
    if c_s > k_thresh {
        c_s
    } else {
        0.0
    }
}

pub fn nav_heuristic(pose: Pose, goal: Cell) -> f64 {
    f64::from(pose.cell().manhattan(goal))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    /// Poses from start to goal; one more than `actions`.
    pub poses: Vec<Pose>,
    pub actions: Vec<Action>,
    pub total_g_n: f64,
    pub total_g_s: f64,
    /// Thresholded social cost charged on each action.
    pub per_step_c_s: Vec<f64>,
    pub expanded: usize,
    /// True crossings, filled in from scenario ground truth after planning.
    pub crossings: Option<usize>,
}

impl PlanResult {
    pub fn action_count(&self) -> usize {
        self.actions.len()
    }

    pub fn combined_cost(&self, w: f64) -> f64 {
        self.total_g_n + w * self.total_g_s
    }
}

/// Social contributions of one expansion, for instrumentation.
#[derive(Debug, Clone, Copy)]
pub struct Expansion {
    pub pose: Pose,
    /// Largest thresholded cost over generated successors.
    pub max_social: f64,
}

#[derive(Clone, Copy)]
struct Node {
    pose: Pose,
    g_n: f64,
    g_s: f64,
    parent: Option<usize>,
    action: Option<Action>,
    c_s: f64,
}

#[derive(PartialEq)]
struct Open {
    f: f64,
    h_n: f64,
    seq: usize,
    node: usize,
}

impl Eq for Open {}

impl Ord for Open {
    // BinaryHeap is a max-heap: reverse so the smallest (f, h_n, seq) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h_n.total_cmp(&self.h_n))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Source of the per-transition social term.
trait SocialTerm {
    /// Thresholded cost for every action from `pose`.
    fn costs(&self, pose: Pose) -> [f64; Action::COUNT];
}

struct Learned<'a> {
    scene: &'a Scene,
    dq: &'a DualQ,
    z: f64,
    k_thresh: f64,
}

impl SocialTerm for Learned<'_> {
    fn costs(&self, pose: Pose) -> [f64; Action::COUNT] {
        let key = self.dq.quantizer.quantize(&observe_scene(self.scene, pose));
        let row = self.dq.q_social.row(&key);
        row.map(|v| social_heuristic(social_cost_from_value(v, self.z), self.k_thresh))
    }
}

struct NoSocial;

impl SocialTerm for NoSocial {
    fn costs(&self, _pose: Pose) -> [f64; Action::COUNT] {
        [0.0; Action::COUNT]
    }
}

/// Plan from `start` to the scene's goal cell.
pub fn plan(map: &GridMap, scene: &Scene, start: Pose, dq: &DualQ, cfg: &PlannerConfig) -> Result<PlanResult> {
    plan_traced(map, scene, start, dq, cfg, |_| {})
}

/// As [`plan`], reporting every expansion to `trace`.
pub fn plan_traced<F>(
    map: &GridMap,
    scene: &Scene,
    start: Pose,
    dq: &DualQ,
    cfg: &PlannerConfig,
    trace: F,
) -> Result<PlanResult>
where
    F: FnMut(Expansion),
{
    cfg.validate()?;
    map.validate_pose(start)?;
    if !map.is_free(scene.goal) {
        return Err(Error::OutOfBounds(scene.goal, map.width(), map.height()));
    }
    if cfg.w == 0.0 {
        // The social term is multiplied by zero; skip the table lookups.
        return search(map, scene.goal, start, cfg, &NoSocial, trace);
    }
    let term = Learned {
        scene,
        dq,
        z: normalizer(dq, cfg.normalization),
        k_thresh: cfg.k_thresh,
    };
    search(map, scene.goal, start, cfg, &term, trace)
}

/// Plan in a full scenario and annotate true crossings afterwards.
pub fn plan_scenario(scenario: &QueueScenario, start: Pose, dq: &DualQ, cfg: &PlannerConfig) -> Result<PlanResult> {
    let mut r = plan(&scenario.map, &scenario.scene, start, dq, cfg)?;
    r.crossings = Some(scenario.count_crossings(&r.poses, &r.actions));
    Ok(r)
}

fn search<T, F>(map: &GridMap, goal: Cell, start: Pose, cfg: &PlannerConfig, term: &T, mut trace: F) -> Result<PlanResult>
where
    T: SocialTerm,
    F: FnMut(Expansion),
{
    let w = cfg.w;
    let mut nodes: Vec<Node> = Vec::new();
    let mut best = vec![f64::INFINITY; map.pose_count()];
    let mut closed = vec![false; map.pose_count()];
    let mut open = BinaryHeap::new();
    let mut seq = 0usize;
    let mut expanded = 0usize;

    nodes.push(Node {
        pose: start,
        g_n: 0.0,
        g_s: 0.0,
        parent: None,
        action: None,
        c_s: 0.0,
    });
    best[map.pose_index(start)] = 0.0;
    let h0 = nav_heuristic(start, goal);
    open.push(Open { f: h0, h_n: h0, seq, node: 0 });

    while let Some(Open { node: id, .. }) = open.pop() {
        let node = nodes[id];
        let pi = map.pose_index(node.pose);
        let g = node.g_n + w * node.g_s;
        // Stale entry: a cheaper route to this pose was queued later.
        if g > best[pi] {
            continue;
        }
        if node.pose.cell() == goal {
            return Ok(reconstruct(&nodes, id, expanded));
        }
        if closed[pi] && !cfg.reopen_closed {
            continue;
        }
        closed[pi] = true;
        expanded += 1;

        let costs = term.costs(node.pose);
        let mut max_social = 0.0f64;
        for action in Action::ALL {
            let next = step_unchecked(map, node.pose, action);
            if next == node.pose {
                continue;
            }
            let c = costs[action.index()];
            max_social = max_social.max(c);
            let g_n = node.g_n + 1.0;
            let g_s = node.g_s + c;
            let ni = map.pose_index(next);
            let g_new = g_n + w * g_s;
            if g_new >= best[ni] {
                continue;
            }
            if closed[ni] && !cfg.reopen_closed {
                continue;
            }
            best[ni] = g_new;
            closed[ni] = false;
            let h_n = nav_heuristic(next, goal);
            nodes.push(Node {
                pose: next,
                g_n,
                g_s,
                parent: Some(id),
                action: Some(action),
                c_s: c,
            });
            seq += 1;
            open.push(Open {
                f: g_n + h_n + w * (g_s + c),
                h_n,
                seq,
                node: nodes.len() - 1,
            });
        }
        trace(Expansion {
            pose: node.pose,
            max_social,
        });
    }
    Err(Error::NoPath {
        start,
        goal,
        expanded,
    })
}

fn reconstruct(nodes: &[Node], goal_id: usize, expanded: usize) -> PlanResult {
    let mut chain = Vec::new();
    let mut cur = Some(goal_id);
    while let Some(id) = cur {
        chain.push(nodes[id]);
        cur = nodes[id].parent;
    }
    chain.reverse();
    let last = chain[chain.len() - 1];
    PlanResult {
        poses: chain.iter().map(|n| n.pose).collect(),
        actions: chain.iter().filter_map(|n| n.action).collect(),
        total_g_n: last.g_n,
        total_g_s: last.g_s,
        per_step_c_s: chain.iter().skip(1).map(|n| n.c_s).collect(),
        expanded,
        crossings: None,
    }
}

/// Per-cell maximum of the thresholded learned cost over every transition
/// that ends in the cell (all headings, all actions).
pub fn cost_field(map: &GridMap, scene: &Scene, dq: &DualQ, cfg: &PlannerConfig) -> Vec<f64> {
    let term = Learned {
        scene,
        dq,
        z: normalizer(dq, cfg.normalization),
        k_thresh: cfg.k_thresh,
    };
    let mut field = vec![0.0f64; map.cell_count()];
    for cell in map.free_cells() {
        for h in crate::grid::Heading::ALL {
            let pose = Pose::at(cell, h);
            let costs = term.costs(pose);
            for action in Action::ALL {
                let next = step_unchecked(map, pose, action);
                if next == pose {
                    continue;
                }
                let i = map.index(next.cell());
                field[i] = field[i].max(costs[action.index()]);
            }
        }
    }
    field
}
