//! Exact solvers over the full pose space, used as ground truth for the
//! planner and the learned social values.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use crate::error::{Error, Result};
use crate::grid::{step_unchecked, Action, Cell, GridMap, Pose};
use crate::learner::{DualQ, ObsKey, QuantizerConfig};
use crate::observation::observe_scene;
use crate::scenario::QueueScenario;

/// Fewest actions from `start` to any pose on `goal`, or `None` if unreachable.
pub fn dijkstra_actions(map: &GridMap, start: Pose, goal: Cell) -> Option<usize> {
    if !map.in_bounds(start.cell()) || !map.is_free(start.cell()) {
        return None;
    }
    if start.cell() == goal {
        return Some(0);
    }
    let mut dist = vec![usize::MAX; map.pose_count()];
    let mut queue = VecDeque::new();
    dist[map.pose_index(start)] = 0;
    queue.push_back(start);
    while let Some(p) = queue.pop_front() {
        let d = dist[map.pose_index(p)];
        for a in Action::ALL {
            let n = step_unchecked(map, p, a);
            if n == p {
                continue;
            }
            let ni = map.pose_index(n);
            if dist[ni] != usize::MAX {
                continue;
            }
            if n.cell() == goal {
                return Some(d + 1);
            }
            dist[ni] = d + 1;
            queue.push_back(n);
        }
    }
    None
}

/// Exact social action values for every pose of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactValues {
    /// Indexed by [`GridMap::pose_index`]. Obstacle poses and poses on the
    /// goal cell (terminal) hold zeros.
    pub q: Vec<[f64; Action::COUNT]>,
    pub gamma: f64,
    pub k_s: f64,
    pub iterations: usize,
    /// Max-norm change of each sweep.
    pub residuals: Vec<f64>,
}

impl ExactValues {
    pub fn get(&self, map: &GridMap, pose: Pose, action: Action) -> f64 {
        self.q[map.pose_index(pose)][action.index()]
    }

    pub fn value(&self, map: &GridMap, pose: Pose) -> f64 {
        self.q[map.pose_index(pose)].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Immediate reward and successor of every (pose, action).
struct Model {
    next: Vec<[usize; Action::COUNT]>,
    reward: Vec<[f64; Action::COUNT]>,
    /// Successor lies on the goal cell: no bootstrap.
    terminal: Vec<[bool; Action::COUNT]>,
    /// Pose is a real decision state (free, not on the goal).
    live: Vec<bool>,
}

fn build_model(scenario: &QueueScenario, k_s: f64) -> Model {
    let map = &scenario.map;
    let goal = scenario.goal();
    let n = map.pose_count();
    let mut m = Model {
        next: vec![[0; Action::COUNT]; n],
        reward: vec![[0.0; Action::COUNT]; n],
        terminal: vec![[false; Action::COUNT]; n],
        live: vec![false; n],
    };
    for i in 0..n {
        let p = map.pose_at(i);
        if !map.is_free(p.cell()) || p.cell() == goal {
            continue;
        }
        m.live[i] = true;
        for a in Action::ALL {
            let s = step_unchecked(map, p, a);
            let j = a.index();
            m.next[i][j] = map.pose_index(s);
            m.reward[i][j] = if scenario.is_crossing(p, a, s) { -k_s } else { 0.0 };
            m.terminal[i][j] = s.cell() == goal;
        }
    }
    m
}

fn check_params(gamma: f64, k_s: f64, tol: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidConfig(format!("gamma must be in [0, 1), got {gamma}")));
    }
    if !(k_s >= 0.0 && k_s.is_finite()) {
        return Err(Error::InvalidConfig(format!("k_s must be >= 0, got {k_s}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tol must be positive, got {tol}")));
    }
    Ok(())
}

/// Value iteration with max-bootstrap on the pose-space MDP whose only
/// reward is `-k_s` per virtual-obstacle crossing.
pub fn social_value_iteration(scenario: &QueueScenario, gamma: f64, k_s: f64, tol: f64) -> Result<ExactValues> {
    check_params(gamma, k_s, tol)?;
    let m = build_model(scenario, k_s);
    iterate(&m, gamma, k_s, tol, |q, i| q[i].iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Social values of a fixed policy (on-policy evaluation), where
/// `policy(pose)` gives the action taken in each live pose.
pub fn social_policy_evaluation<P>(scenario: &QueueScenario, gamma: f64, k_s: f64, tol: f64, policy: P) -> Result<ExactValues>
where
    P: Fn(Pose) -> Action,
{
    check_params(gamma, k_s, tol)?;
    let m = build_model(scenario, k_s);
    let map = &scenario.map;
    let chosen: Vec<usize> = (0..map.pose_count())
        .map(|i| if m.live[i] { policy(map.pose_at(i)).index() } else { 0 })
        .collect();
    iterate(&m, gamma, k_s, tol, |q, i| q[i][chosen[i]])
}

fn iterate<B>(m: &Model, gamma: f64, k_s: f64, tol: f64, boot: B) -> Result<ExactValues>
where
    B: Fn(&[[f64; Action::COUNT]], usize) -> f64,
{
    let n = m.live.len();
    let mut q = vec![[0.0; Action::COUNT]; n];
    let mut residuals = Vec::new();
    // Contraction by gamma per sweep; with gamma = 0 one sweep is exact.
    let limit = 100_000;
    loop {
        let mut next = vec![[0.0; Action::COUNT]; n];
        let mut delta = 0.0f64;
        for i in 0..n {
            if !m.live[i] {
                continue;
            }
            for j in 0..Action::COUNT {
                let b = if m.terminal[i][j] { 0.0 } else { boot(&q, m.next[i][j]) };
                let v = m.reward[i][j] + gamma * b;
                delta = delta.max((v - q[i][j]).abs());
                next[i][j] = v;
            }
        }
        q = next;
        residuals.push(delta);
        if delta < tol {
            break;
        }
        if residuals.len() >= limit {
            return Err(Error::InvalidConfig(format!("value iteration did not converge in {limit} sweeps")));
        }
    }
    Ok(ExactValues {
        q,
        gamma,
        k_s,
        iterations: residuals.len(),
        residuals,
    })
}

/// Largest violation of the max-Bellman equation over all live (pose, action).
pub fn bellman_residual(scenario: &QueueScenario, values: &ExactValues) -> f64 {
    let m = build_model(scenario, values.k_s);
    let mut worst = 0.0f64;
    for i in 0..m.live.len() {
        if !m.live[i] {
            continue;
        }
        for j in 0..Action::COUNT {
            let b = if m.terminal[i][j] {
                0.0
            } else {
                values.q[m.next[i][j]].iter().copied().fold(f64::NEG_INFINITY, f64::max)
            };
            let rhs = m.reward[i][j] + values.gamma * b;
            worst = worst.max((values.q[i][j] - rhs).abs());
        }
    }
    worst
}

/// Exact values aggregated per quantized key.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedValues {
    pub max: BTreeMap<ObsKey, [f64; Action::COUNT]>,
    pub mean: BTreeMap<ObsKey, [f64; Action::COUNT]>,
    /// Number of live poses mapped onto each key.
    pub support: BTreeMap<ObsKey, usize>,
}

pub fn project(scenario: &QueueScenario, values: &ExactValues, quantizer: &QuantizerConfig) -> ProjectedValues {
    let map = &scenario.map;
    let goal = scenario.goal();
    let mut max: BTreeMap<ObsKey, [f64; Action::COUNT]> = BTreeMap::new();
    let mut sum: BTreeMap<ObsKey, [f64; Action::COUNT]> = BTreeMap::new();
    let mut support: BTreeMap<ObsKey, usize> = BTreeMap::new();
    for i in 0..map.pose_count() {
        let p = map.pose_at(i);
        if !map.is_free(p.cell()) || p.cell() == goal {
            continue;
        }
        let key = quantizer.quantize(&observe_scene(&scenario.scene, p));
        let row = values.q[i];
        let mx = max.entry(key).or_insert([f64::NEG_INFINITY; Action::COUNT]);
        let sm = sum.entry(key).or_insert([0.0; Action::COUNT]);
        for j in 0..Action::COUNT {
            mx[j] = mx[j].max(row[j]);
            sm[j] += row[j];
        }
        *support.entry(key).or_insert(0) += 1;
    }
    let mean = sum
        .into_iter()
        .map(|(k, s)| {
            let n = support[&k] as f64;
            (k, s.map(|v| v / n))
        })
        .collect();
    ProjectedValues { max, mean, support }
}

/// Absolute deviation between learned and projected exact social values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationReport {
    pub max_abs: f64,
    pub mean_abs: f64,
    /// Key-action pairs compared.
    pub entries: usize,
    /// Keys with at least one pose that the learner never stored.
    pub unseen_keys: usize,
}

/// Compare `Q_s` with an aggregation (`max` or `mean`) of exact values over
/// every key reachable in the scenario. Unseen keys read as 0.
pub fn deviation(dq: &DualQ, aggregated: &BTreeMap<ObsKey, [f64; Action::COUNT]>) -> DeviationReport {
    let mut max_abs = 0.0f64;
    let mut total = 0.0;
    let mut entries = 0;
    let mut unseen_keys = 0;
    for (key, row) in aggregated {
        if !dq.q_social.contains(key) {
            unseen_keys += 1;
        }
        for a in Action::ALL {
            let d = (dq.q_social.get(key, a) - row[a.index()]).abs();
            max_abs = max_abs.max(d);
            total += d;
            entries += 1;
        }
    }
    DeviationReport {
        max_abs,
        mean_abs: if entries == 0 { 0.0 } else { total / entries as f64 },
        entries,
        unseen_keys,
    }
}

/// Ground-truth optimum of the combined objective with true social costs.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalPath {
    pub poses: Vec<Pose>,
    pub actions: Vec<Action>,
    /// `actions + w * k_s * crossings`.
    pub cost: f64,
    pub crossings: usize,
}

impl OptimalPath {
    pub fn action_count(&self) -> usize {
        self.actions.len()
    }
}

#[derive(PartialEq)]
struct Entry {
    cost: f64,
    seq: usize,
    pose: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Uniform-cost search with edge cost `1 + w * k_s * crossing`.
pub fn social_optimal_path(scenario: &QueueScenario, start: Pose, w: f64, k_s: f64) -> Result<OptimalPath> {
    let map = &scenario.map;
    let goal = scenario.goal();
    map.validate_pose(start)?;
    let n = map.pose_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<(usize, Action)>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    let s = map.pose_index(start);
    dist[s] = 0.0;
    heap.push(Entry { cost: 0.0, seq: 0, pose: s });
    let mut seq = 0;
    let mut expanded = 0;
    let mut found = None;
    while let Some(Entry { cost, pose: i, .. }) = heap.pop() {
        if cost > dist[i] {
            continue;
        }
        let p = map.pose_at(i);
        if p.cell() == goal {
            found = Some(i);
            break;
        }
        expanded += 1;
        for a in Action::ALL {
            let q = step_unchecked(map, p, a);
            if q == p {
                continue;
            }
            let crossing = if scenario.is_crossing(p, a, q) { 1.0 } else { 0.0 };
            let c = cost + 1.0 + w * k_s * crossing;
            let j = map.pose_index(q);
            if c < dist[j] {
                dist[j] = c;
                parent[j] = Some((i, a));
                seq += 1;
                heap.push(Entry { cost: c, seq, pose: j });
            }
        }
    }
    let Some(end) = found else {
        return Err(Error::NoPath { start, goal, expanded });
    };
    let mut poses = vec![map.pose_at(end)];
    let mut actions = Vec::new();
    let mut cur = end;
    while let Some((prev, a)) = parent[cur] {
        poses.push(map.pose_at(prev));
        actions.push(a);
        cur = prev;
    }
    poses.reverse();
    actions.reverse();
    let crossings = scenario.count_crossings(&poses, &actions);
    Ok(OptimalPath {
        cost: dist[end],
        poses,
        actions,
        crossings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Heading;
    use crate::scenario::{Person, StartSpec};

    fn demo() -> QueueScenario {
        QueueScenario::with_margin(
            GridMap::open(30, 30).unwrap(),
            Cell::new(15, 15),
            vec![Person::new(15, 17, Heading::S), Person::new(15, 19, Heading::S)],
            1,
            StartSpec::Random,
        )
        .unwrap()
    }

    #[test]
    fn dijkstra_trivial_cases() {
        let map = GridMap::open(10, 3).unwrap();
        assert_eq!(dijkstra_actions(&map, Pose::new(4, 1, Heading::N), Cell::new(4, 1)), Some(0));
        assert_eq!(dijkstra_actions(&map, Pose::new(0, 1, Heading::E), Cell::new(5, 1)), Some(5));
        // Backing up is as cheap as driving forward.
        assert_eq!(dijkstra_actions(&map, Pose::new(5, 1, Heading::E), Cell::new(0, 1)), Some(5));
        // One turn is needed for a lateral offset.
        assert_eq!(dijkstra_actions(&map, Pose::new(0, 0, Heading::E), Cell::new(3, 2)), Some(6));
    }

    #[test]
    fn dijkstra_sealed_goal() {
        let walls = [Cell::new(1, 2), Cell::new(3, 2), Cell::new(2, 1), Cell::new(2, 3)];
        let map = GridMap::with_obstacles(5, 5, 0.2, walls).unwrap();
        assert_eq!(dijkstra_actions(&map, Pose::new(0, 0, Heading::N), Cell::new(2, 2)), None);
    }

    #[test]
    fn zero_discount_gives_immediate_reward() {
        let s = demo();
        let v = social_value_iteration(&s, 0.0, 1.0, 1e-9).unwrap();
        for i in 0..s.map.pose_count() {
            let p = s.map.pose_at(i);
            if p.cell() == s.goal() {
                continue;
            }
            for a in Action::ALL {
                let after = step_unchecked(&s.map, p, a);
                let expect = if s.is_crossing(p, a, after) { -1.0 } else { 0.0 };
                assert_eq!(v.get(&s.map, p, a), expect);
            }
        }
    }

    #[test]
    fn values_bounded_and_bellman_consistent() {
        let s = demo();
        let v = social_value_iteration(&s, 0.95, 1.0, 1e-9).unwrap();
        let lo = -1.0 / (1.0 - 0.95);
        assert!(v.q.iter().flatten().all(|&x| (lo..=0.0).contains(&x)));
        assert!(bellman_residual(&s, &v) < 1e-9);
        assert!(v.residuals.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn ring_avoidable_poses_have_zero_value() {
        let s = demo();
        let v = social_value_iteration(&s, 0.95, 1.0, 1e-9).unwrap();
        let outside = s.outside_mask();
        let inside = s.inside_mask();
        for i in 0..s.map.pose_count() {
            let p = s.map.pose_at(i);
            let ci = s.map.index(p.cell());
            if p.cell() != s.goal() && (outside[ci] || inside[ci] || s.opening.contains(&p.cell())) {
                assert_eq!(v.value(&s.map, p), 0.0, "{p}");
            }
        }
        // A pose on the goal's neighbour inside the ring needs no crossing.
        assert_eq!(v.value(&s.map, Pose::new(15, 14, Heading::N)), 0.0);
    }

    #[test]
    fn policy_evaluation_of_always_forward() {
        // Driving east along row 15 from x = 10 crosses the ring at x = 13
        // and then reaches the goal, so the first step's value is
        // -gamma^2 (crossing happens on the third move).
        let s = demo();
        let gamma = 0.5;
        let v = social_policy_evaluation(&s, gamma, 1.0, 1e-12, |_| Action::Forward).unwrap();
        let q = v.get(&s.map, Pose::new(10, 15, Heading::E), Action::Forward);
        assert!((q - (-gamma * gamma)).abs() < 1e-9);
    }

    #[test]
    fn optimal_path_weights() {
        let s = demo();
        let start = Pose::new(2, 2, Heading::E);
        let zero = social_optimal_path(&s, start, 0.0, 1.0).unwrap();
        assert_eq!(Some(zero.action_count()), dijkstra_actions(&s.map, start, s.goal()));
        assert_eq!(zero.cost, zero.action_count() as f64);

        let heavy = social_optimal_path(&s, start, 100.0, 1.0).unwrap();
        assert_eq!(heavy.crossings, 0);
        assert!(s.enters_only_through_opening(&heavy.poses));

        let light = social_optimal_path(&s, start, 0.01, 1.0).unwrap();
        assert!(light.crossings >= 1);
    }

    #[test]
    fn rejects_bad_parameters() {
        let s = demo();
        assert!(social_value_iteration(&s, 1.0, 1.0, 1e-9).is_err());
        assert!(social_value_iteration(&s, 0.5, 1.0, 0.0).is_err());
    }
}
