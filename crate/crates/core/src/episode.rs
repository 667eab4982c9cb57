use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{step_unchecked, Action, Pose};
use crate::observation::{observe_scene, Observation};
use crate::reward::{nav_reward, social_reward, RewardConfig};
use crate::scenario::QueueScenario;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub pose_before: Pose,
    pub obs_before: Observation,
    pub action: Action,
    pub r_n: f64,
    /// Unweighted social reward (0 or `-k_s`).
    pub r_s: f64,
    pub pose_after: Pose,
    pub obs_after: Observation,
    /// Goal cell reached.
    pub reached: bool,
    /// Reached, or the step budget ran out.
    pub done: bool,
}

impl Transition {
    /// Task reward `r_n + w * r_s`.
    pub fn task_reward(&self, cfg: &RewardConfig) -> f64 {
        self.r_n + cfg.w * self.r_s
    }

    pub fn is_crossing(&self) -> bool {
        self.r_s < 0.0
    }
}

/// One environment step from an already-observed pose. `done` reflects only
/// goal arrival; callers fold in the step budget.
pub fn env_step(
    scenario: &QueueScenario,
    cfg: &RewardConfig,
    pose: Pose,
    obs: &Observation,
    action: Action,
) -> Transition {
    let after = step_unchecked(&scenario.map, pose, action);
    let obs_after = observe_scene(&scenario.scene, after);
    let reached = after.cell() == scenario.goal();
    Transition {
        pose_before: pose,
        obs_before: obs.clone(),
        action,
        r_n: nav_reward(cfg, obs.goal.dist, obs_after.goal.dist, reached),
        r_s: social_reward(cfg, scenario, pose, action, after),
        pose_after: after,
        obs_after,
        reached,
        done: reached,
    }
}

/// Roll out `policy` from `start` for at most `budget` steps.
pub fn run_episode_from<P>(
    scenario: &QueueScenario,
    start: Pose,
    mut policy: P,
    cfg: &RewardConfig,
    budget: usize,
) -> Result<Vec<Transition>>
where
    P: FnMut(&Observation) -> Action,
{
    if budget == 0 {
        return Err(Error::InvalidConfig("step budget must be at least 1".into()));
    }
    scenario.map.validate_pose(start)?;
    let mut pose = start;
    let mut obs = observe_scene(&scenario.scene, pose);
    let mut out = Vec::new();
    // Starting on the goal is already terminal.
    if pose.cell() == scenario.goal() {
        return Ok(out);
    }
    for t in 0..budget {
        let action = policy(&obs);
        let mut tr = env_step(scenario, cfg, pose, &obs, action);
        tr.done = tr.reached || t + 1 == budget;
        pose = tr.pose_after;
        obs = tr.obs_after.clone();
        let done = tr.done;
        out.push(tr);
        if done {
            break;
        }
    }
    Ok(out)
}

/// Roll out from the scenario's start specification.
pub fn run_episode<P, R>(
    scenario: &QueueScenario,
    policy: P,
    cfg: &RewardConfig,
    budget: usize,
    rng: &mut R,
) -> Result<Vec<Transition>>
where
    P: FnMut(&Observation) -> Action,
    R: Rng + ?Sized,
{
    let start = scenario.sample_start(rng);
    run_episode_from(scenario, start, policy, cfg, budget)
}
