//! Dual tabular Q-learning.
//!
//! The behaviour policy is epsilon-greedy on the task table `Q_T`, trained on
//! `r_n + w * r_s`. The social table `Q_s` sees the same transitions but only
//! the unweighted social reward, and is never consulted when acting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::episode::{env_step, run_episode_from, Transition};
use crate::error::{Error, Result};
use crate::grid::{Action, Pose};
use crate::learner::quantize::{ObsKey, QuantizerConfig};
use crate::learner::table::{greedy_index, ValueTable};
use crate::observation::{observe_scene, Observation};
use crate::reward::RewardConfig;
use crate::scenario::{QueueScenario, StartSpec};

/// Successor action used to bootstrap the social table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SocialTarget {
    /// `max_a' Q_s(k', a')`: optimal social value.
    Max,
    /// `Q_s(k', argmax_a' Q_T(k', a'))`: social cost of the greedy task policy.
    TaskGreedy,
}

impl SocialTarget {
    pub fn name(self) -> &'static str {
        match self {
            SocialTarget::Max => "max",
            SocialTarget::TaskGreedy => "task-greedy",
        }
    }
}

impl std::str::FromStr for SocialTarget {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "max" => Ok(SocialTarget::Max),
            "task-greedy" => Ok(SocialTarget::TaskGreedy),
            other => Err(format!("unknown social target `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub episodes: usize,
    /// Step budget per episode.
    pub budget: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of episodes over which epsilon decays linearly.
    pub epsilon_decay_fraction: f64,
    /// Episodes that use the scenario's fixed start before switching to
    /// uniformly random starts.
    pub fixed_start_episodes: usize,
    pub seed: u64,
    pub quantizer: QuantizerConfig,
    pub social_target: SocialTarget,
    /// Disable to train only `Q_T` (the behaviour is unchanged either way).
    pub learn_social: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig::with_episodes(30_000)
    }
}

impl TrainConfig {
    pub fn with_episodes(episodes: usize) -> Self {
        TrainConfig {
            episodes,
            budget: 200,
            alpha: 0.1,
            gamma: 0.95,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_fraction: 0.7,
            fixed_start_episodes: episodes / 10,
            seed: 42,
            quantizer: QuantizerConfig::default(),
            social_target: SocialTarget::Max,
            learn_social: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.quantizer.validate()?;
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidConfig(format!("gamma must be in [0, 1), got {}", self.gamma)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidConfig(format!("alpha must be in (0, 1], got {}", self.alpha)));
        }
        for e in [self.epsilon_start, self.epsilon_end] {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::InvalidConfig(format!("epsilon must be in [0, 1], got {e}")));
            }
        }
        if self.budget == 0 {
            return Err(Error::InvalidConfig("step budget must be at least 1".into()));
        }
        Ok(())
    }

    pub fn epsilon(&self, episode: usize) -> f64 {
        let span = self.epsilon_decay_fraction * self.episodes as f64;
        let frac = if span <= 0.0 {
            1.0
        } else {
            (episode as f64 / span).min(1.0)
        };
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac
    }
}

/// Trained task and social value tables plus everything needed to use them.
#[derive(Debug, Clone, PartialEq)]
pub struct DualQ {
    pub q_task: ValueTable,
    pub q_social: ValueTable,
    pub quantizer: QuantizerConfig,
    pub gamma: f64,
    pub reward: RewardConfig,
}

impl DualQ {
    pub fn empty(quantizer: QuantizerConfig, gamma: f64, reward: RewardConfig) -> Self {
        DualQ {
            q_task: ValueTable::new(),
            q_social: ValueTable::new(),
            quantizer,
            gamma,
            reward,
        }
    }

    pub fn social_value(&self, obs: &Observation, action: Action) -> f64 {
        self.q_social.get(&self.quantizer.quantize(obs), action)
    }

    pub fn task_greedy(&self, obs: &Observation) -> Action {
        self.q_task.greedy_action(&self.quantizer.quantize(obs))
    }

    /// Lower bound of any social value: `k_s / (1 - gamma)`.
    pub fn social_value_bound(&self) -> f64 {
        self.reward.k_s / (1.0 - self.gamma)
    }

    /// One-step updates of both tables from a single transition.
    pub fn apply(&mut self, u: &Update, alpha: f64, target: SocialTarget, learn_social: bool) {
        let gamma = self.gamma;
        let next_task = self.q_task.row(&u.next_key);
        let successor = greedy_index(&next_task);
        let task_target = u.task_reward + if u.terminal { 0.0 } else { gamma * next_task[successor.index()] };
        let cur = &mut self.q_task.row_mut(u.key)[u.action.index()];
        *cur += alpha * (task_target - *cur);

        if learn_social {
            let boot = match target {
                SocialTarget::Max => self.q_social.max_value(&u.next_key),
                SocialTarget::TaskGreedy => self.q_social.get(&u.next_key, successor),
            };
            let social_target = u.social_reward + if u.terminal { 0.0 } else { gamma * boot };
            let cur = &mut self.q_social.row_mut(u.key)[u.action.index()];
            *cur += alpha * (social_target - *cur);
        }
    }

    /// Roll out the greedy task policy.
    pub fn greedy_rollout(&self, scenario: &QueueScenario, start: Pose, budget: usize) -> Result<Vec<Transition>> {
        run_episode_from(scenario, start, |o| self.task_greedy(o), &self.reward, budget)
    }
}

/// A transition expressed in table keys.
#[derive(Debug, Clone, Copy)]
pub struct Update {
    pub key: ObsKey,
    pub action: Action,
    /// `r_n + w * r_s`.
    pub task_reward: f64,
    /// Unweighted social reward.
    pub social_reward: f64,
    pub next_key: ObsKey,
    /// Goal reached: no bootstrap.
    pub terminal: bool,
}

/// Supplies the scenario for each training episode.
pub trait ScenarioSource {
    fn scenario(&self, episode: usize) -> &QueueScenario;
}

impl ScenarioSource for QueueScenario {
    fn scenario(&self, _episode: usize) -> &QueueScenario {
        self
    }
}

/// Cycles through the set, one scenario per episode.
impl ScenarioSource for [QueueScenario] {
    fn scenario(&self, episode: usize) -> &QueueScenario {
        &self[episode % self.len()]
    }
}

impl ScenarioSource for Vec<QueueScenario> {
    fn scenario(&self, episode: usize) -> &QueueScenario {
        self.as_slice().scenario(episode)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStats {
    pub episode: usize,
    /// Undiscounted task return.
    pub task_return: f64,
    pub success: bool,
    pub crossings: usize,
    pub steps: usize,
}

pub enum TrainEvent<'a> {
    Step { episode: usize, transition: &'a Transition },
    Episode(EpisodeStats),
}

pub fn train<S>(source: &S, cfg: &TrainConfig, reward: &RewardConfig) -> Result<DualQ>
where
    S: ScenarioSource + ?Sized,
{
    train_with(source, cfg, reward, |_| {})
}

pub fn train_with<S, F>(source: &S, cfg: &TrainConfig, reward: &RewardConfig, mut on_event: F) -> Result<DualQ>
where
    S: ScenarioSource + ?Sized,
    F: FnMut(TrainEvent<'_>),
{
    cfg.validate()?;
    reward.validate()?;
    let q = cfg.quantizer;
    let mut dq = DualQ::empty(q, cfg.gamma, *reward);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let alpha = cfg.alpha;

    for ep in 0..cfg.episodes {
        let scenario = source.scenario(ep);
        let epsilon = cfg.epsilon(ep);
        let start = match scenario.start {
            StartSpec::Fixed(p) if ep < cfg.fixed_start_episodes => p,
            _ => scenario.sample_uniform_start(&mut rng),
        };
        let mut stats = EpisodeStats {
            episode: ep,
            task_return: 0.0,
            success: false,
            crossings: 0,
            steps: 0,
        };
        if start.cell() == scenario.goal() {
            on_event(TrainEvent::Episode(stats));
            continue;
        }

        let mut pose = start;
        let mut obs = observe_scene(&scenario.scene, pose);
        let mut key = q.quantize(&obs);
        for t in 0..cfg.budget {
            let action = behaviour_action(&dq.q_task, &key, epsilon, &mut rng);
            let mut tr = env_step(scenario, reward, pose, &obs, action);
            tr.done = tr.reached || t + 1 == cfg.budget;
            let next_key = q.quantize(&tr.obs_after);

            dq.apply(
                &Update {
                    key,
                    action,
                    task_reward: tr.task_reward(reward),
                    social_reward: tr.r_s,
                    next_key,
                    terminal: tr.reached,
                },
                alpha,
                cfg.social_target,
                cfg.learn_social,
            );

            stats.task_return += tr.task_reward(reward);
            stats.crossings += usize::from(tr.is_crossing());
            stats.steps += 1;
            stats.success = tr.reached;
            on_event(TrainEvent::Step { episode: ep, transition: &tr });

            pose = tr.pose_after;
            key = next_key;
            let done = tr.done;
            obs = tr.obs_after;
            if done {
                break;
            }
        }
        on_event(TrainEvent::Episode(stats));
    }
    Ok(dq)
}

fn behaviour_action<R: Rng>(table: &ValueTable, key: &ObsKey, epsilon: f64, rng: &mut R) -> Action {
    if rng.random::<f64>() < epsilon {
        return Action::ALL[rng.random_range(0..Action::COUNT)];
    }
    let row = table.row(key);
    let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut ties = [Action::Forward; Action::COUNT];
    let mut n = 0;
    for a in Action::ALL {
        if row[a.index()] == best {
            ties[n] = a;
            n += 1;
        }
    }
    if n == 1 {
        ties[0]
    } else {
        ties[rng.random_range(0..n)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Cell, GridMap, Heading};
    use crate::scenario::Person;

    fn demo() -> QueueScenario {
        QueueScenario::with_margin(
            GridMap::open(30, 30).unwrap(),
            Cell::new(15, 15),
            vec![Person::new(15, 17, Heading::S), Person::new(15, 19, Heading::S)],
            1,
            StartSpec::Fixed(Pose::new(2, 2, Heading::E)),
        )
        .unwrap()
    }

    fn key(v: u8) -> ObsKey {
        ObsKey::from_parts(&[v, 0, 15, 0, 15, 0]).unwrap()
    }

    #[test]
    fn terminal_crossing_with_unit_step_is_minus_k_s() {
        let mut dq = DualQ::empty(QuantizerConfig::default(), 0.95, RewardConfig::default());
        let u = Update {
            key: key(1),
            action: Action::Forward,
            task_reward: -1.0,
            social_reward: -1.0,
            next_key: key(0),
            terminal: true,
        };
        dq.apply(&u, 1.0, SocialTarget::Max, true);
        assert_eq!(dq.q_social.get(&key(1), Action::Forward), -1.0);
        assert_eq!(dq.q_task.get(&key(1), Action::Forward), -1.0);
    }

    #[test]
    fn constant_reward_converges_to_geometric_sum() {
        for target in [SocialTarget::Max, SocialTarget::TaskGreedy] {
            let gamma = 0.9;
            let mut dq = DualQ::empty(QuantizerConfig::default(), gamma, RewardConfig::default());
            for _ in 0..20_000 {
                for action in Action::ALL {
                    let u = Update {
                        key: key(3),
                        action,
                        task_reward: -0.5,
                        social_reward: -0.5,
                        next_key: key(3),
                        terminal: false,
                    };
                    dq.apply(&u, 0.5, target, true);
                }
            }
            let expected = -0.5 / (1.0 - gamma);
            assert!((dq.q_social.get(&key(3), Action::Forward) - expected).abs() < 1e-6);
            assert!((dq.q_task.get(&key(3), Action::Forward) - expected).abs() < 1e-6);
        }
    }

    #[test]
    fn task_greedy_target_follows_task_table() {
        let mut dq = DualQ::empty(QuantizerConfig::default(), 0.5, RewardConfig::default());
        // Task prefers TurnLeft at the successor, whose social value is -1.
        dq.q_task.set(key(2), Action::TurnLeft, 5.0);
        dq.q_social.set(key(2), Action::TurnLeft, -1.0);
        let u = Update {
            key: key(1),
            action: Action::Forward,
            task_reward: 0.0,
            social_reward: 0.0,
            next_key: key(2),
            terminal: false,
        };
        let mut greedy = dq.clone();
        greedy.apply(&u, 1.0, SocialTarget::TaskGreedy, true);
        assert_eq!(greedy.q_social.get(&key(1), Action::Forward), -0.5);
        dq.apply(&u, 1.0, SocialTarget::Max, true);
        assert_eq!(dq.q_social.get(&key(1), Action::Forward), 0.0);
    }

    #[test]
    fn no_crossing_keeps_social_table_zero() {
        let s = demo();
        let cfg = TrainConfig {
            episodes: 1,
            budget: 5,
            fixed_start_episodes: 1,
            ..TrainConfig::with_episodes(1)
        };
        let mut crossings = 0;
        let dq = train_with(&s, &cfg, &RewardConfig::default(), |e| {
            if let TrainEvent::Episode(st) = e {
                crossings += st.crossings;
            }
        })
        .unwrap();
        assert_eq!(crossings, 0);
        assert!(dq.q_social.values().all(|v| v == 0.0));
        assert!(dq.q_task.len() > 0);
    }

    #[test]
    fn deterministic_given_seed() {
        let s = demo();
        let cfg = TrainConfig { seed: 9, ..TrainConfig::with_episodes(300) };
        let a = train(&s, &cfg, &RewardConfig::default()).unwrap();
        let b = train(&s, &cfg, &RewardConfig::default()).unwrap();
        assert_eq!(a, b);
        let c = train(&s, &TrainConfig { seed: 10, ..cfg }, &RewardConfig::default()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn social_values_stay_in_bounds() {
        let s = demo();
        for target in [SocialTarget::Max, SocialTarget::TaskGreedy] {
            let cfg = TrainConfig { social_target: target, ..TrainConfig::with_episodes(500) };
            let dq = train(&s, &cfg, &RewardConfig::default()).unwrap();
            let bound = dq.social_value_bound();
            assert!(dq.q_social.values().all(|v| (-bound..=0.0).contains(&v)));
            assert!(dq.q_social.values().any(|v| v < 0.0));
        }
    }

    #[test]
    fn epsilon_schedule() {
        let cfg = TrainConfig::with_episodes(1000);
        assert_eq!(cfg.epsilon(0), 1.0);
        assert!((cfg.epsilon(350) - 0.525).abs() < 1e-12);
        assert!((cfg.epsilon(700) - 0.05).abs() < 1e-12);
        assert!((cfg.epsilon(999) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_config() {
        let s = demo();
        let r = RewardConfig::default();
        assert!(train(&s, &TrainConfig { gamma: 1.0, ..TrainConfig::with_episodes(1) }, &r).is_err());
        assert!(train(&s, &TrainConfig { alpha: 0.0, ..TrainConfig::with_episodes(1) }, &r).is_err());
        assert!(train(&s, &TrainConfig { epsilon_end: 1.5, ..TrainConfig::with_episodes(1) }, &r).is_err());
    }
}
