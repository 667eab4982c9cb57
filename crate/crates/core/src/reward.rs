use crate::error::{Error, Result};
use crate::grid::{Action, Pose};
use crate::scenario::QueueScenario;

/// Reward constants for the navigation and social components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardConfig {
    /// Goal bonus.
    pub k_g: f64,
    /// Per-step penalty.
    pub k_r: f64,
    /// Penalty for entering a virtual obstacle.
    pub k_s: f64,
    /// Social weight applied in the task reward.
    pub w: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            k_g: 10.0,
            k_r: 0.05,
            k_s: 1.0,
            w: 1.0,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !(pos(self.k_g) && pos(self.k_r) && pos(self.k_s)) {
            return Err(Error::InvalidConfig(format!(
                "k_g, k_r and k_s must be positive (got {}, {}, {})",
                self.k_g, self.k_r, self.k_s
            )));
        }
        if !(self.w >= 0.0 && self.w.is_finite()) {
            return Err(Error::InvalidConfig(format!("w must be >= 0, got {}", self.w)));
        }
        Ok(())
    }
}

pub fn nav_reward(cfg: &RewardConfig, d_prev: f64, d_now: f64, reached: bool) -> f64 {
    if reached {
        cfg.k_g
    } else {
        d_prev - d_now - cfg.k_r
    }
}

/// Unweighted social reward: `-k_s` when a move enters a virtual obstacle.
pub fn social_reward(cfg: &RewardConfig, scenario: &QueueScenario, before: Pose, action: Action, after: Pose) -> f64 {
    if scenario.is_crossing(before, action, after) {
        -cfg.k_s
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Cell, GridMap, Heading};
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
    fn goal_branch() {
        assert_eq!(nav_reward(&RewardConfig::default(), 1.0, 0.0, true), 10.0);
    }

    #[test]
    fn progress_branch() {
        let r = nav_reward(&RewardConfig::default(), 5.0, 4.0, false);
        assert!((r - 0.95).abs() < 1e-12);
        assert_eq!(nav_reward(&RewardConfig::default(), 3.0, 3.0, false), -0.05);
    }

    #[test]
    fn social_penalty_only_on_ring_entry() {
        let cfg = RewardConfig::default();
        let s = demo();
        let before = Pose::new(15, 12, Heading::N);
        assert_eq!(social_reward(&cfg, &s, before, Action::Forward, Pose::new(15, 13, Heading::N)), -1.0);
        assert_eq!(social_reward(&cfg, &s, before, Action::TurnLeft, Pose::new(15, 12, Heading::W)), 0.0);
        assert_eq!(
            social_reward(&cfg, &s, Pose::new(5, 5, Heading::N), Action::Forward, Pose::new(5, 6, Heading::N)),
            0.0
        );
    }

    #[test]
    fn validation() {
        assert!(RewardConfig::default().validate().is_ok());
        assert!(RewardConfig { k_s: 0.0, ..Default::default() }.validate().is_err());
        assert!(RewardConfig { w: -1.0, ..Default::default() }.validate().is_err());
        assert!(RewardConfig { w: 0.0, ..Default::default() }.validate().is_ok());
    }
}
