//! Shared fixtures for the criterion benches.

use hplsv::{generate, learner, DualQ, Heading, Pose, QueueScenario, RewardConfig, TrainConfig};

pub const DEMO_START: Pose = Pose::new(2, 2, Heading::E);
pub const SCALED_START: Pose = Pose::new(5, 5, Heading::E);

pub fn demo() -> QueueScenario {
    generate::demo()
}

pub fn scaled() -> QueueScenario {
    generate::scaled()
}

/// Model trained on the demo scenario with the default schedule.
pub fn trained_demo_model() -> DualQ {
    learner::train(&demo(), &TrainConfig::default(), &RewardConfig::default()).expect("demo training")
}
