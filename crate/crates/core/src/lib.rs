//! Gridworld queue-joining with learned social value.
//!
//! A robot must reach a goal cell at the tail of a queue of people without
//! cutting through the queue. Two Q-tables are learned from interaction: a
//! task table that drives exploration and a social table that estimates the
//! discounted cost of crossing the queue's personal space. A* then plans over
//! oriented poses using the social table as an extra cost.

pub mod episode;
pub mod eval;
pub mod error;
pub mod generate;
pub mod grid;
pub mod learner;
pub mod observation;
pub mod oracle;
pub mod planner;
pub mod render;
pub mod reward;
pub mod scenario;
pub mod scenario_file;

pub use episode::{env_step, run_episode, run_episode_from, Transition};
pub use error::{Error, Result};
pub use grid::{step, step_unchecked, Action, Cell, GridMap, Heading, Pose};
pub use learner::{DualQ, ObsKey, QuantizerConfig, SocialTarget, TrainConfig, ValueTable};
pub use observation::{observe, observe_scene, Observation, Polar};
pub use planner::{plan, plan_scenario, Normalization, PlanResult, PlannerConfig};
pub use reward::RewardConfig;
pub use scenario::{build_virtual_obstacles, Person, QueueScenario, Scene, StartSpec};
pub use scenario_file::{load_scenario, parse_scenario, print_scenario, save_scenario};
