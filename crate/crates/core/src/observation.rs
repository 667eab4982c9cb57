//! Ego-centric observations: distance and relative bearing of the goal and of
//! every person, measured from the agent's cell and heading.

use std::f64::consts::{PI, TAU};

use crate::error::Result;
use crate::grid::{Cell, Pose};
use crate::scenario::{QueueScenario, Scene};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polar {
    /// Euclidean distance in cells.
    pub dist: f64,
    /// Radians in (-pi, pi], zero straight ahead, positive to the left.
    pub bearing: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub goal: Polar,
    /// One entry per person, in scenario order.
    pub people: Vec<Polar>,
}

impl Observation {
    pub fn goal_dist(&self) -> f64 {
        self.goal.dist
    }

    pub fn goal_bearing(&self) -> f64 {
        self.goal.bearing
    }

    /// Flat feature vector `[d_g, b_g, d_1, b_1, ...]`.
    pub fn to_vec(&self) -> Vec<f64> {
        std::iter::once(self.goal)
            .chain(self.people.iter().copied())
            .flat_map(|p| [p.dist, p.bearing])
            .collect()
    }
}

/// Wrap an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

fn polar(pose: Pose, target: Cell) -> Polar {
    let dx = f64::from(target.x - pose.x);
    let dy = f64::from(target.y - pose.y);
    if dx == 0.0 && dy == 0.0 {
        return Polar { dist: 0.0, bearing: 0.0 };
    }
    Polar {
        dist: dx.hypot(dy),
        bearing: wrap_angle(dy.atan2(dx) - pose.heading.angle()),
    }
}

/// Observation of a scene from `pose`. No map validation.
pub fn observe_scene(scene: &Scene, pose: Pose) -> Observation {
    Observation {
        goal: polar(pose, scene.goal),
        people: scene.people.iter().map(|p| polar(pose, p.cell())).collect(),
    }
}

pub fn observe(scenario: &QueueScenario, pose: Pose) -> Result<Observation> {
    scenario.map.validate_pose(pose)?;
    Ok(observe_scene(&scenario.scene, pose))
}
