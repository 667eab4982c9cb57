//! Built-in and randomly generated scenarios.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{Cell, GridMap, Heading, Pose};
use crate::scenario::{Person, QueueScenario, StartSpec};

/// 30x30 grid, goal in the centre, two people queued above it with one free
/// cell between each, start at the bottom left.
pub fn demo() -> QueueScenario {
    QueueScenario::with_margin(
        GridMap::open(30, 30).expect("valid grid"),
        Cell::new(15, 15),
        vec![Person::new(15, 17, Heading::S), Person::new(15, 19, Heading::S)],
        1,
        StartSpec::Fixed(Pose::new(2, 2, Heading::E)),
    )
    .expect("demo scenario is valid")
}

/// The demo queue centred in a 100x100 grid with a far-away start.
pub fn scaled() -> QueueScenario {
    QueueScenario::with_margin(
        GridMap::open(100, 100).expect("valid grid"),
        Cell::new(50, 50),
        vec![Person::new(50, 52, Heading::S), Person::new(50, 54, Heading::S)],
        1,
        StartSpec::Fixed(Pose::new(5, 5, Heading::E)),
    )
    .expect("scaled scenario is valid")
}

/// Parameters of the continuous-like family, in metres where noted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousLike {
    pub width: u32,
    pub height: u32,
    pub resolution: f64,
    /// Clearance of the virtual obstacles from goal and people (m).
    pub clearance: f64,
    pub min_spacing: f64,
    pub max_spacing: f64,
    pub max_people: usize,
}

impl Default for ContinuousLike {
    fn default() -> Self {
        ContinuousLike {
            width: 30,
            height: 30,
            resolution: 0.2,
            clearance: 0.5,
            min_spacing: 0.4,
            max_spacing: 0.8,
            max_people: 3,
        }
    }
}

impl ContinuousLike {
    pub fn margin(&self) -> u32 {
        // Round before ceil so 0.5 / 0.2 = 2.5000000000000004 stays 3, not 4.
        let cells = self.clearance / self.resolution;
        ((cells * 1e9).round() / 1e9).ceil().max(1.0) as u32
    }

    fn spacing_cells<R: Rng>(&self, rng: &mut R) -> i32 {
        let metres = rng.random_range(self.min_spacing..=self.max_spacing);
        ((metres / self.resolution).round() as i32).max(1)
    }

    /// One scenario: queue axis and direction, goal, people with jittered
    /// spacing snapped to the grid, ring at the clearance margin, and a start
    /// outside the ring.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Result<QueueScenario> {
        let m = self.margin() as i32;
        let n = rng.random_range(1..=self.max_people);
        let spacing: Vec<i32> = (0..n).map(|_| self.spacing_cells(rng)).collect();
        let length: i32 = spacing.iter().sum();
        let vertical = rng.random_bool(0.5);
        let dir = if rng.random_bool(0.5) { 1 } else { -1 };

        // Ring spans [-(m+1), length + m + 1] along the axis and ±(m+1)
        // across it; keep one free cell between ring and border.
        let pad = m + 2;
        let (along_len, across_len) = if vertical {
            (self.height as i32, self.width as i32)
        } else {
            (self.width as i32, self.height as i32)
        };
        let along = if dir > 0 {
            rng.random_range(pad..along_len - pad - length)
        } else {
            rng.random_range(pad + length..along_len - pad)
        };
        let across = rng.random_range(pad..across_len - pad);
        let at = |offset: i32| {
            let a = along + dir * offset;
            if vertical {
                Cell::new(across, a)
            } else {
                Cell::new(a, across)
            }
        };
        let goal = at(0);
        // People face the front of the queue.
        let facing = match (vertical, dir > 0) {
            (true, true) => Heading::S,
            (true, false) => Heading::N,
            (false, true) => Heading::W,
            (false, false) => Heading::E,
        };
        let mut offset = 0;
        let people = spacing
            .iter()
            .map(|s| {
                offset += s;
                let c = at(offset);
                Person::new(c.x, c.y, facing)
            })
            .collect();
        let map = GridMap::new(self.width, self.height, self.resolution)?;
        let mut s = QueueScenario::with_margin(map, goal, people, m as u32, StartSpec::Random)?;
        let outside = s.outside_mask();
        let candidates: Vec<Cell> = s
            .map
            .free_cells()
            .filter(|c| outside[s.map.index(*c)] && !s.virtual_obstacles.contains(c))
            .collect();
        let c = candidates[rng.random_range(0..candidates.len())];
        s.start = StartSpec::Fixed(Pose::at(c, Heading::ALL[rng.random_range(0..4)]));
        Ok(s)
    }
}

/// `count` continuous-like scenarios from `seed`.
pub fn continuous_like(seed: u64, count: usize) -> Result<Vec<QueueScenario>> {
    continuous_like_with(&ContinuousLike::default(), seed, count)
}

pub fn continuous_like_with(params: &ContinuousLike, seed: u64, count: usize) -> Result<Vec<QueueScenario>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| params.sample(&mut rng)).collect()
}

/// A map with static obstacles at the given density plus a free start pose
/// and goal cell, not necessarily connected.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomMap {
    pub map: GridMap,
    pub start: Pose,
    pub goal: Cell,
}

pub fn random_obstacle_map(seed: u64, width: u32, height: u32, density: f64) -> Result<RandomMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut map = GridMap::open(width, height)?;
    let target = (f64::from(width * height) * density).round() as usize;
    let mut placed = 0;
    while placed < target {
        let c = Cell::new(rng.random_range(0..width as i32), rng.random_range(0..height as i32));
        if !map.is_obstacle(c) {
            map.set_obstacle(c)?;
            placed += 1;
        }
    }
    let free: Vec<Cell> = map.free_cells().collect();
    let start = free[rng.random_range(0..free.len())];
    let goal = loop {
        let g = free[rng.random_range(0..free.len())];
        if g != start {
            break g;
        }
    };
    Ok(RandomMap {
        map,
        start: Pose::at(start, Heading::ALL[rng.random_range(0..4)]),
        goal,
    })
}
