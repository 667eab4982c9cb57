//! Queue scenarios: goal, queued people, and the virtual-obstacle ring that
//! encodes the "do not cut the queue" norm.

use std::collections::{BTreeSet, VecDeque};

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{Action, Cell, GridMap, Heading, Pose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Person {
    pub x: i32,
    pub y: i32,
    pub facing: Heading,
}

impl Person {
    pub const fn new(x: i32, y: i32, facing: Heading) -> Self {
        Person { x, y, facing }
    }

    pub fn cell(&self) -> Cell {
        Cell::new(self.x, self.y)
    }
}

/// The social layout visible to the planner: goal and people, nothing else.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub goal: Cell,
    /// Front of the queue first.
    pub people: Vec<Person>,
}

impl Scene {
    pub fn translated(&self, dx: i32, dy: i32) -> Scene {
        Scene {
            goal: self.goal.offset(dx, dy),
            people: self
                .people
                .iter()
                .map(|p| Person::new(p.x + dx, p.y + dy, p.facing))
                .collect(),
        }
    }

    /// Chebyshev distance from `c` to the nearest of goal and people.
    pub fn chebyshev_to_nearest(&self, c: Cell) -> u32 {
        self.people
            .iter()
            .map(|p| p.cell().chebyshev(c))
            .fold(self.goal.chebyshev(c), u32::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartSpec {
    Fixed(Pose),
    /// Uniform over free cells (excluding the goal) and headings.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueueScenario {
    pub map: GridMap,
    pub scene: Scene,
    pub virtual_obstacles: BTreeSet<Cell>,
    pub opening: BTreeSet<Cell>,
    /// Set when the ring was generated from a margin rather than listed.
    pub margin: Option<u32>,
    pub start: StartSpec,
}

impl QueueScenario {
    /// Scenario whose ring is built from `margin`.
    pub fn with_margin(
        map: GridMap,
        goal: Cell,
        people: Vec<Person>,
        margin: u32,
        start: StartSpec,
    ) -> Result<Self> {
        let (virtual_obstacles, opening) = build_virtual_obstacles(goal, &people, margin)?;
        QueueScenario::new(
            map,
            Scene { goal, people },
            virtual_obstacles,
            opening,
            Some(margin),
            start,
        )
    }

    pub fn new(
        map: GridMap,
        scene: Scene,
        virtual_obstacles: BTreeSet<Cell>,
        opening: BTreeSet<Cell>,
        margin: Option<u32>,
        start: StartSpec,
    ) -> Result<Self> {
        let s = QueueScenario {
            map,
            scene,
            virtual_obstacles,
            opening,
            margin,
            start,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn goal(&self) -> Cell {
        self.scene.goal
    }

    pub fn people(&self) -> &[Person] {
        &self.scene.people
    }

    pub fn validate(&self) -> Result<()> {
        let map = &self.map;
        let (w, h) = (map.width(), map.height());
        let goal = self.scene.goal;
        if !map.is_free(goal) {
            return Err(Error::InvalidScenario(format!(
                "goal {goal} is out of bounds or blocked"
            )));
        }
        if self.scene.people.is_empty() {
            return Err(Error::InvalidScenario("at least one person is required".into()));
        }
        let mut seen = BTreeSet::new();
        for p in &self.scene.people {
            let c = p.cell();
            if !map.in_bounds(c) {
                return Err(Error::OutOfBounds(c, w, h));
            }
            if c == goal {
                return Err(Error::InvalidScenario(format!("person at {c} stands on the goal")));
            }
            if !seen.insert(c) {
                return Err(Error::InvalidScenario(format!("two people share cell {c}")));
            }
        }
        for c in self.virtual_obstacles.iter().chain(&self.opening) {
            if !map.in_bounds(*c) {
                return Err(Error::OutOfBounds(*c, w, h));
            }
        }
        if self.virtual_obstacles.contains(&goal) || seen.iter().any(|c| self.virtual_obstacles.contains(c)) {
            return Err(Error::InvalidScenario(
                "virtual obstacles overlap the goal or a person".into(),
            ));
        }
        if let Some(c) = self.opening.intersection(&self.virtual_obstacles).next() {
            return Err(Error::InvalidScenario(format!(
                "cell {c} is both an opening and a virtual obstacle"
            )));
        }
        let outside = self.outside_mask();
        if outside[map.index(goal)] || seen.iter().any(|c| outside[map.index(*c)]) {
            return Err(Error::InvalidScenario(
                "virtual obstacles and opening do not enclose goal and people".into(),
            ));
        }
        if let StartSpec::Fixed(p) = self.start {
            map.validate_pose(p)?;
        }
        Ok(())
    }

    pub fn is_virtual_obstacle(&self, c: Cell) -> bool {
        self.virtual_obstacles.contains(&c)
    }

    /// True when the transition enters a virtual-obstacle cell by moving.
    pub fn is_crossing(&self, before: Pose, action: Action, after: Pose) -> bool {
        action.is_move() && after.cell() != before.cell() && self.is_virtual_obstacle(after.cell())
    }

    /// Cells reachable from beyond the map border without stepping on a ring
    /// or opening cell (4-connected). Static obstacles are ignored.
    pub fn outside_mask(&self) -> Vec<bool> {
        let walls: BTreeSet<Cell> = self.virtual_obstacles.union(&self.opening).copied().collect();
        flood_outside(&self.map, &walls)
    }

    /// Cells enclosed by the ring (interior), ring and opening excluded.
    pub fn inside_mask(&self) -> Vec<bool> {
        let outside = self.outside_mask();
        (0..self.map.cell_count())
            .map(|i| {
                let c = self.map.cell_at(i);
                !outside[i] && !self.virtual_obstacles.contains(&c) && !self.opening.contains(&c)
            })
            .collect()
    }

    /// Draw a start pose according to `start`, or uniformly when random.
    pub fn sample_start<R: Rng + ?Sized>(&self, rng: &mut R) -> Pose {
        match self.start {
            StartSpec::Fixed(p) => p,
            StartSpec::Random => self.sample_uniform_start(rng),
        }
    }

    pub fn sample_uniform_start<R: Rng + ?Sized>(&self, rng: &mut R) -> Pose {
        let goal = self.scene.goal;
        loop {
            let x = rng.random_range(0..self.map.width() as i32);
            let y = rng.random_range(0..self.map.height() as i32);
            let heading = Heading::ALL[rng.random_range(0..4)];
            let c = Cell::new(x, y);
            if c != goal && self.map.is_free(c) {
                return Pose::at(c, heading);
            }
        }
    }

    /// Count of crossings along a pose/action path.
    pub fn count_crossings(&self, poses: &[Pose], actions: &[Action]) -> usize {
        poses
            .windows(2)
            .zip(actions)
            .filter(|(w, a)| self.is_crossing(w[0], **a, w[1]))
            .count()
    }

    /// True if every transition from outside the ring into a non-outside cell
    /// lands on an opening cell.
    pub fn enters_only_through_opening(&self, poses: &[Pose]) -> bool {
        let outside = self.outside_mask();
        poses.windows(2).all(|w| {
            let (a, b) = (w[0].cell(), w[1].cell());
            if a == b {
                return true;
            }
            let from_outside = outside[self.map.index(a)];
            let to_outside = outside[self.map.index(b)];
            !(from_outside && !to_outside) || self.opening.contains(&b)
        })
    }
}

fn flood_outside(map: &GridMap, walls: &BTreeSet<Cell>) -> Vec<bool> {
    let (w, h) = (map.width() as i32, map.height() as i32);
    let mut seen = vec![false; map.cell_count()];
    let mut queue = VecDeque::new();
    // Seed with every border cell that is not a wall: the padding ring just
    // outside the map is implicitly connected to all of them.
    for c in map.cells() {
        if (c.x == 0 || c.y == 0 || c.x == w - 1 || c.y == h - 1) && !walls.contains(&c) {
            let i = map.index(c);
            if !seen[i] {
                seen[i] = true;
                queue.push_back(c);
            }
        }
    }
    while let Some(c) = queue.pop_front() {
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let n = c.offset(dx, dy);
            if map.in_bounds(n) && !walls.contains(&n) {
                let i = map.index(n);
                if !seen[i] {
                    seen[i] = true;
                    queue.push_back(n);
                }
            }
        }
    }
    seen
}

/// Build the virtual-obstacle ring around a straight queue and its entry gap.
///
/// The bounding box of goal and people is inflated by `margin`; the ring is
/// the one-cell border just outside the inflated box. The opening is the
/// `2 * margin + 1` cells of that border beyond the last person, centred on
/// the queue axis.
pub fn build_virtual_obstacles(
    goal: Cell,
    people: &[Person],
    margin: u32,
) -> Result<(BTreeSet<Cell>, BTreeSet<Cell>)> {
    if margin == 0 {
        return Err(Error::InvalidConfig("margin must be at least 1 cell".into()));
    }
    let last = people
        .last()
        .ok_or_else(|| Error::InvalidScenario("at least one person is required".into()))?
        .cell();
    let vertical = people.iter().all(|p| p.x == goal.x);
    let horizontal = people.iter().all(|p| p.y == goal.y);
    if vertical == horizontal {
        // Both only when a person sits on the goal; neither when off-axis.
        return Err(Error::NotCollinear);
    }
    let sign = |v: i32| v.signum();
    let dir = if vertical { sign(last.y - goal.y) } else { sign(last.x - goal.x) };
    let same_side = people.iter().all(|p| {
        let d = if vertical { p.y - goal.y } else { p.x - goal.x };
        sign(d) == dir
    });
    if !same_side {
        return Err(Error::NotCollinear);
    }

    let m = margin as i32;
    let cells = people.iter().map(|p| p.cell()).chain(std::iter::once(goal));
    let (mut x0, mut x1, mut y0, mut y1) = (goal.x, goal.x, goal.y, goal.y);
    for c in cells {
        x0 = x0.min(c.x);
        x1 = x1.max(c.x);
        y0 = y0.min(c.y);
        y1 = y1.max(c.y);
    }
    let (rx0, rx1, ry0, ry1) = (x0 - m - 1, x1 + m + 1, y0 - m - 1, y1 + m + 1);

    let mut ring = BTreeSet::new();
    for x in rx0..=rx1 {
        ring.insert(Cell::new(x, ry0));
        ring.insert(Cell::new(x, ry1));
    }
    for y in ry0..=ry1 {
        ring.insert(Cell::new(rx0, y));
        ring.insert(Cell::new(rx1, y));
    }

    let opening: BTreeSet<Cell> = if vertical {
        let y = if dir > 0 { ry1 } else { ry0 };
        (goal.x - m..=goal.x + m).map(|x| Cell::new(x, y)).collect()
    } else {
        let x = if dir > 0 { rx1 } else { rx0 };
        (goal.y - m..=goal.y + m).map(|y| Cell::new(x, y)).collect()
    };
    for c in &opening {
        ring.remove(c);
    }
    Ok((ring, opening))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_people() -> Vec<Person> {
        vec![Person::new(15, 17, Heading::S), Person::new(15, 19, Heading::S)]
    }

    #[test]
    fn demo_ring_matches_hand_enumeration() {
        let (ring, opening) = build_virtual_obstacles(Cell::new(15, 15), &demo_people(), 1).unwrap();
        let expected_opening: BTreeSet<Cell> =
            [Cell::new(14, 21), Cell::new(15, 21), Cell::new(16, 21)].into_iter().collect();
        assert_eq!(opening, expected_opening);

        // Perimeter of [13,17] x [13,21]: 2*5 + 2*9 - 4 = 24 cells, minus 3 opened.
        let mut expected = BTreeSet::new();
        for x in 13..=17 {
            expected.insert(Cell::new(x, 13));
            expected.insert(Cell::new(x, 21));
        }
        for y in 13..=21 {
            expected.insert(Cell::new(13, y));
            expected.insert(Cell::new(17, y));
        }
        for c in &expected_opening {
            expected.remove(c);
        }
        assert_eq!(ring.len(), 21);
        assert_eq!(ring, expected);
    }

    #[test]
    fn single_adjacent_person_gets_three_cell_opening() {
        let people = [Person::new(15, 16, Heading::S)];
        let (ring, opening) = build_virtual_obstacles(Cell::new(15, 15), &people, 1).unwrap();
        let expected: BTreeSet<Cell> =
            [Cell::new(14, 18), Cell::new(15, 18), Cell::new(16, 18)].into_iter().collect();
        assert_eq!(opening, expected);
        assert!(ring.contains(&Cell::new(13, 18)) && ring.contains(&Cell::new(17, 18)));
        assert!(ring.contains(&Cell::new(15, 13)));
    }

    #[test]
    fn horizontal_queue_opens_westward() {
        let people = [Person::new(12, 5, Heading::E), Person::new(10, 5, Heading::E)];
        let (ring, opening) = build_virtual_obstacles(Cell::new(14, 5), &people, 2).unwrap();
        assert_eq!(opening.len(), 5);
        assert!(opening.iter().all(|c| c.x == 7 && (3..=7).contains(&c.y)));
        assert!(ring.iter().all(|c| c.x == 7 || c.x == 17 || c.y == 2 || c.y == 8));
    }

    #[test]
    fn zero_margin_rejected() {
        assert!(build_virtual_obstacles(Cell::new(15, 15), &demo_people(), 0).is_err());
    }

    #[test]
    fn off_axis_people_rejected() {
        let people = [Person::new(16, 17, Heading::S)];
        assert!(matches!(
            build_virtual_obstacles(Cell::new(15, 15), &people, 1),
            Err(Error::NotCollinear)
        ));
        let split = [Person::new(15, 17, Heading::S), Person::new(15, 13, Heading::N)];
        assert!(build_virtual_obstacles(Cell::new(15, 15), &split, 1).is_err());
    }

    #[test]
    fn ring_encloses_goal_and_people() {
        let s = QueueScenario::with_margin(
            GridMap::open(30, 30).unwrap(),
            Cell::new(15, 15),
            demo_people(),
            1,
            StartSpec::Random,
        )
        .unwrap();
        let outside = s.outside_mask();
        assert!(!outside[s.map.index(Cell::new(15, 15))]);
        assert!(outside[s.map.index(Cell::new(0, 0))]);
        assert!(outside[s.map.index(Cell::new(15, 22))]);
        let inside = s.inside_mask();
        assert_eq!(inside.iter().filter(|b| **b).count(), 3 * 7);
    }

    #[test]
    fn broken_ring_rejected() {
        let (mut ring, opening) =
            build_virtual_obstacles(Cell::new(15, 15), &demo_people(), 1).unwrap();
        ring.remove(&Cell::new(13, 16));
        let err = QueueScenario::new(
            GridMap::open(30, 30).unwrap(),
            Scene { goal: Cell::new(15, 15), people: demo_people() },
            ring,
            opening,
            None,
            StartSpec::Random,
        );
        assert!(err.is_err());
    }

    #[test]
    fn crossing_requires_moving_into_ring() {
        let s = QueueScenario::with_margin(
            GridMap::open(30, 30).unwrap(),
            Cell::new(15, 15),
            demo_people(),
            1,
            StartSpec::Random,
        )
        .unwrap();
        let before = Pose::new(15, 12, Heading::N);
        let after = Pose::new(15, 13, Heading::N);
        assert!(s.is_crossing(before, Action::Forward, after));
        assert!(!s.is_crossing(after, Action::TurnLeft, Pose::new(15, 13, Heading::W)));
        // Entering through the opening is not a crossing.
        assert!(!s.is_crossing(Pose::new(15, 22, Heading::S), Action::Forward, Pose::new(15, 21, Heading::S)));
    }
}
