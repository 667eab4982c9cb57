//! Grid map, oriented agent pose and the deterministic transition function.
//!
//! Axis convention: `x` grows to the east, `y` grows to the north. Headings
//! are the four compass directions; turning left rotates by +90 degrees.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Integer cell coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Cell { x, y }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Cell::new(self.x + dx, self.y + dy)
    }

    pub fn manhattan(self, other: Cell) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    pub fn chebyshev(self, other: Cell) -> u32 {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Heading {
    N,
    E,
    S,
    W,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::N, Heading::E, Heading::S, Heading::W];

    /// Unit step along the heading.
    pub fn delta(self) -> (i32, i32) {
        match self {
            Heading::N => (0, 1),
            Heading::E => (1, 0),
            Heading::S => (0, -1),
            Heading::W => (-1, 0),
        }
    }

    /// Angle in radians. South is stored as -pi/2 (equivalent to 270 degrees)
    /// so that bearings along the axes come out exact.
    pub fn angle(self) -> f64 {
        match self {
            Heading::E => 0.0,
            Heading::N => FRAC_PI_2,
            Heading::W => PI,
            Heading::S => -FRAC_PI_2,
        }
    }

    pub fn degrees(self) -> u32 {
        match self {
            Heading::E => 0,
            Heading::N => 90,
            Heading::W => 180,
            Heading::S => 270,
        }
    }

    pub fn left(self) -> Heading {
        match self {
            Heading::N => Heading::W,
            Heading::W => Heading::S,
            Heading::S => Heading::E,
            Heading::E => Heading::N,
        }
    }

    pub fn right(self) -> Heading {
        match self {
            Heading::N => Heading::E,
            Heading::E => Heading::S,
            Heading::S => Heading::W,
            Heading::W => Heading::N,
        }
    }

    pub fn opposite(self) -> Heading {
        self.left().left()
    }

    pub fn index(self) -> usize {
        match self {
            Heading::N => 0,
            Heading::E => 1,
            Heading::S => 2,
            Heading::W => 3,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Heading::N => 'N',
            Heading::E => 'E',
            Heading::S => 'S',
            Heading::W => 'W',
        }
    }
}

impl fmt::Display for Heading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Heading {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "N" | "n" => Ok(Heading::N),
            "E" | "e" => Ok(Heading::E),
            "S" | "s" => Ok(Heading::S),
            "W" | "w" => Ok(Heading::W),
            other => Err(format!("unknown heading `{other}` (expected N, E, S or W)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pose {
    pub x: i32,
    pub y: i32,
    pub heading: Heading,
}

impl Pose {
    pub const fn new(x: i32, y: i32, heading: Heading) -> Self {
        Pose { x, y, heading }
    }

    pub fn cell(self) -> Cell {
        Cell::new(self.x, self.y)
    }

    pub fn at(cell: Cell, heading: Heading) -> Self {
        Pose::new(cell.x, cell.y, heading)
    }
}

impl fmt::Display for Pose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.heading)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Forward,
    Backward,
    TurnLeft,
    TurnRight,
}

impl Action {
    pub const ALL: [Action; 4] = [
        Action::Forward,
        Action::Backward,
        Action::TurnLeft,
        Action::TurnRight,
    ];
    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        match self {
            Action::Forward => 0,
            Action::Backward => 1,
            Action::TurnLeft => 2,
            Action::TurnRight => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Action::ALL.get(i).copied()
    }

    pub fn is_move(self) -> bool {
        matches!(self, Action::Forward | Action::Backward)
    }

    pub fn code(self) -> char {
        match self {
            Action::Forward => 'F',
            Action::Backward => 'B',
            Action::TurnLeft => 'L',
            Action::TurnRight => 'R',
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "F" => Ok(Action::Forward),
            "B" => Ok(Action::Backward),
            "L" => Ok(Action::TurnLeft),
            "R" => Ok(Action::TurnRight),
            other => Err(format!("unknown action `{other}`")),
        }
    }
}

pub const DEFAULT_RESOLUTION: f64 = 0.2;

/// Occupancy grid with static obstacles.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: u32,
    height: u32,
    resolution: f64,
    blocked: Vec<bool>,
}

impl GridMap {
    pub fn new(width: u32, height: u32, resolution: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidGrid(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "resolution must be positive, got {resolution}"
            )));
        }
        Ok(GridMap {
            width,
            height,
            resolution,
            blocked: vec![false; width as usize * height as usize],
        })
    }

    pub fn open(width: u32, height: u32) -> Result<Self> {
        GridMap::new(width, height, DEFAULT_RESOLUTION)
    }

    pub fn with_obstacles(
        width: u32,
        height: u32,
        resolution: f64,
        obstacles: impl IntoIterator<Item = Cell>,
    ) -> Result<Self> {
        let mut map = GridMap::new(width, height, resolution)?;
        for c in obstacles {
            map.set_obstacle(c)?;
        }
        Ok(map)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn cell_count(&self) -> usize {
        self.blocked.len()
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as u32) < self.width && (c.y as u32) < self.height
    }

    /// Row-major index of an in-bounds cell.
    pub fn index(&self, c: Cell) -> usize {
        debug_assert!(self.in_bounds(c));
        c.y as usize * self.width as usize + c.x as usize
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        let w = self.width as usize;
        Cell::new((index % w) as i32, (index / w) as i32)
    }

    pub fn set_obstacle(&mut self, c: Cell) -> Result<()> {
        if !self.in_bounds(c) {
            return Err(Error::OutOfBounds(c, self.width, self.height));
        }
        let i = self.index(c);
        self.blocked[i] = true;
        Ok(())
    }

    pub fn is_obstacle(&self, c: Cell) -> bool {
        self.in_bounds(c) && self.blocked[self.index(c)]
    }

    /// In bounds and not a static obstacle.
    pub fn is_free(&self, c: Cell) -> bool {
        self.in_bounds(c) && !self.blocked[self.index(c)]
    }

    pub fn obstacles(&self) -> BTreeSet<Cell> {
        self.blocked
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| self.cell_at(i))
            .collect()
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height as i32).flat_map(move |y| (0..self.width as i32).map(move |x| Cell::new(x, y)))
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells().filter(move |c| self.is_free(*c))
    }

    pub fn validate_pose(&self, pose: Pose) -> Result<()> {
        if self.is_free(pose.cell()) {
            Ok(())
        } else {
            Err(Error::InvalidPose(pose))
        }
    }

    /// Dense index over all poses (cells x 4 headings).
    pub fn pose_index(&self, pose: Pose) -> usize {
        self.index(pose.cell()) * 4 + pose.heading.index()
    }

    pub fn pose_count(&self) -> usize {
        self.cell_count() * 4
    }

    pub fn pose_at(&self, index: usize) -> Pose {
        Pose::at(self.cell_at(index / 4), Heading::ALL[index % 4])
    }
}

/// Transition function without validation. Blocked moves are no-ops.
pub fn step_unchecked(map: &GridMap, pose: Pose, action: Action) -> Pose {
    match action {
        Action::TurnLeft => Pose { heading: pose.heading.left(), ..pose },
        Action::TurnRight => Pose { heading: pose.heading.right(), ..pose },
        Action::Forward | Action::Backward => {
            let dir = if action == Action::Forward {
                pose.heading
            } else {
                pose.heading.opposite()
            };
            let (dx, dy) = dir.delta();
            let next = pose.cell().offset(dx, dy);
            if map.is_free(next) {
                Pose::at(next, pose.heading)
            } else {
                pose
            }
        }
    }
}

pub fn step(map: &GridMap, pose: Pose, action: Action) -> Result<Pose> {
    map.validate_pose(pose)?;
    Ok(step_unchecked(map, pose, action))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open() -> GridMap {
        GridMap::open(30, 30).unwrap()
    }

    #[test]
    fn forward_moves_north() {
        let p = step(&open(), Pose::new(5, 5, Heading::N), Action::Forward).unwrap();
        assert_eq!(p, Pose::new(5, 6, Heading::N));
    }

    #[test]
    fn turn_left_from_north_faces_west() {
        let p = step(&open(), Pose::new(5, 5, Heading::N), Action::TurnLeft).unwrap();
        assert_eq!(p, Pose::new(5, 5, Heading::W));
    }

    #[test]
    fn boundary_blocks_forward() {
        let p = step(&open(), Pose::new(0, 0, Heading::S), Action::Forward).unwrap();
        assert_eq!(p, Pose::new(0, 0, Heading::S));
    }

    #[test]
    fn backward_keeps_heading() {
        let p = step(&open(), Pose::new(5, 5, Heading::E), Action::Backward).unwrap();
        assert_eq!(p, Pose::new(4, 5, Heading::E));
    }

    #[test]
    fn static_obstacle_blocks() {
        let map = GridMap::with_obstacles(10, 10, 0.2, [Cell::new(5, 6)]).unwrap();
        let p = step(&map, Pose::new(5, 5, Heading::N), Action::Forward).unwrap();
        assert_eq!(p, Pose::new(5, 5, Heading::N));
    }

    #[test]
    fn invalid_pose_rejected() {
        let map = GridMap::with_obstacles(10, 10, 0.2, [Cell::new(5, 5)]).unwrap();
        assert!(step(&map, Pose::new(5, 5, Heading::N), Action::Forward).is_err());
        assert!(step(&map, Pose::new(-1, 0, Heading::N), Action::Forward).is_err());
        assert!(step(&map, Pose::new(10, 0, Heading::N), Action::Forward).is_err());
    }

    #[test]
    fn turn_right_inverts_turn_left() {
        for h in Heading::ALL {
            assert_eq!(h.left().right(), h);
            assert_eq!(h.left().left().left().left(), h);
            assert_eq!((h.left().degrees() + 360 - h.degrees()) % 360, 90);
        }
    }

    #[test]
    fn grid_rejects_degenerate_dimensions() {
        assert!(GridMap::new(0, 3, 0.2).is_err());
        assert!(GridMap::new(3, 3, 0.0).is_err());
        assert!(GridMap::with_obstacles(3, 3, 0.2, [Cell::new(3, 0)]).is_err());
    }

    #[test]
    fn pose_index_roundtrip() {
        let map = open();
        for i in 0..map.pose_count() {
            assert_eq!(map.pose_index(map.pose_at(i)), i);
        }
    }
}
