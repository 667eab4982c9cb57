use std::path::PathBuf;

use crate::grid::{Cell, Pose};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("pose {0} is out of bounds or on a static obstacle")]
    InvalidPose(Pose),

    #[error("cell {0} is outside the {1}x{2} grid")]
    OutOfBounds(Cell, u32, u32),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("people are not collinear with the goal along one axis")]
    NotCollinear,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("model format: {0}")]
    Model(String),

    #[error("no path from {start} to goal {goal} ({expanded} nodes expanded)")]
    NoPath {
        start: Pose,
        goal: Cell,
        expanded: usize,
    },

    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
