use crate::geometry::Point2;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("edit references missing {0}")]
    MissingElement(String),
    #[error("unsupported window: {0}")]
    UnsupportedWindow(String),
    #[error("infeasible world: {0}")]
    InfeasibleWorld(String),
    #[error("pose ({}, {}) lies in occupied space", .0.x, .0.y)]
    PoseOccupied(Point2),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
