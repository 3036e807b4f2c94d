use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A lattice parameter violates one of the standing assumptions.
    #[error("infeasible lattice parameters: {0}")]
    Parameter(String),

    /// A point handed to a geometric routine is not a point of the state space.
    #[error("point outside the state space: {0}")]
    Domain(String),

    #[error("invalid start vertex {0}")]
    InvalidStart(String),

    #[error("invalid path operation: {0}")]
    Path(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
