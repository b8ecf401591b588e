use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operation requires nonzero curvature but the point is on a flat piece")]
    FlatPoint,
    #[error("zero tangent vector")]
    ZeroVector,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("singular step: {0}")]
    SingularStep(String),
}

pub type Result<T> = std::result::Result<T, Error>;
