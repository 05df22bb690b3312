use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("n = {n} exceeds the exhaustive cap of {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("ball position {pos} out of range for a composition of {n}")]
    PositionOutOfRange { pos: usize, n: usize },

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("law supports n <= {have}, requested {need}")]
    MatrixTooSmall { need: usize, have: usize },

    #[error("row {row} of {matrix} is not a probability vector (sum {sum})")]
    UnnormalizedRow {
        matrix: &'static str,
        row: usize,
        sum: String,
    },

    #[error("potential function vanishes at {0}")]
    ZeroPotential(usize),

    #[error("reconstruction infeasible: {0}")]
    Infeasible(String),

    #[error("{0} needs float mode")]
    RequiresFloat(&'static str),

    #[error("uniform point {0} fell in the unresolved residual of a static partition")]
    ResidualHit(f64),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("integral does not converge: {0}")]
    Divergent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
