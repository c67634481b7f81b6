use thiserror::Error;

/// Errors produced by construction, evaluation and solve paths.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("gamma pole: x = {0} is a nonpositive integer")]
    GammaPole(f64),

    #[error("group index {index} out of range 1..={m}")]
    GroupIndex { index: usize, m: usize },

    #[error("group dimension {0} unsupported by the quadrature (only 1 and 2)")]
    UnsupportedGroupDim(usize),

    #[error("fractional path requires s in (0,1), got {0}; use the classical path for s = 1")]
    FractionalOrder(f64),

    #[error("field has neither a finite sup bound nor exterior constancy; far tail cannot be controlled")]
    UncontrolledTail,

    #[error("interior node count {got} exceeds the dense-assembly cap {cap}")]
    NodeCapExceeded { got: usize, cap: usize },

    #[error("assembled system is singular")]
    SingularSystem,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
