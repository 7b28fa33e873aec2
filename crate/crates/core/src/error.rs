use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tangent pole at x = {x}")]
    TangentPole { x: f64 },

    #[error("trend value overflowed at x = {x}")]
    Overflow { x: f64 },

    #[error("no bounded variant found after {attempts} draws")]
    UnboundedVariant { attempts: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("all selection scores are zero")]
    DegenerateScores,

    #[error("population has {available} distinct root ancestors, {required} required")]
    InsufficientDiversity { available: usize, required: usize },

    #[error("kernel matrix is not positive definite")]
    SingularKernel,

    #[error("non-finite prediction at x = {x}")]
    NonFinitePrediction { x: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
