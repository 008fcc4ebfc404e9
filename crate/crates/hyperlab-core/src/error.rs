//! Error type shared by all core modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid point: edge {edge} {reason}")]
    InvalidPoint { edge: usize, reason: String },

    #[error("invalid mask: {0}")]
    InvalidMask(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("empty set: the hyperspace excludes the empty set")]
    EmptySet,

    #[error("type error: {0}")]
    TypeError(String),

    #[error("witness refused: {0}")]
    WitnessRefused(String),

    #[error("not a homeomorphism: {0}")]
    NotHomeomorphism(String),
}
