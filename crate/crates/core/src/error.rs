use thiserror::Error;

/// Errors produced by the simulation, segmentation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("infeasible segmentation: {segments} segments of length >= {min_len} do not fit in {len} samples")]
    Infeasible {
        segments: usize,
        min_len: usize,
        len: usize,
    },

    #[error("search space of {placements} placements exceeds the limit of {limit}")]
    SearchTooLarge { placements: u128, limit: u128 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("degenerate data: {0}")]
    Degenerate(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
