use thiserror::Error;

/// Errors raised by the plaintext side of the protocol.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("model length must be a positive power of two, got {0}")]
    BadLength(usize),
    #[error("parameter at index {index} is not finite")]
    NonFinite { index: usize },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("decode error at byte offset {offset}: {reason}")]
    Decode { offset: usize, reason: String },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("status report for client {client} at round {round} is not after round {last}")]
    OutOfOrderReport { client: usize, round: u64, last: u64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
