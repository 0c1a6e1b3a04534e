use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("depth budget exceeded at level {level}")]
    DepthExceeded { level: u32 },
    #[error("level mismatch: {left} vs {right}")]
    LevelMismatch { left: u32, right: u32 },
    #[error("slot period mismatch: {left} vs {right}")]
    PeriodMismatch { left: usize, right: usize },
    #[error("ciphertext space mismatch: expected {expected}, got {actual}")]
    SpaceMismatch { expected: &'static str, actual: &'static str },
    #[error("no rotation key for a left rotation by {0} slots")]
    MissingRotationKey(usize),
    #[error("{len} values do not fit the slot layout ({slots} slots, power-of-two period)")]
    TooManySlots { len: usize, slots: usize },
    #[error("value {index} is not finite")]
    NonFinite { index: usize },
    #[error("encoded coefficient overflows the modulus")]
    Overflow,
    #[error("expected {expected} partial decryptions, got {actual}")]
    MissingShare { expected: usize, actual: usize },
    #[error("duplicate partial decryption from party {0}")]
    DuplicateParty(usize),
    #[error("party {party} out of range for {parties} parties")]
    PartyOutOfRange { party: usize, parties: usize },
    #[error("partial decryption belongs to another decryption session")]
    SessionMismatch,
    #[error("decode error at byte offset {offset}: {reason}")]
    Decode { offset: usize, reason: String },
    #[error("operation not supported by this backend: {0}")]
    Unsupported(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
