use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Fhe(#[from] ofl_thfhe::Error),
    #[error("transform size {0} is not a power of two of at least 2")]
    BadSize(usize),
    #[error("plan size {plan} does not match ciphertext period {period}")]
    PlanMismatch { plan: usize, period: usize },
    #[error("transform needs {needed} levels above the floor but the ciphertext is at level {available}")]
    InsufficientLevels { needed: u32, available: u32 },
    #[error("no rotation key for a left shift of {0}")]
    MissingRotation(usize),
    #[error("got {left} values on one side and {right} on the other")]
    LengthMismatch { left: usize, right: usize },
    #[error("no leader ciphertexts to aggregate")]
    NoLeaders,
    #[error("parties {missing:?} returned no partial decryption")]
    Dropout { missing: Vec<usize> },
    #[error("audit log: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
