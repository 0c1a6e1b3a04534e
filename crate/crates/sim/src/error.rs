use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config `{key}`: {reason}")]
    Config { key: &'static str, reason: String },
    #[error(transparent)]
    Core(#[from] ofl_core::Error),
    #[error(transparent)]
    Aggregation(#[from] ofl_secureagg::Error),
    #[error(transparent)]
    Fhe(#[from] ofl_thfhe::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config(key: &'static str, reason: impl Into<String>) -> Error {
    Error::Config { key, reason: reason.into() }
}
