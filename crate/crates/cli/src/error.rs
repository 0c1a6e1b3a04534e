use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Bad or missing configuration; the message names the offending key.
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot compare runs: {0}")]
    Mismatch(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {reason}")]
    Parse { path: PathBuf, reason: String },
    #[error(transparent)]
    Sim(ofl_sim::Error),
    #[error("replay differs from the manifest: {0}")]
    Replay(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Mismatch(_) => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Error::Io { path, source }
    }
}

impl From<ofl_sim::Error> for Error {
    fn from(e: ofl_sim::Error) -> Self {
        match e {
            ofl_sim::Error::Config { key, reason } => Error::Config(format!("`{key}` {reason}")),
            other => Error::Sim(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
