use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid constellation order {0}: must be a perfect square >= 4")]
    InvalidOrder(u32),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid signal state: {0}")]
    State(&'static str),

    #[error("grid of {points} points exceeds the cap of {cap}")]
    Resource { points: usize, cap: usize },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("mainlobe region covers the whole grid; no sidelobe points")]
    RegionCoversGrid,

    #[error("mainlobe energy is zero")]
    DegenerateGrid,

    #[error("Rice density undefined for sigma2 = 0 (point mass)")]
    DegenerateDistribution,

    #[error("usage: {0}")]
    Usage(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }

    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Resource { .. } => 3,
            Error::Io { .. } | Error::Serialize(_) => 4,
            _ => 2,
        }
    }
}
