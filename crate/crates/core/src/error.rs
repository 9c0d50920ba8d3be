use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Requested vibrational level is above the highest bound state.
    #[error("state index {n} exceeds the highest bound state {n_max}")]
    Index { n: usize, n_max: usize },

    /// The effective potential has no local minimum for this j.
    #[error("no potential minimum for j = {j}")]
    NoRoot { j: u32 },

    /// The model is outside its range of validity for this j.
    #[error("model invalid for j = {j}: {reason}")]
    ModelValidity { j: u32, reason: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{p}/{q} is not in lowest terms")]
    NotCoprime { p: u64, q: u64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The momentum axis reaches beyond what the position sampling resolves.
    #[error("momentum {p_max:.4} exceeds the sampling limit {limit:.4}")]
    Resolution { p_max: f64, limit: f64 },

    /// Fewer interference tiles than requested were found.
    #[error("found {found} interference tiles, need {needed}")]
    NoTile { found: usize, needed: usize },

    #[error("fit degenerate: {0}")]
    FitDegenerate(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    ModelValidity,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Domain(_)
            | Error::Index { .. }
            | Error::NotCoprime { .. }
            | Error::GridMismatch(_)
            | Error::Parse(_)
            | Error::Io(_) => ErrorKind::Config,
            Error::NoRoot { .. } | Error::ModelValidity { .. } => ErrorKind::ModelValidity,
            Error::Degenerate(_)
            | Error::Resolution { .. }
            | Error::NoTile { .. }
            | Error::FitDegenerate(_) => ErrorKind::Numerical,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
