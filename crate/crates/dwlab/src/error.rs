use std::path::PathBuf;
use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum DwError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("admissibility violated: {0}")]
    Admissibility(String),

    #[error("spectral data corrupted: {0}")]
    CorruptSpectral(String),

    #[error("solution became non-finite at t = {t}")]
    Instability { t: f64 },

    #[error("Picard iteration did not converge within {max_iter} iterates (last diff {last_diff:.3e})")]
    NonConvergence { max_iter: usize, last_diff: f64 },

    #[error("initial data support (radius {radius}) risks wrap-around on box of half-length {half_length} up to T = {t_end}")]
    SupportViolation {
        radius: f64,
        half_length: f64,
        t_end: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("config hash mismatch: expected {expected}, found {found} in {path}")]
    HashMismatch {
        expected: String,
        found: String,
        path: PathBuf,
    },

    #[error("decay fit: {0}")]
    Fit(String),

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl DwError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DwError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, DwError>;
