use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid array configuration: {0}")]
    InvalidConfig(String),

    #[error("nominal layout violates minimum spacing: {distance:.6e} m < d_min {d_min:.6e} m")]
    SpacingViolation { distance: f64, d_min: f64 },

    #[error("movable region too small: tile side {tile:.6e} m < d_min {d_min:.6e} m")]
    RegionTooSmall { tile: f64, d_min: f64 },

    #[error(
        "block diagonalization infeasible: {c_t} RF chains, {interferers} interfering rows, {n_s} streams"
    )]
    BdInfeasible {
        c_t: usize,
        interferers: usize,
        n_s: usize,
    },

    #[error("user {user}: numerical null space has dimension {dim} < {n_s} streams")]
    RankDeficient { user: usize, dim: usize, n_s: usize },

    #[error("user {user}: interference-plus-noise covariance is singular")]
    SingularCovariance { user: usize },

    #[error("sweep excluded {excluded} of {total} trials (limit 5%)")]
    TooManyExclusions { excluded: usize, total: usize },

    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag, used by the CLI's JSON error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid_config",
            Error::SpacingViolation { .. } => "spacing_violation",
            Error::RegionTooSmall { .. } => "region_too_small",
            Error::BdInfeasible { .. } => "bd_infeasible",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::SingularCovariance { .. } => "singular_covariance",
            Error::TooManyExclusions { .. } => "too_many_exclusions",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
