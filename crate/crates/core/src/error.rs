use thiserror::Error;

/// Errors produced by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input data (grids, profiles, configs).
    #[error("schema error: {0}")]
    Schema(String),

    /// A critical point (or critical manifold) that is not Morse.
    #[error("degenerate critical point at {location:?}: {detail}")]
    Degenerate { location: Vec<f64>, detail: String },

    /// The root set fails the Euler characteristic check.
    #[error(
        "missed critical points suspected (euler sum {found}, expected {expected}); increase seeds"
    )]
    MissedRoots { found: i64, expected: i64 },

    /// A step of the curvature construction failed its own verification.
    #[error("construction error: {0}")]
    Construction(String),

    /// Inconsistent constants or run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// An iterative method stopped without meeting its tolerance.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
