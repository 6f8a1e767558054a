use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the simulation and analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("chain length {0} outside supported range 2..=28")]
    SiteCount(usize),

    #[error("deformation range r={r} must satisfy 2 <= r < N={n_sites}")]
    DegenerateRange { r: usize, n_sites: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid subsystem: {0}")]
    Subsystem(String),

    #[error(
        "Krylov expansion did not converge: dim={dim}, error estimate {estimate:e} > tol {tol:e} (tau={tau})"
    )]
    KrylovNotConverged {
        dim: usize,
        estimate: f64,
        tol: f64,
        tau: f64,
    },

    #[error("eigenvalue {0:e} below clamp threshold; density matrix is corrupted")]
    NegativeEigenvalue(f64),

    #[error("probability vector not normalized (sum = {0})")]
    Unnormalized(f64),

    #[error("separation {delta} is not a multiple of the snapshot spacing {spacing}")]
    OffGrid { delta: f64, spacing: f64 },

    #[error("separation {delta} leaves fewer than {needed} points in a series of length {len}")]
    SeparationTooLarge { delta: f64, len: usize, needed: usize },

    #[error("step size {tau} does not match series spacing {spacing}")]
    SpacingMismatch { tau: f64, spacing: f64 },

    #[error("found {0} deep extrema, need at least 2")]
    TooFewExtrema(usize),

    #[error("runs are not comparable: {0}")]
    GridMismatch(String),

    #[error("invalid manifest: {}", .0.join("; "))]
    InvalidManifest(Vec<String>),

    #[error("malformed file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::KrylovNotConverged { .. }
            | Error::NegativeEigenvalue(_)
            | Error::Unnormalized(_)
            | Error::TooFewExtrema(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
