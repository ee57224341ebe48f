use thiserror::Error;

use crate::green::RegionTag;

/// Errors raised by the solvers and I/O layers of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// |λ| = 1 makes the reduced spectral parameter degenerate (k1 = 0).
    #[error("degenerate spectral parameter: |lambda| = {0} lies on the unit circle")]
    Degenerate(f64),

    /// λ falls inside the configured guard band around the unit circle.
    #[error("spectral parameter |lambda| = {abs} lies in the guard band of width {guard} around |lambda| = 1")]
    GuardBand { abs: f64, guard: f64 },

    #[error("numerical failure in region {region:?} at ({x1}, {x2}): {detail}")]
    NumericalFailure {
        region: RegionTag,
        x1: f64,
        x2: f64,
        detail: String,
    },

    /// The Lippmann-Schwinger iteration did not converge. Near an exceptional
    /// point this is the expected outcome.
    #[error("exceptional point suspected: GMRES stopped after {iterations} iterations at relative residual {residual:.3e}")]
    ExceptionalPointSuspected {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("D-bar solve did not converge: {iterations} iterations, relative residual {residual:.3e}")]
    DbarNotConverged {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    /// The boundary integral system is too ill-conditioned for this λ.
    #[error("boundary integral system ill-conditioned (cond = {condition:.3e}); truncate the scattering data")]
    TruncationNeeded { condition: f64 },

    #[error("finite element system is singular: zero may be a Dirichlet eigenvalue ({0})")]
    WellPosedness(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<image::ImageError> for Error {
    fn from(e: image::ImageError) -> Self {
        Error::Io(std::io::Error::other(e.to_string()))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
