use thiserror::Error;

/// Errors raised by the linear algebra, prox, solver and diagnostic layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {context} (expected {expected}, got {actual})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("{method} did not converge after {iterations} iterations")]
    NoConvergence {
        method: &'static str,
        iterations: usize,
    },

    #[error("|z| = {z_abs} is below the prox threshold tau = {tau}")]
    BelowThreshold { z_abs: f64, tau: f64 },

    #[error("vectors differ outside coordinate {0}")]
    DiffersOffCoordinate(usize),

    #[error("support changes within the supplied tail (iterate {0})")]
    SupportNotFixed(usize),

    #[error("point is not stationary")]
    NotStationary(Box<crate::diagnostics::StationarityReport>),

    #[error("observation signal is identically zero")]
    ZeroSignal,

    #[error("reference vector is identically zero")]
    ZeroReference,

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
