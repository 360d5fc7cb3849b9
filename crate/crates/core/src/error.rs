use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {estimate}, error {error:e})")]
    QuadratureNonConvergence {
        subdivisions: usize,
        estimate: String,
        error: f64,
    },

    #[error("series tail bound {bound:e} above target {target:e} after {terms} terms")]
    SeriesTruncation {
        terms: usize,
        bound: f64,
        target: f64,
    },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("degenerate critical point: {0}")]
    DegenerateCriticalPoint(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
