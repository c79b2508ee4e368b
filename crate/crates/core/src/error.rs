use thiserror::Error;

/// Errors raised by the spectral toolkit.
///
/// Variants map onto the failure classes of the public operations: argument
/// validation (`Domain`, `Precondition`), resource exhaustion, incomplete
/// input spectra and numerical non-convergence.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("incomplete spectrum: {0}")]
    IncompleteSpectrum(String),

    #[error("truncation tail not convergent: {0}")]
    TailNotConvergent(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("grid resolution insufficient: {0}")]
    Resolution(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
