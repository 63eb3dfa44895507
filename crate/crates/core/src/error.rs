use thiserror::Error;

/// Failures raised by the geometry, ODE, spectral and surface routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration failed near r = {last_r}: {reason}")]
    Integration { last_r: f64, reason: String },

    #[error("psi_c is singular at r = {r} (R_c = {r_c})")]
    Singularity { r: f64, r_c: f64 },

    #[error("no singularity found for c = {c}")]
    NoSingularity { c: f64 },

    #[error("eigenvalue search failed: {0}")]
    Search(String),

    #[error("quadrature did not reach tolerance {tol:e} (last change {change:e})")]
    Accuracy { tol: f64, change: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate geometry: {0}")]
    Geometry(String),

    #[error("root finding failed: {0}")]
    Root(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
