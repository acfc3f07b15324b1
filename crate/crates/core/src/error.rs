use thiserror::Error;

/// Errors across lattice construction, sampling, exact enumeration and fits.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid vertex: {0}")]
    InvalidVertex(String),

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("vertex outside region: {0}")]
    OutOfRegion(String),

    #[error("enumeration too large: {bits:.1} bits of state, budget is {limit:.1} bits")]
    EnumerationTooLarge { bits: f64, limit: f64 },

    #[error("fit infeasible: {0}")]
    FitInfeasible(String),

    #[error("estimation failed: {0}")]
    EstimationFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
