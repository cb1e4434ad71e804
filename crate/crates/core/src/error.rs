//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the operation's mathematical domain
    /// (invalid parameter vector, quantile level outside (0,1), ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed to reach its contract (quadrature
    /// non-convergence, singular Fisher matrix, all-zero weights, ...).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The family does not support the requested operation. The uniform
    /// family carries no Fisher structure and is rejected by all geometry.
    #[error("family `{family}` does not support {operation}")]
    UnsupportedFamily {
        family: &'static str,
        operation: &'static str,
    },

    /// Every direction of a Fisher sphere left the parameter manifold.
    #[error("empty Fisher sphere: all {k} directions left the manifold before reaching radius {delta}")]
    SphereEmpty { k: usize, delta: f64 },

    /// A sample file or in-memory sample violates its contract.
    #[error("sample error: {0}")]
    Sample(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn sample(msg: impl Into<String>) -> Self {
        Error::Sample(msg.into())
    }
}
