use thiserror::Error;

/// Errors shared by all numerical operations in this crate.
#[derive(Debug, Error)]
pub enum GeoError {
    /// A trajectory left the chart domain of the connection.
    #[error("trajectory left the chart domain at t = {t}")]
    DomainExit { t: f64 },

    /// An iterative solve (Newton shooting, division) did not reach tolerance.
    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence { residual: f64, iterations: usize },

    /// Non-finite values produced by coefficient evaluation or a stencil.
    #[error("numerics error: {0}")]
    Numerics(String),

    /// Query parameter outside the span of a dense solution.
    #[error("t = {t} outside span [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    /// Catalog lookup failure.
    #[error("unknown manifold `{0}`")]
    UnknownManifold(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, GeoError>;
