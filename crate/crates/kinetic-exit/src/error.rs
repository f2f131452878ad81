use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An adaptive quadrature failed to reach its tolerance.
    #[error("quadrature did not converge: {0}")]
    QuadratureConvergence(String),

    /// Invalid simulation configuration (dt, horizon, path counts, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Girsanov integrals were accumulated under a different sigma.
    #[error("weight inconsistency: {0}")]
    WeightInconsistency(String),

    /// All Fleming–Viot particles exited within one macro-step.
    #[error("particle extinction: {0}")]
    Extinction(String),

    /// Not enough surviving samples to form an estimate.
    #[error("sample starvation: {0}")]
    SampleStarvation(String),

    /// Survival exhausted before the regression window.
    #[error("window error: {0}")]
    Window(String),

    /// Fit could not be performed (insufficient decay / degenerate data).
    #[error("fit error: {0}")]
    Fit(String),

    /// Malformed config file or CLI usage.
    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
