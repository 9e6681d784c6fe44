use thiserror::Error;

/// Errors surfaced by the linear-algebra and analysis layers.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix side {side} exceeds the configured cap {cap}")]
    DimensionCap { side: usize, cap: usize },

    #[error("operator is not Hermitian: max deviation {deviation:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("operator is not positive semidefinite: min eigenvalue {min_eigenvalue:.6e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resampling cap of {cap} draws exhausted while avoiding the input directions")]
    ResamplingExhausted { cap: usize },
}

pub type Result<T> = std::result::Result<T, CoreError>;
