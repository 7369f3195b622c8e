use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("time {t} lies outside the sampled window [{lo}, {hi}]")]
    OutOfWindow { t: f64, lo: f64, hi: f64 },

    #[error("time {t} is not aligned to the sampling grid (step {step})")]
    OffGrid { t: f64, step: f64 },

    #[error("incompatible grids: {0}")]
    GridMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Picard iteration did not contract (rho reached {rho}, factor history {history:?})")]
    NoContraction { rho: f64, history: Vec<f64> },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(
        "circulant embedding is not positive semidefinite; dense fallback supports at most \
         {max} increments (requested {requested})"
    )]
    EmbeddingTooLarge { requested: usize, max: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
