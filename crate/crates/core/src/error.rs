use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A price, demand or supply value that must be strictly positive was not.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid model or scenario parameters.
    #[error("config error: {0}")]
    Config(String),

    #[error("unsupported demand model variant: {0}")]
    UnsupportedVariant(String),

    #[error("degenerate smoothing: epsilon * r must be positive (got {0})")]
    DegenerateSmoothing(f64),

    #[error("degenerate discount: epsilon * R = {0} must be below 1")]
    DegenerateDiscount(f64),

    #[error("cannot anchor smoothed revenue curve: {0}")]
    Anchoring(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("invalid feedback at round {round}: {message}")]
    Feedback { round: usize, message: String },

    #[error("equilibrium solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("equilibrium lies outside the price domain (residual {residual:e} after clipping)")]
    OutsideDomain { residual: f64 },

    #[error("equilibrium failed at round {round}: {source}")]
    Round {
        round: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("empty trace")]
    EmptyTrace,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the caller's input rather than by the run itself.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::DegenerateSmoothing(_)
                | Error::DegenerateDiscount(_)
                | Error::UnsupportedVariant(_)
                | Error::Json(_)
        )
    }
}
