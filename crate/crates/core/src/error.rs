use thiserror::Error;

/// Errors raised by model construction, bound evaluation and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown builtin model `{0}`")]
    UnknownModel(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("matrix is not Hermitian (relative deviation {0:e})")]
    NotHermitian(f64),

    /// SLD equation has no solution because `λ_a + λ_b` vanishes where `∂ρ` does not.
    #[error("SLD ill-posed at entry ({row}, {col}): λ_a + λ_b = {eig_sum:e}, |∂ρ_ab| = {magnitude:e}")]
    SupportObstruction {
        row: usize,
        col: usize,
        eig_sum: f64,
        magnitude: f64,
    },

    #[error("singular or ill-conditioned matrix: {0}")]
    Singular(String),

    #[error("model file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-parsable category used in CLI diagnostics.
    pub fn category(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "dimension",
            Error::InvalidArgument(_) | Error::UnknownModel(_) => "usage",
            Error::InvalidModel(_) | Error::NotHermitian(_) => "model",
            Error::SupportObstruction { .. } => "support",
            Error::Singular(_) => "singular",
            Error::Format(_) | Error::Json(_) => "format",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
