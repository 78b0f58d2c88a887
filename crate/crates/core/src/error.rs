use thiserror::Error;

/// Errors raised by the operator laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OplabError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Input is not Hermitian within tolerance; carries ‖M − M*‖.
    #[error("matrix is not Hermitian (‖M − M*‖ = {defect_norm:e})")]
    NotHermitian { defect_norm: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {message} (residuals {residuals:?})")]
    Numerical { message: String, residuals: Vec<f64> },

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("range/kernel split failed: lower block residual {residual:e} exceeds {bound:e}")]
    Split { residual: f64, bound: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("fixture generation failed: {0}")]
    Generation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl OplabError {
    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        OplabError::Io { path: path.display().to_string(), message: err.to_string() }
    }
}

pub type Result<T> = std::result::Result<T, OplabError>;
