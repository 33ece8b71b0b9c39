//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CqError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("label mismatch: {0}")]
    LabelMismatch(String),

    #[error("unknown symbol: {0}")]
    UnknownSymbol(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("memory budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("operator is not block diagonal over the classical register: {0}")]
    NonBlockDiagonal(String),

    #[error("contract violation in {stage}: {detail}")]
    ContractViolation { stage: String, detail: String },
}

impl CqError {
    pub fn contract(stage: &str, detail: impl Into<String>) -> Self {
        CqError::ContractViolation {
            stage: stage.to_string(),
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CqError>;
