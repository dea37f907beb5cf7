use thiserror::Error;

/// Failure categories shared by every module.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabError {
    /// Inputs outside the admissible range of an operation.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// Caller broke a documented precondition (sizes, index ranges).
    #[error("contract violation: {0}")]
    Contract(String),
    /// The requested combination is not provided (e.g. sampling an analytic-only noise).
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// An internal consistency check failed.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl LabError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Invariant(_) => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Parameter(msg.into()))
}
