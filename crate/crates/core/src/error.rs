use thiserror::Error;

pub type Result<T, E = IqccError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum IqccError {
    #[error("qubit count mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} needs {required} qubits, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        required: usize,
        budget: usize,
    },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("extrapolation rejected: {0}")]
    FitRejected(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl IqccError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        IqccError::Parse {
            line,
            message: message.into(),
        }
    }

    /// True for failures caused by bad input rather than a broken internal invariant.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, IqccError::ContractViolation(_))
    }
}

pub(crate) fn check_dims(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(IqccError::DimensionMismatch { left, right })
    }
}
