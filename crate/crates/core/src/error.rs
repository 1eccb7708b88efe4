use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("dimension limit: {requested} qubits requested, cap is {cap}")]
    DimensionLimit { requested: usize, cap: usize },

    #[error("enumeration limit: {what} needs 2^{bits} items, limit is 2^{limit}")]
    EnumerationLimit {
        what: &'static str,
        bits: usize,
        limit: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("distinguisher failed: {0}")]
    Callback(String),
}

impl LabError {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        LabError::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
