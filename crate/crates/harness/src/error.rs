use prfslab_core::LabError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot read or write {path}: {message}")]
    Io { path: String, message: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("unknown experiment '{0}'")]
    UnknownExperiment(String),

    #[error("invalid params: {0}")]
    InvalidParams(String),

    #[error(transparent)]
    Lab(#[from] LabError),
}

impl HarnessError {
    /// Process exit code. 0 and 1 are reserved for passing and failing runs,
    /// 2 for command-line usage errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io { .. } | HarnessError::Config(_) => 3,
            HarnessError::UnknownExperiment(_) => 4,
            HarnessError::InvalidParams(_) => 5,
            HarnessError::Lab(e) => match e {
                LabError::InvalidArgument(_) => 5,
                LabError::DimensionLimit { .. } => 6,
                LabError::EnumerationLimit { .. } => 7,
                LabError::NotHermitian(_) | LabError::Callback(_) => 8,
            },
        }
    }

    pub(crate) fn params(msg: impl Into<String>) -> Self {
        HarnessError::InvalidParams(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
