use nusc_core::Error as CoreError;

/// Failures of an experiment run, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(CoreError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type LabResult<T> = Result<T, LabError>;

impl LabError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        LabError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// 2 for config errors, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config { .. } => 2,
            LabError::Numerical(_) => 3,
            LabError::Io(_) | LabError::Csv(_) => 1,
        }
    }
}

impl From<CoreError> for LabError {
    fn from(e: CoreError) -> Self {
        let field = match &e {
            CoreError::InvalidParameter { name, .. } => *name,
            CoreError::UnknownModel(_) => "model.name",
            CoreError::TooManyQubits { .. } => "model.n",
            CoreError::UnsupportedOrder(_) => "k",
            CoreError::InvalidOrdering(_) => "ordering",
            CoreError::InvalidWeights { .. } => "weights",
            CoreError::CapExceeded { .. } => "size",
            CoreError::OverlappingSupport(_) => "model",
            _ => return LabError::Numerical(e),
        };
        LabError::config(field, e.to_string())
    }
}

impl From<toml::de::Error> for LabError {
    fn from(e: toml::de::Error) -> Self {
        LabError::config("config", e.to_string())
    }
}
