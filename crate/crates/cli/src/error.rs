use pme_lab::PmeError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("missing key: {0}")]
    MissingKey(&'static str),

    #[error("invalid configuration: {0}")]
    Invalid(String),

    #[error("cannot parse configuration: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("{module}: {source}")]
    Numerical {
        module: &'static str,
        #[source]
        source: PmeError,
    },
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 2 for bad input, 3 when a computation broke down.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical { source, .. } if !source.is_validation() => 3,
            _ => 2,
        }
    }

    /// Short machine-readable name of the failure.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::MissingKey(_) => "missing_key",
            CliError::Invalid(_) => "invalid",
            CliError::Parse(_) => "parse",
            CliError::Io { .. } => "io",
            CliError::Csv(_) => "csv",
            CliError::Numerical { source, .. } => match source {
                PmeError::Domain(_) => "domain",
                PmeError::Mismatch(_) => "mismatch",
                PmeError::NewtonDiverged { .. } => "newton_diverged",
                PmeError::LinearSolve(_) => "linear_solve",
                PmeError::FiniteDifference(_) => "finite_difference",
                PmeError::Aliasing { .. } => "aliasing",
                PmeError::Format(_) => "format",
                PmeError::Io(_) => "io",
            },
        }
    }

    pub fn module(&self) -> Option<&'static str> {
        match self {
            CliError::Numerical { module, .. } => Some(module),
            _ => None,
        }
    }
}

/// Tags a library error with the module that raised it.
pub trait InModule<T> {
    fn in_module(self, module: &'static str) -> Result<T, CliError>;
}

impl<T> InModule<T> for pme_lab::Result<T> {
    fn in_module(self, module: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerical { module, source })
    }
}
