use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by the CLI to pick an exit code
/// (input problems exit 2, numerical problems exit 3).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("csv parse failure at row {row}: {message}")]
    CsvRow { row: usize, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("parameter constraint violated: {0}")]
    Constraint(String),

    #[error("non-finite value in {context} at time index {t}")]
    NonFinite { context: String, t: usize },

    #[error("non-positive conditional variance at time index {t}")]
    VarianceNonPositive { t: usize },

    #[error("optimizer failed to converge: {0}")]
    NoConvergence(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Classify the error for exit-code mapping.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidInput(_)
            | Error::CsvRow { .. }
            | Error::Io { .. }
            | Error::Config(_) => ErrorClass::Input,
            Error::Constraint(_)
            | Error::NonFinite { .. }
            | Error::VarianceNonPositive { .. }
            | Error::NoConvergence(_)
            | Error::Numerical(_) => ErrorClass::Numerical,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
