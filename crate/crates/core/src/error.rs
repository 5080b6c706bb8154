use thiserror::Error;

/// Crate-wide error type. `exit_code` fixes the process status contract:
/// usage errors exit 1, config/data validation errors exit 2, numerical
/// aborts exit 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),

    #[error("config: {0}")]
    Config(String),

    #[error("data: {message}{}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Data { message: String, line: Option<usize> },

    #[error("domain: {0}")]
    Domain(String),

    #[error("numerical abort in block `{block}` at iteration {iteration}: {message}")]
    Numerical {
        block: &'static str,
        iteration: usize,
        message: String,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn data(message: impl Into<String>) -> Self {
        Error::Data {
            message: message.into(),
            line: None,
        }
    }

    pub fn data_at(message: impl Into<String>, line: usize) -> Self {
        Error::Data {
            message: message.into(),
            line: Some(line),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Config(_) | Error::Data { .. } | Error::Domain(_) => 2,
            Error::Numerical { .. } => 3,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
