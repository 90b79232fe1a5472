use potts_core::error::ErrorClass;
use potts_core::PottsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] PottsError),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for configuration and I/O problems, 2 for degenerate math, 3 for a regime mismatch.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.class() {
                ErrorClass::Config => 1,
                ErrorClass::Degenerate => 2,
                ErrorClass::Regime => 3,
            },
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
