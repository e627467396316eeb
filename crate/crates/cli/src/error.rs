use perc_core::error::Error as CoreError;
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_SIZE_LIMIT: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// Results were written but a statistical decision could not be made.
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("check failed: {0}")]
    Failed(String),
}

pub type CliResult<T> = Result<T, CliError>;

pub fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_INVALID,
            CliError::Core(e) => match e {
                CoreError::SizeLimit { .. } => EXIT_SIZE_LIMIT,
                CoreError::InvalidParameter(_)
                | CoreError::UnsupportedGraph(_)
                | CoreError::NoThreshold
                | CoreError::InvalidInstance { .. }
                | CoreError::Resolution(_)
                | CoreError::InfiniteDiameter => EXIT_INVALID,
                CoreError::ContractViolation(_) | CoreError::NotMonotone { .. } => EXIT_FAILED,
            },
            CliError::Inconclusive(_) => EXIT_INCONCLUSIVE,
            CliError::Failed(_) => EXIT_FAILED,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            EXIT_INVALID => "invalid_config",
            EXIT_INCONCLUSIVE => "inconclusive",
            EXIT_SIZE_LIMIT => "size_limit",
            _ => "failed",
        }
    }

    /// Single-line JSON for stderr.
    pub fn to_line(&self) -> String {
        json!({ "error": self.kind(), "exit_code": self.exit_code(), "message": self.to_string() }).to_string()
    }
}
