//! Error type shared by the harness and the CLI, with stable exit codes.

use littlezoo::env::EnvError;
use littlezoo::goalspace::GenerateError;
use littlezoo::tinynet::NetError;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    /// Bad flags, unreadable files, malformed configuration.
    #[error("config error: {0}")]
    Config(String),
    /// Content that parsed but violates an invariant.
    #[error("validation error: {0}")]
    Validation(String),
    /// A runtime invariant broke mid-experiment.
    #[error("invariant violation: {0}")]
    Invariant(String),
}

impl LabError {
    /// Process exit code: 2 config, 3 validation, 4 invariant.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Config(_) => 2,
            LabError::Validation(_) => 3,
            LabError::Invariant(_) => 4,
        }
    }

    /// One-line machine-readable rendering for stderr.
    pub fn machine_line(&self) -> String {
        let kind = match self {
            LabError::Config(_) => "config",
            LabError::Validation(_) => "validation",
            LabError::Invariant(_) => "invariant",
        };
        format!(
            "{{\"error\":\"{kind}\",\"message\":{}}}",
            serde_json::to_string(&self.to_string()).unwrap_or_else(|_| "\"\"".into())
        )
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Config(format!("io: {e}"))
    }
}

impl From<EnvError> for LabError {
    fn from(e: EnvError) -> Self {
        LabError::Validation(e.to_string())
    }
}

impl From<GenerateError> for LabError {
    fn from(e: GenerateError) -> Self {
        match e {
            GenerateError::BadConfig(msg) => LabError::Config(msg),
            other => LabError::Validation(other.to_string()),
        }
    }
}

impl From<NetError> for LabError {
    fn from(e: NetError) -> Self {
        LabError::Invariant(e.to_string())
    }
}
