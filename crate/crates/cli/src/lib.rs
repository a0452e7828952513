//! Library half of the `vanlam` binary: configuration, the acceptance suite
//! and the mapping from failures to exit codes.

pub mod commands;
pub mod config;
pub mod suite;

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const CRITERION_FAIL: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const INTERNAL: i32 = 3;
}

/// Why a command stopped, tagged with its exit code.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("criterion failed: {0}")]
    Criterion(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Criterion(_) => exit::CRITERION_FAIL,
            Failure::Config(_) => exit::CONFIG,
            Failure::Internal(_) => exit::INTERNAL,
        }
    }
}

impl From<config::ConfigError> for Failure {
    fn from(e: config::ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<suite::SuiteError> for Failure {
    fn from(e: suite::SuiteError) -> Self {
        match e {
            suite::SuiteError::Config(c) => c.into(),
            suite::SuiteError::Internal(m) => Failure::Internal(m),
        }
    }
}
