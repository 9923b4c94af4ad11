//! Experiment runner around `cpm-core`: a flat key = value config format,
//! seed-batch execution with CSV curve output, and the named experiments
//! used for verification.

pub mod config;
pub mod presets;
pub mod runner;

pub use config::{parse_config, parse_config_str};
pub use presets::{preset_config, preset_names};
pub use runner::{run_experiment, RunManifest};

use std::fmt;

/// Errors split by exit code: validation problems exit 1, runtime
/// failures exit 2.
#[derive(Debug)]
pub enum AppError {
    Validation(String),
    Runtime(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Validation(_) => 1,
            AppError::Runtime(_) => 2,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        AppError::Validation(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        AppError::Runtime(msg.into())
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Validation(m) => write!(f, "validation error: {m}"),
            AppError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for AppError {}
