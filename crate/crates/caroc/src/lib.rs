//! Command-line companion to `caroc-core`: CSV ingestion, JSON result
//! documents, and rayon-parallel drivers that reproduce the serial results
//! bit for bit.

pub mod cli;
pub mod io;
pub mod parallel;
pub mod result;

use std::process::ExitCode;

/// Application-level error with the exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    /// Bad input: file problems, parse errors, invalid configuration.
    #[error("{0}")]
    Input(String),
    /// Estimation failed inside the numeric core.
    #[error("{0}")]
    Estimation(caroc_core::Error),
    /// Too many bootstrap replicates or simulation runs failed.
    #[error("{0}")]
    FailureRate(caroc_core::Error),
}

impl AppError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            AppError::Input(_) => ExitCode::from(2),
            AppError::Estimation(_) => ExitCode::from(3),
            AppError::FailureRate(_) => ExitCode::from(4),
        }
    }
}

impl From<caroc_core::Error> for AppError {
    fn from(e: caroc_core::Error) -> Self {
        if failure_rate(&e) {
            AppError::FailureRate(e)
        } else {
            AppError::Estimation(e)
        }
    }
}

fn failure_rate(e: &caroc_core::Error) -> bool {
    match e {
        caroc_core::Error::BootstrapFailureRate { .. }
        | caroc_core::Error::StudyFailureRate { .. } => true,
        caroc_core::Error::Context { source, .. } => failure_rate(source),
        _ => false,
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Input(e.to_string())
    }
}
