//! Error type shared by all estimation stages.

use alloc::string::String;

/// Errors produced by fitting, selection, estimation and resampling.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Error {
    #[error("sample is empty")]
    EmptySample,
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    #[error("bandwidth must be positive, got {0}")]
    NonPositiveBandwidth(f64),
    #[error("insufficient local data at z = {z}: {found} point(s) with positive kernel weight, need at least {needed}")]
    InsufficientLocalData { z: f64, found: usize, needed: usize },
    #[error("kernel moment matrix is numerically singular (condition estimate {condition:.3e})")]
    SingularMomentMatrix { condition: f64 },
    #[error("no bandwidth candidate was feasible for {context}")]
    AllCandidatesInfeasible { context: String },
    #[error("bivariate kernel estimator has zero denominator at z = {z}")]
    ZeroDenominator { z: f64 },
    #[error("empty input")]
    EmptyInput,
    #[error("{failed} of {total} bootstrap replicates failed (limit {limit_percent}%)")]
    BootstrapFailureRate { failed: usize, total: usize, limit_percent: u8 },
    #[error("{failed} of {total} Monte Carlo runs failed (limit {limit_percent}%)")]
    StudyFailureRate { failed: usize, total: usize, limit_percent: u8 },
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

impl Error {
    /// Wrap an error with a population/function label so callers can tell
    /// which of the four fits (or which replicate) failed.
    pub fn with_context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: alloc::boxed::Box::new(self) }
    }
}
