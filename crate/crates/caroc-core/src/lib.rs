//! Covariate-adjusted ROC and AUC estimation for two-population marker data.
//!
//! Given paired (covariate, marker) observations from a nondiseased sample X
//! and a diseased sample Y, this crate estimates the conditional AUC
//! `A(z) = P(Y > X | Z = z)` and related accuracy indices. Mean and variance
//! functions of both populations are fitted by odd-order local polynomial
//! regression with heteroscedastic variance smoothing; the AUC itself is
//! estimated either by a normal-noise closed form, by a Mann-Whitney statistic
//! on working samples reconstructed from standardized residuals, or by a
//! bivariate kernel smoother of pairwise indicators. Percentile bootstrap
//! bands and a Monte Carlo study harness round out the toolkit.
//!
//! The crate is `no_std` (with `alloc`) so the estimation core can be embedded
//! anywhere; IO, file formats and the CLI live in the companion `caroc` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bandwidth;
pub mod bootstrap;
pub mod error;
pub mod estimators;
pub mod kernel;
pub mod local_poly;
pub mod normal;
pub mod quad;
pub mod rng;
pub mod sim;

pub use bandwidth::{BandwidthGrid, BandwidthSet, SelectionMethod};
pub use bootstrap::{AucBand, BandwidthPolicy, BootstrapConfig, EstimatorSpec};
pub use error::Error;
pub use estimators::{
    AucEstimate, AucEstimator, CurveSet, ExactCurves, RocPoint, StandardizedResiduals,
    WorkingSample,
};
pub use kernel::{EquivalentKernel, Kernel, KernelFamily};
pub use local_poly::{FittedCurves, LocalPolyFit, Population, SamplePairs};
pub use sim::{NoiseFamily, SimScenario};

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
