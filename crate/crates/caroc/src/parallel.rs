//! Rayon drivers for the bootstrap and the Monte Carlo studies.
//!
//! Replicates and runs draw from counter-derived RNG streams and are
//! collected in index order before aggregation, so these produce exactly the
//! same output as the serial drivers in `caroc-core` regardless of the
//! thread count.

use caroc_core::bootstrap::{aggregate_band, bootstrap_replicate, estimate_on_grid};
use caroc_core::sim::{
    aggregate_band_study, aggregate_mse, band_run, mse_run, true_auc_on_grid, BandStudyConfig,
    BandStudyResult, MseStudyConfig, SimResult,
};
use caroc_core::{
    AucBand, BandwidthPolicy, BootstrapConfig, EstimatorSpec, SamplePairs,
};
use rayon::prelude::*;

/// Parallel counterpart of [`caroc_core::bootstrap::bootstrap_auc`].
pub fn bootstrap_auc(
    x_data: &SamplePairs,
    y_data: &SamplePairs,
    spec: &EstimatorSpec,
    policy: &BandwidthPolicy,
    z_grid: &[f64],
    cfg: &BootstrapConfig,
) -> caroc_core::Result<AucBand> {
    let point_bandwidths = match policy {
        BandwidthPolicy::Frozen(set) => set.clone(),
        BandwidthPolicy::PerReplicateCv(grid) => caroc_core::bandwidth::select_all(
            x_data,
            y_data,
            spec.order_p,
            spec.kernel,
            grid,
        )?,
    };
    let point_estimates = estimate_on_grid(x_data, y_data, spec, &point_bandwidths, z_grid)?;
    let replicate_values: Vec<Option<Vec<f64>>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|b| {
            bootstrap_replicate(x_data, y_data, spec, policy, z_grid, cfg.seed, b as u64).ok()
        })
        .collect();
    aggregate_band(z_grid, point_estimates, &replicate_values, cfg.band_level)
}

/// Parallel counterpart of [`caroc_core::sim::run_mse_study`].
pub fn run_mse_study(cfg: &MseStudyConfig) -> caroc_core::Result<SimResult> {
    if cfg.runs == 0 {
        return Err(caroc_core::Error::InvalidSample("study needs at least one run".into()));
    }
    let truth = true_auc_on_grid(&cfg.scenario, &cfg.z_grid);
    let per_run: Vec<Option<Vec<Vec<f64>>>> = (0..cfg.runs)
        .into_par_iter()
        .map(|r| mse_run(cfg, &truth, r as u64).ok())
        .collect();
    aggregate_mse(cfg, truth, &per_run)
}

/// Parallel counterpart of [`caroc_core::sim::run_band_study`].
pub fn run_band_study(cfg: &BandStudyConfig) -> caroc_core::Result<BandStudyResult> {
    if cfg.runs < 2 {
        return Err(caroc_core::Error::InvalidSample("band study needs at least 2 runs".into()));
    }
    BootstrapConfig::new(cfg.bootstrap_replicates, cfg.level, cfg.seed)?;
    let per_run: Vec<Option<(Vec<f64>, AucBand)>> = (0..cfg.runs)
        .into_par_iter()
        .map(|r| band_run(cfg, r as u64).ok())
        .collect();
    aggregate_band_study(cfg, &per_run)
}

/// Run `f` on a rayon pool with the requested number of threads
/// (0 = rayon's default, normally all cores).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool builds");
    pool.install(f)
}
