//! Percentile bootstrap bands and variance estimates for the
//! covariate-adjusted AUC estimators, by resampling the original data.
//!
//! Observations are resampled as (covariate, marker) pairs within each
//! population independently, which preserves the joint (Z, marker) law.
//! Every replicate draws from its own counter-derived RNG stream, so serial
//! and parallel schedules produce bit-identical bands.

use alloc::vec::Vec;

use crate::bandwidth::{select_all, BandwidthGrid, BandwidthSet};
use crate::error::Error;
use crate::estimators::{
    auc_bivariate_kernel, auc_normal, camwe_from_residuals, mann_whitney,
    standardized_residuals, AucEstimator,
};
use crate::kernel::Kernel;
use crate::local_poly::{fit_all_widened, SamplePairs};
use crate::rng;
use crate::Result;

/// Bootstrap configuration. Resampling is always within-population pair
/// resampling with replacement.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub band_level: f64,
    pub seed: u64,
}

impl BootstrapConfig {
    pub fn new(replicates: usize, band_level: f64, seed: u64) -> Result<Self> {
        if replicates < 2 {
            return Err(Error::InvalidSample("bootstrap needs at least 2 replicates".into()));
        }
        if !(band_level > 0.0 && band_level < 1.0) {
            return Err(Error::InvalidSample("band level must lie in (0, 1)".into()));
        }
        Ok(BootstrapConfig { replicates, band_level, seed })
    }
}

/// Whether each replicate reuses the original bandwidths or re-runs CV.
#[derive(Debug, Clone, PartialEq)]
pub enum BandwidthPolicy {
    /// Reuse the bandwidths selected on the original data (default).
    Frozen(BandwidthSet),
    /// Re-select by leave-one-out CV on every replicate.
    PerReplicateCv(BandwidthGrid),
}

/// Which estimator the bootstrap wraps, with its tuning.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSpec {
    pub estimator: AucEstimator,
    pub order_p: usize,
    pub kernel: Kernel,
    pub clamp: bool,
    /// (hx, hy) for the bivariate kernel estimator; ignored otherwise.
    pub kernel_bandwidths: Option<(f64, f64)>,
    /// Locally double the bandwidth (up to 3 times) where a fitted curve has
    /// too few neighbours instead of failing. Off by default for data
    /// analysis; the simulation harness turns it on so that boundary
    /// observations do not abort whole runs.
    pub widen_on_sparse: bool,
}

/// Pointwise bootstrap band over a covariate grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AucBand {
    pub z_grid: Vec<f64>,
    pub point_estimates: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub variance: Vec<f64>,
    pub replicates_requested: usize,
    pub replicates_effective: usize,
    pub failed_replicates: usize,
    pub level: f64,
}

/// Evaluate the configured estimator over the z grid.
pub fn estimate_on_grid(
    x_data: &SamplePairs,
    y_data: &SamplePairs,
    spec: &EstimatorSpec,
    bandwidths: &BandwidthSet,
    z_grid: &[f64],
) -> Result<Vec<f64>> {
    let clampf = |v: f64| if spec.clamp { v.max(0.5) } else { v };
    match spec.estimator {
        AucEstimator::MannWhitneyUnadjusted => {
            let v = clampf(mann_whitney(x_data.markers(), y_data.markers())?);
            Ok(z_grid.iter().map(|_| v).collect())
        }
        AucEstimator::BivariateKernel => {
            let (hx, hy) = spec.kernel_bandwidths.ok_or_else(|| {
                Error::InvalidSample("bivariate kernel estimator needs (hx, hy)".into())
            })?;
            z_grid
                .iter()
                .map(|&z| {
                    auc_bivariate_kernel(x_data, y_data, hx, hy, spec.kernel, z)
                        .map(|e| clampf(e.value))
                })
                .collect()
        }
        AucEstimator::NormalClosedForm => {
            let curves = fit_all_widened(
                x_data,
                y_data,
                spec.order_p,
                bandwidths.as_bandwidths(),
                spec.kernel,
                None,
                spec.widen_on_sparse,
            )?;
            z_grid.iter().map(|&z| auc_normal(&curves, z).map(|e| clampf(e.value))).collect()
        }
        AucEstimator::Camwe => {
            let curves = fit_all_widened(
                x_data,
                y_data,
                spec.order_p,
                bandwidths.as_bandwidths(),
                spec.kernel,
                None,
                spec.widen_on_sparse,
            )?;
            let resid = standardized_residuals(x_data, y_data, &curves)?;
            z_grid
                .iter()
                .map(|&z| camwe_from_residuals(&resid, &curves, z, false).map(|e| clampf(e.value)))
                .collect()
        }
    }
}

/// One bootstrap replicate: resample both samples from stream `index` and
/// evaluate the estimator on the grid. Used by both the serial driver below
/// and parallel drivers in the companion crate.
pub fn bootstrap_replicate(
    x_data: &SamplePairs,
    y_data: &SamplePairs,
    spec: &EstimatorSpec,
    policy: &BandwidthPolicy,
    z_grid: &[f64],
    seed: u64,
    index: u64,
) -> Result<Vec<f64>> {
    let mut stream = rng::stream(seed, index);
    let bx = x_data.resample(&mut stream);
    let by = y_data.resample(&mut stream);
    let bandwidths = match policy {
        BandwidthPolicy::Frozen(set) => set.clone(),
        BandwidthPolicy::PerReplicateCv(grid) => {
            select_all(&bx, &by, spec.order_p, spec.kernel, grid)?
        }
    };
    estimate_on_grid(&bx, &by, spec, &bandwidths, z_grid)
}

const FAILURE_LIMIT_PERCENT: u8 = 10;

/// Aggregate replicate grid evaluations into a percentile band.
///
/// `replicate_values[b]` is `None` for failed replicates. Order independent:
/// values are sorted per grid point before quantiles are taken.
pub fn aggregate_band(
    z_grid: &[f64],
    point_estimates: Vec<f64>,
    replicate_values: &[Option<Vec<f64>>],
    level: f64,
) -> Result<AucBand> {
    let total = replicate_values.len();
    let failed = replicate_values.iter().filter(|r| r.is_none()).count();
    if failed * 100 > total * FAILURE_LIMIT_PERCENT as usize {
        return Err(Error::BootstrapFailureRate {
            failed,
            total,
            limit_percent: FAILURE_LIMIT_PERCENT,
        });
    }
    let effective = total - failed;
    let mut lower = Vec::with_capacity(z_grid.len());
    let mut upper = Vec::with_capacity(z_grid.len());
    let mut variance = Vec::with_capacity(z_grid.len());
    for gi in 0..z_grid.len() {
        let mut vals: Vec<f64> =
            replicate_values.iter().filter_map(|r| r.as_ref().map(|v| v[gi])).collect();
        vals.sort_by(f64::total_cmp);
        let (lo, hi) = percentile_interval(&vals, level)?;
        lower.push(lo);
        upper.push(hi);
        variance.push(sample_variance(&vals));
    }
    Ok(AucBand {
        z_grid: z_grid.to_vec(),
        point_estimates,
        lower,
        upper,
        variance,
        replicates_requested: total,
        replicates_effective: effective,
        failed_replicates: failed,
        level,
    })
}

/// Bootstrap band for an AUC estimator over a covariate grid (serial driver).
pub fn bootstrap_auc(
    x_data: &SamplePairs,
    y_data: &SamplePairs,
    spec: &EstimatorSpec,
    policy: &BandwidthPolicy,
    z_grid: &[f64],
    cfg: &BootstrapConfig,
) -> Result<AucBand> {
    let point_bandwidths = match policy {
        BandwidthPolicy::Frozen(set) => set.clone(),
        BandwidthPolicy::PerReplicateCv(grid) => {
            select_all(x_data, y_data, spec.order_p, spec.kernel, grid)?
        }
    };
    let point_estimates = estimate_on_grid(x_data, y_data, spec, &point_bandwidths, z_grid)?;
    let replicate_values: Vec<Option<Vec<f64>>> = (0..cfg.replicates)
        .map(|b| {
            bootstrap_replicate(x_data, y_data, spec, policy, z_grid, cfg.seed, b as u64).ok()
        })
        .collect();
    aggregate_band(z_grid, point_estimates, &replicate_values, cfg.band_level)
}

/// Empirical quantile interval at `level` with type-7 (linear interpolation
/// between order statistics) quantiles. Input need not be sorted.
pub fn percentile_interval(values: &[f64], level: f64) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidSample("level must lie in (0, 1)".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    Ok((quantile_type7(&sorted, alpha), quantile_type7(&sorted, 1.0 - alpha)))
}

fn quantile_type7(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h as usize; // floor for h ≥ 0
    let frac = h - lo as f64;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_poly::Population;

    fn pairs(zs: &[f64], vs: &[f64], pop: Population) -> SamplePairs {
        SamplePairs::new(zs.to_vec(), vs.to_vec(), pop).unwrap()
    }

    fn camwe_spec() -> EstimatorSpec {
        EstimatorSpec {
            estimator: AucEstimator::Camwe,
            order_p: 1,
            kernel: Kernel::epanechnikov(),
            clamp: false,
            kernel_bandwidths: None,
            widen_on_sparse: false,
        }
    }

    #[test]
    fn percentile_interval_oracle() {
        let values: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let (lo, hi) = percentile_interval(&values, 0.95).unwrap();
        // sort-and-index oracle for type-7: h = 99·0.025 = 2.475 → v[2] + 0.475
        assert!((lo - (3.0 + 0.475)).abs() < 1e-12);
        assert!((hi - (98.0 - 0.475 + 0.0)).abs() < 1e-12); // h = 96.525 → v[96] + 0.525 = 97 + 0.525
        let (lo, hi) = percentile_interval(&[4.2; 9], 0.9).unwrap();
        assert_eq!((lo, hi), (4.2, 4.2));
        let (lo, hi) = percentile_interval(&[7.0], 0.5).unwrap();
        assert_eq!((lo, hi), (7.0, 7.0));
        assert!(matches!(percentile_interval(&[], 0.95), Err(Error::EmptyInput)));
    }

    #[test]
    fn degenerate_data_zero_width_band() {
        // constant markers, separated groups: every resample gives AUC 1
        let zs: Vec<f64> = (0..12).map(|i| i as f64 / 3.0).collect();
        let x = pairs(&zs, &[1.0; 12].to_vec(), Population::NonDiseasedX);
        let y = pairs(&zs, &[5.0; 12].to_vec(), Population::DiseasedY);
        let set = BandwidthSet::fixed(2.0, 2.0, 2.0, 2.0).unwrap();
        let cfg = BootstrapConfig::new(25, 0.95, 1).unwrap();
        let grid: Vec<f64> = (0..5).map(|i| 0.5 + 3.0 * i as f64 / 4.0).collect();
        let band = bootstrap_auc(
            &x,
            &y,
            &camwe_spec(),
            &BandwidthPolicy::Frozen(set),
            &grid,
            &cfg,
        )
        .unwrap();
        for i in 0..grid.len() {
            assert_eq!(band.lower[i], 1.0);
            assert_eq!(band.upper[i], 1.0);
            assert_eq!(band.variance[i], 0.0);
            assert_eq!(band.point_estimates[i], 1.0);
        }
        assert_eq!(band.replicates_effective + band.failed_replicates, 25);
    }

    #[test]
    fn two_replicate_variance_hand_oracle() {
        let zs: Vec<f64> = (0..15).map(|i| i as f64 / 3.0).collect();
        let mx: Vec<f64> = zs.iter().map(|z| z + (z * 1.1).sin()).collect();
        let my: Vec<f64> = zs.iter().map(|z| z + 1.0 + (z * 0.9).cos() * 0.2).collect();
        let x = pairs(&zs, &mx, Population::NonDiseasedX);
        let y = pairs(&zs, &my, Population::DiseasedY);
        let set = BandwidthSet::fixed(2.0, 2.0, 3.0, 3.0).unwrap();
        let spec = camwe_spec();
        let grid = [2.0];
        let policy = BandwidthPolicy::Frozen(set);
        let cfg = BootstrapConfig::new(2, 0.95, 99).unwrap();
        let band = bootstrap_auc(&x, &y, &spec, &policy, &grid, &cfg).unwrap();
        // recompute the two replicate values by hand through the same streams
        let v0 = bootstrap_replicate(&x, &y, &spec, &policy, &grid, 99, 0).unwrap()[0];
        let v1 = bootstrap_replicate(&x, &y, &spec, &policy, &grid, 99, 1).unwrap()[0];
        let mean = (v0 + v1) / 2.0;
        let var = (v0 - mean).powi(2) + (v1 - mean).powi(2); // ddof 1 with n = 2
        assert_eq!(band.variance[0], var);
        assert_eq!(band.lower[0], v0.min(v1) + 0.025 * (v0.max(v1) - v0.min(v1)));
    }

    #[test]
    fn reproducible_and_nested_levels() {
        let zs: Vec<f64> = (0..20).map(|i| i as f64 / 4.0).collect();
        let mx: Vec<f64> = zs.iter().map(|z| z * 0.5 + (z * 2.0).sin() * 0.3).collect();
        let my: Vec<f64> = zs.iter().map(|z| z * 0.5 + 0.8).collect();
        let x = pairs(&zs, &mx, Population::NonDiseasedX);
        let y = pairs(&zs, &my, Population::DiseasedY);
        let set = BandwidthSet::fixed(1.5, 1.5, 2.5, 2.5).unwrap();
        let policy = BandwidthPolicy::Frozen(set);
        let grid: Vec<f64> = (0..7).map(|i| 0.5 + 4.0 * i as f64 / 6.0).collect();
        let spec = camwe_spec();
        let cfg95 = BootstrapConfig::new(60, 0.95, 7).unwrap();
        let a = bootstrap_auc(&x, &y, &spec, &policy, &grid, &cfg95).unwrap();
        let b = bootstrap_auc(&x, &y, &spec, &policy, &grid, &cfg95).unwrap();
        assert_eq!(a, b); // bit identical

        let cfg90 = BootstrapConfig::new(60, 0.90, 7).unwrap();
        let narrow = bootstrap_auc(&x, &y, &spec, &policy, &grid, &cfg90).unwrap();
        for i in 0..grid.len() {
            assert!(a.lower[i] <= a.upper[i]);
            assert!(narrow.lower[i] >= a.lower[i] - 1e-15);
            assert!(narrow.upper[i] <= a.upper[i] + 1e-15);
        }
    }

    #[test]
    fn failure_rate_enforced() {
        let replicate_values: Vec<Option<Vec<f64>>> =
            (0..10).map(|i| if i < 8 { Some(alloc::vec![0.5]) } else { None }).collect();
        let err = aggregate_band(&[1.0], alloc::vec![0.5], &replicate_values, 0.95);
        assert!(matches!(err, Err(Error::BootstrapFailureRate { failed: 2, total: 10, .. })));
        // exactly at the 10% limit passes
        let replicate_values: Vec<Option<Vec<f64>>> =
            (0..10).map(|i| if i < 9 { Some(alloc::vec![0.5]) } else { None }).collect();
        let band = aggregate_band(&[1.0], alloc::vec![0.5], &replicate_values, 0.95).unwrap();
        assert_eq!(band.replicates_effective, 9);
        assert_eq!(band.failed_replicates, 1);
    }
}
