//! Simulation scenarios, true-AUC computation and Monte Carlo studies.
//!
//! Three data-generating models: a normal-noise heteroscedastic model, the
//! same model with rescaled Student-t₃ noise, and a log-normal model with
//! constant log-scale variance. Studies compare the normal closed form, the
//! CAMWE and the bivariate kernel estimator against the known truth, and
//! validate bootstrap bands against Monte Carlo bands.
//!
//! Every run draws from its own counter-derived RNG stream and all
//! reductions use fixed ordering, so results do not depend on scheduling.

use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;

use crate::bandwidth::{
    oracle_ise_auc_bandwidths, oracle_ise_bandwidth, select_all, BandwidthGrid, BandwidthSet,
    SelectionMethod,
};
use crate::bootstrap::{
    aggregate_band, bootstrap_replicate, estimate_on_grid, AucBand, BandwidthPolicy,
    BootstrapConfig, EstimatorSpec,
};
use crate::error::Error;
use crate::estimators::{AucEstimator, ExactCurves};
use crate::kernel::Kernel;
use crate::local_poly::{fit_mean, variance_observations, Population, SamplePairs};
use crate::normal;
use crate::quad::{simpson, trapezoid};
use crate::rng;
use crate::Result;

/// Noise family of a simulation scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum NoiseFamily {
    /// Standard normal errors (model 1).
    NormalNoise,
    /// Student-t₃ errors rescaled to unit variance (model 2).
    StudentT3,
    /// Log-normal responses with constant log-scale variance (model 3).
    LogNormal,
}

/// A data-generating scenario with known true mean/variance functions.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimScenario {
    pub noise: NoiseFamily,
    pub m: usize,
    pub n: usize,
    /// Multiplier on the noise draws; 1 normally, 0 for degenerate
    /// zero-noise checks.
    pub noise_scale: f64,
}

const LOGNORMAL_SIGMA2: f64 = 1.0 / 3.0;

impl SimScenario {
    pub fn new(noise: NoiseFamily, m: usize, n: usize) -> Self {
        SimScenario { noise, m, n, noise_scale: 1.0 }
    }

    /// Covariate interval: U[1,5] for models 1-2, U[0,1] for the log-normal
    /// model.
    pub fn covariate_interval(&self) -> (f64, f64) {
        match self.noise {
            NoiseFamily::NormalNoise | NoiseFamily::StudentT3 => (1.0, 5.0),
            NoiseFamily::LogNormal => (0.0, 1.0),
        }
    }

    /// True nondiseased mean f(z).
    pub fn f(&self, z: f64) -> f64 {
        match self.noise {
            NoiseFamily::NormalNoise | NoiseFamily::StudentT3 => {
                6.0 + 1.5 * z + 1.5 * libm::sin(z)
            }
            NoiseFamily::LogNormal => 1.0 - 0.5 * z - 0.25 * libm::sin(core::f64::consts::PI * z),
        }
    }

    /// True diseased mean g(z).
    pub fn g(&self, z: f64) -> f64 {
        match self.noise {
            NoiseFamily::NormalNoise | NoiseFamily::StudentT3 => {
                self.f(z) + libm::sqrt(z - 0.5)
            }
            NoiseFamily::LogNormal => self.f(z) + 1.5 * libm::sqrt(z + 0.5),
        }
    }

    /// True nondiseased variance v₁(z).
    pub fn v1(&self, z: f64) -> f64 {
        match self.noise {
            NoiseFamily::NormalNoise | NoiseFamily::StudentT3 => {
                0.3 + normal::cdf(2.0 * z - 6.0)
            }
            NoiseFamily::LogNormal => {
                let f = self.f(z);
                (libm::exp(LOGNORMAL_SIGMA2) - 1.0) * f * f
            }
        }
    }

    /// True diseased variance v₂(z).
    pub fn v2(&self, z: f64) -> f64 {
        match self.noise {
            NoiseFamily::NormalNoise | NoiseFamily::StudentT3 => {
                1.5 + normal::cdf(2.0 * z - 6.0)
            }
            NoiseFamily::LogNormal => {
                let g = self.g(z);
                (libm::exp(LOGNORMAL_SIGMA2) - 1.0) * g * g
            }
        }
    }

    /// The true curves packaged for estimators that accept a curve set
    /// (hypothetical-estimator studies).
    pub fn true_curves(&self) -> ExactCurves {
        let s = *self;
        ExactCurves {
            f: alloc::boxed::Box::new(move |z| s.f(z)),
            g: alloc::boxed::Box::new(move |z| s.g(z)),
            v1: alloc::boxed::Box::new(move |z| s.v1(z)),
            v2: alloc::boxed::Box::new(move |z| s.v2(z)),
        }
    }

    fn draw_noise(&self, rng: &mut impl RngCore) -> f64 {
        let e = match self.noise {
            NoiseFamily::NormalNoise | NoiseFamily::LogNormal => rng::standard_normal(rng),
            NoiseFamily::StudentT3 => rng::scaled_t3(rng),
        };
        self.noise_scale * e
    }

    fn draw_population<R: RngCore>(
        &self,
        pop: Population,
        count: usize,
        rng: &mut R,
    ) -> SamplePairs {
        let (lo, hi) = self.covariate_interval();
        let sigma = libm::sqrt(LOGNORMAL_SIGMA2);
        let mut zs = Vec::with_capacity(count);
        let mut vs = Vec::with_capacity(count);
        for _ in 0..count {
            let z = rng::uniform_in(rng, lo, hi);
            let e = self.draw_noise(rng);
            let marker = match self.noise {
                NoiseFamily::NormalNoise | NoiseFamily::StudentT3 => {
                    let (mean, var) = match pop {
                        Population::NonDiseasedX => (self.f(z), self.v1(z)),
                        Population::DiseasedY => (self.g(z), self.v2(z)),
                    };
                    mean + libm::sqrt(var) * e
                }
                NoiseFamily::LogNormal => {
                    let mean = match pop {
                        Population::NonDiseasedX => self.f(z),
                        Population::DiseasedY => self.g(z),
                    };
                    // log-scale mean: log(mean) − σ²/2
                    libm::exp(libm::log(mean) - LOGNORMAL_SIGMA2 / 2.0 + sigma * e)
                }
            };
            zs.push(z);
            vs.push(marker);
        }
        SamplePairs::new(zs, vs, pop).expect("generated data is finite")
    }

    /// Generate one dataset: m nondiseased and n diseased pairs.
    pub fn generate(&self, rng: &mut impl RngCore) -> (SamplePairs, SamplePairs) {
        let x = self.draw_population(Population::NonDiseasedX, self.m, rng);
        let y = self.draw_population(Population::DiseasedY, self.n, rng);
        (x, y)
    }

    /// True covariate-adjusted AUC A(z) = P(Y > X | Z = z).
    ///
    /// Normal noise uses the closed form; the log-normal model reduces to a
    /// closed form through the monotone log transform; t₃ noise is evaluated
    /// by quadrature of the convolution.
    pub fn true_auc(&self, z: f64) -> f64 {
        match self.noise {
            NoiseFamily::NormalNoise => {
                let delta = self.g(z) - self.f(z);
                normal::cdf(delta / libm::sqrt(self.v1(z) + self.v2(z)))
            }
            NoiseFamily::LogNormal => {
                // log is monotone: P(Y > X) = Φ({g₀ − f₀}/(σ√2))
                let sigma = libm::sqrt(LOGNORMAL_SIGMA2);
                let f0 = libm::log(self.f(z)) - LOGNORMAL_SIGMA2 / 2.0;
                let g0 = libm::log(self.g(z)) - LOGNORMAL_SIGMA2 / 2.0;
                normal::cdf((g0 - f0) / (sigma * libm::sqrt(2.0)))
            }
            NoiseFamily::StudentT3 => self.true_auc_quadrature(z),
        }
    }

    /// General-noise A(z) by quadrature:
    /// `A(z) = ∫ P(ε₂ > {f−g+√v₁ e}/√v₂) dF₁(e)`.
    pub fn true_auc_quadrature(&self, z: f64) -> f64 {
        let (survival, density): (fn(f64) -> f64, fn(f64) -> f64) = match self.noise {
            NoiseFamily::NormalNoise => (
                |t| normal::cdf(-t),
                normal::pdf,
            ),
            NoiseFamily::StudentT3 => (
                |t| 1.0 - scaled_t3_cdf(t),
                scaled_t3_pdf,
            ),
            NoiseFamily::LogNormal => {
                // standardized log-normal residual ε = (L − E[L])/sd(L)
                (
                    |t| 1.0 - std_lognormal_cdf(t),
                    std_lognormal_pdf,
                )
            }
        };
        let f = self.f(z);
        let g = self.g(z);
        let s1 = libm::sqrt(self.v1(z));
        let s2 = libm::sqrt(self.v2(z));
        let integrand = |e: f64| survival((f - g + s1 * e) / s2) * density(e);
        match self.noise {
            // heavy t₃ tails need a wide window
            NoiseFamily::StudentT3 => simpson(integrand, -150.0, 150.0, 120_001),
            NoiseFamily::NormalNoise => simpson(integrand, -10.0, 10.0, 8_001),
            NoiseFamily::LogNormal => {
                // support of ε is (−E/sd, ∞)
                let sd = libm::sqrt(libm::exp(LOGNORMAL_SIGMA2) * (libm::exp(LOGNORMAL_SIGMA2) - 1.0));
                let lower = -libm::exp(LOGNORMAL_SIGMA2 / 2.0) / sd + 1e-12;
                simpson(integrand, lower, 60.0, 120_001)
            }
        }
    }
}

/// CDF of a t₃ variate rescaled to unit variance (t/√3).
fn scaled_t3_cdf(e: f64) -> f64 {
    let x = libm::sqrt(3.0) * e; // back on the t₃ scale
    let s3 = libm::sqrt(3.0);
    0.5 + ((x / s3) / (1.0 + x * x / 3.0) + libm::atan(x / s3)) / core::f64::consts::PI
}

/// Density of the unit-variance rescaled t₃ variate.
fn scaled_t3_pdf(e: f64) -> f64 {
    let x = libm::sqrt(3.0) * e;
    let base = 2.0 / (core::f64::consts::PI * libm::sqrt(3.0))
        / ((1.0 + x * x / 3.0) * (1.0 + x * x / 3.0));
    libm::sqrt(3.0) * base
}

/// CDF of the standardized log-normal residual (exp(σN) centered and scaled
/// to zero mean, unit variance) with σ² = 1/3.
fn std_lognormal_cdf(e: f64) -> f64 {
    let s2 = LOGNORMAL_SIGMA2;
    let mean = libm::exp(s2 / 2.0);
    let sd = libm::sqrt(libm::exp(s2) * (libm::exp(s2) - 1.0));
    let l = e * sd + mean;
    if l <= 0.0 {
        return 0.0;
    }
    normal::cdf(libm::log(l) / libm::sqrt(s2))
}

fn std_lognormal_pdf(e: f64) -> f64 {
    let s2 = LOGNORMAL_SIGMA2;
    let mean = libm::exp(s2 / 2.0);
    let sd = libm::sqrt(libm::exp(s2) * (libm::exp(s2) - 1.0));
    let l = e * sd + mean;
    if l <= 0.0 {
        return 0.0;
    }
    let sigma = libm::sqrt(s2);
    sd * normal::pdf(libm::log(l) / sigma) / (l * sigma)
}

/// Default evaluation grid: 41 equispaced points over the interior 90% of
/// the covariate interval.
pub fn default_z_grid(scenario: &SimScenario) -> Vec<f64> {
    let (lo, hi) = scenario.covariate_interval();
    let range = hi - lo;
    let (a, b) = (lo + 0.05 * range, hi - 0.05 * range);
    (0..41).map(|i| a + (b - a) * i as f64 / 40.0).collect()
}

/// How the study selects smoothing bandwidths per run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BandwidthStrategy {
    /// Minimize true ISE per function (simulation only).
    OracleIse,
    /// Leave-one-out CV per function.
    LooCv,
}

/// Configuration of a Monte Carlo MSE comparison.
#[derive(Debug, Clone)]
pub struct MseStudyConfig {
    pub scenario: SimScenario,
    pub runs: usize,
    pub estimators: Vec<AucEstimator>,
    pub policy: BandwidthStrategy,
    pub order_p: usize,
    pub kernel: Kernel,
    pub z_grid: Vec<f64>,
    /// Candidate grid for the four smoothing bandwidths.
    pub bw_grid: BandwidthGrid,
    /// Candidate grid per axis for the bivariate-kernel oracle scan.
    pub ak_grid: BandwidthGrid,
    pub seed: u64,
}

impl MseStudyConfig {
    pub fn with_defaults(
        scenario: SimScenario,
        runs: usize,
        estimators: Vec<AucEstimator>,
        policy: BandwidthStrategy,
        seed: u64,
    ) -> Result<Self> {
        let (lo, hi) = scenario.covariate_interval();
        let range = hi - lo;
        Ok(MseStudyConfig {
            scenario,
            runs,
            estimators,
            policy,
            order_p: 1,
            kernel: Kernel::epanechnikov(),
            z_grid: default_z_grid(&scenario),
            bw_grid: BandwidthGrid::default_for_range(range)?,
            // Capped at a quarter of the covariate range: near-range bandwidths
            // would turn the local estimator into a global pool.
            ak_grid: BandwidthGrid::log_spaced(0.05 * range, 0.25 * range, 8)?,
            seed,
        })
    }
}

/// Monte Carlo mean squared errors per estimator per grid point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimResult {
    pub z_grid: Vec<f64>,
    pub estimators: Vec<AucEstimator>,
    /// mse[e][i] for estimator e at z_grid[i].
    pub mse: Vec<Vec<f64>>,
    pub true_auc: Vec<f64>,
    pub runs: usize,
    pub effective_runs: usize,
    pub failed_runs: usize,
    pub seed: u64,
}

impl SimResult {
    /// Trapezoid-integrated MSE over the grid for estimator index e.
    pub fn integrated_mse(&self, e: usize) -> f64 {
        trapezoid(&self.z_grid, &self.mse[e])
    }
}

/// Select bandwidths for one simulated dataset under the study policy.
fn study_bandwidths(
    cfg: &MseStudyConfig,
    x_data: &SamplePairs,
    y_data: &SamplePairs,
) -> Result<BandwidthSet> {
    match cfg.policy {
        BandwidthStrategy::LooCv => {
            select_all(x_data, y_data, cfg.order_p, cfg.kernel, &cfg.bw_grid)
        }
        BandwidthStrategy::OracleIse => {
            let s = &cfg.scenario;
            let h1 = oracle_ise_bandwidth(
                |z| s.f(z),
                x_data,
                cfg.order_p,
                cfg.kernel,
                &cfg.bw_grid,
                &cfg.z_grid,
            )?;
            let h2 = oracle_ise_bandwidth(
                |z| s.g(z),
                y_data,
                cfg.order_p,
                cfg.kernel,
                &cfg.bw_grid,
                &cfg.z_grid,
            )?;
            // oracle bandwidths are only feasibility-checked on the eval
            // grid, so widen when extracting residuals at the observations
            let f_hat = fit_mean(x_data, cfg.order_p, h1, cfg.kernel)?.with_widening(true);
            let g_hat = fit_mean(y_data, cfg.order_p, h2, cfg.kernel)?.with_widening(true);
            let rx = variance_observations(x_data, &f_hat)?;
            let ry = variance_observations(y_data, &g_hat)?;
            let b1 = oracle_ise_bandwidth(
                |z| s.v1(z),
                &rx,
                cfg.order_p,
                cfg.kernel,
                &cfg.bw_grid,
                &cfg.z_grid,
            )?;
            let b2 = oracle_ise_bandwidth(
                |z| s.v2(z),
                &ry,
                cfg.order_p,
                cfg.kernel,
                &cfg.bw_grid,
                &cfg.z_grid,
            )?;
            Ok(BandwidthSet { h1, h2, b1, b2, method: SelectionMethod::OracleIse, cv_scores: None })
        }
    }
}

/// One Monte Carlo run: per-estimator squared errors on the grid.
///
/// Public so parallel drivers can farm runs out and aggregate with
/// [`aggregate_mse`]; run `index` fixes the RNG stream.
pub fn mse_run(cfg: &MseStudyConfig, truth: &[f64], index: u64) -> Result<Vec<Vec<f64>>> {
    let mut stream = rng::stream(cfg.seed, index);
    let (x_data, y_data) = cfg.scenario.generate(&mut stream);
    let needs_fit = cfg
        .estimators
        .iter()
        .any(|e| matches!(e, AucEstimator::NormalClosedForm | AucEstimator::Camwe));
    let bandwidths = if needs_fit {
        study_bandwidths(cfg, &x_data, &y_data)?
    } else {
        BandwidthSet::fixed(1.0, 1.0, 1.0, 1.0)?
    };
    // bivariate kernel bandwidths come from their own oracle scan; CV does
    // not apply to this estimator. The scan evaluates the truth on the study
    // grid, which is already precomputed in `truth`.
    let ak = if cfg.estimators.contains(&AucEstimator::BivariateKernel) {
        let lookup = |z: f64| {
            let i = cfg
                .z_grid
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - z).abs().total_cmp(&(b.1 - z).abs()))
                .map(|(i, _)| i)
                .unwrap_or(0);
            truth[i]
        };
        Some(oracle_ise_auc_bandwidths(
            lookup,
            &x_data,
            &y_data,
            cfg.kernel,
            &cfg.ak_grid,
            &cfg.ak_grid,
            &cfg.z_grid,
        )?)
    } else {
        None
    };

    let mut out = Vec::with_capacity(cfg.estimators.len());
    for est in &cfg.estimators {
        let spec = EstimatorSpec {
            estimator: *est,
            order_p: cfg.order_p,
            kernel: cfg.kernel,
            clamp: false,
            kernel_bandwidths: ak,
            // boundary observations would otherwise abort runs whose
            // oracle/CV bandwidth is only checked on the evaluation grid
            widen_on_sparse: true,
        };
        let values = estimate_on_grid(&x_data, &y_data, &spec, &bandwidths, &cfg.z_grid)?;
        out.push(
            values.iter().zip(truth).map(|(v, t)| (v - t) * (v - t)).collect::<Vec<f64>>(),
        );
    }
    Ok(out)
}

/// Precompute the true AUC over the study grid.
pub fn true_auc_on_grid(scenario: &SimScenario, z_grid: &[f64]) -> Vec<f64> {
    z_grid.iter().map(|&z| scenario.true_auc(z)).collect()
}

const RUN_FAILURE_LIMIT_PERCENT: u8 = 5;

/// Fold per-run squared errors into Monte Carlo MSE curves.
pub fn aggregate_mse(
    cfg: &MseStudyConfig,
    truth: Vec<f64>,
    per_run: &[Option<Vec<Vec<f64>>>],
) -> Result<SimResult> {
    let total = per_run.len();
    let failed = per_run.iter().filter(|r| r.is_none()).count();
    if failed * 100 > total * RUN_FAILURE_LIMIT_PERCENT as usize {
        return Err(Error::StudyFailureRate {
            failed,
            total,
            limit_percent: RUN_FAILURE_LIMIT_PERCENT,
        });
    }
    let effective = total - failed;
    let ne = cfg.estimators.len();
    let ng = cfg.z_grid.len();
    let mut mse = vec![vec![0.0; ng]; ne];
    for run in per_run.iter().flatten() {
        for e in 0..ne {
            for i in 0..ng {
                mse[e][i] += run[e][i];
            }
        }
    }
    for row in &mut mse {
        for v in row.iter_mut() {
            *v /= effective as f64;
        }
    }
    Ok(SimResult {
        z_grid: cfg.z_grid.clone(),
        estimators: cfg.estimators.clone(),
        mse,
        true_auc: truth,
        runs: total,
        effective_runs: effective,
        failed_runs: failed,
        seed: cfg.seed,
    })
}

/// Serial Monte Carlo MSE study.
pub fn run_mse_study(cfg: &MseStudyConfig) -> Result<SimResult> {
    if cfg.runs == 0 {
        return Err(Error::InvalidSample("study needs at least one run".into()));
    }
    let truth = true_auc_on_grid(&cfg.scenario, &cfg.z_grid);
    let per_run: Vec<Option<Vec<Vec<f64>>>> =
        (0..cfg.runs).map(|r| mse_run(cfg, &truth, r as u64).ok()).collect();
    aggregate_mse(cfg, truth, &per_run)
}

/// Configuration of a bootstrap-band validation study (CAMWE).
#[derive(Debug, Clone)]
pub struct BandStudyConfig {
    pub scenario: SimScenario,
    pub runs: usize,
    pub bootstrap_replicates: usize,
    pub level: f64,
    pub order_p: usize,
    pub kernel: Kernel,
    pub z_grid: Vec<f64>,
    pub bw_grid: BandwidthGrid,
    /// Re-run CV bandwidth selection inside every bootstrap replicate instead
    /// of freezing the original-data selection. Slower, but reflects the
    /// selection variability that the Monte Carlo benchmark contains.
    pub per_replicate_cv: bool,
    pub seed: u64,
}

impl BandStudyConfig {
    pub fn with_defaults(
        scenario: SimScenario,
        runs: usize,
        bootstrap_replicates: usize,
        seed: u64,
    ) -> Result<Self> {
        let (lo, hi) = scenario.covariate_interval();
        Ok(BandStudyConfig {
            scenario,
            runs,
            bootstrap_replicates,
            level: 0.95,
            order_p: 1,
            kernel: Kernel::epanechnikov(),
            z_grid: default_z_grid(&scenario),
            bw_grid: BandwidthGrid::default_for_range(hi - lo)?,
            per_replicate_cv: false,
            seed,
        })
    }
}

/// Band-study output: Monte Carlo benchmark vs averaged bootstrap bands.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BandStudyResult {
    pub z_grid: Vec<f64>,
    /// Monte Carlo percentile band of the point estimates across runs.
    pub mc_lower: Vec<f64>,
    pub mc_upper: Vec<f64>,
    pub mc_variance: Vec<f64>,
    /// Averages of the per-run bootstrap quantities.
    pub avg_boot_lower: Vec<f64>,
    pub avg_boot_upper: Vec<f64>,
    pub avg_boot_variance: Vec<f64>,
    pub runs: usize,
    pub effective_runs: usize,
    pub failed_runs: usize,
    pub bootstrap_replicates: usize,
    pub level: f64,
    pub seed: u64,
}

/// One band-study run: CV bandwidths, CAMWE point estimates, and a frozen-
/// bandwidth bootstrap band. Stream layout: data generation uses stream
/// `index`; the bootstrap derives a fresh master seed per run so replicate
/// streams never collide with generation streams.
pub fn band_run(cfg: &BandStudyConfig, index: u64) -> Result<(Vec<f64>, AucBand)> {
    let mut stream = rng::stream(cfg.seed, index);
    let (x_data, y_data) = cfg.scenario.generate(&mut stream);
    let bandwidths = select_all(&x_data, &y_data, cfg.order_p, cfg.kernel, &cfg.bw_grid)?;
    let spec = EstimatorSpec {
        estimator: AucEstimator::Camwe,
        order_p: cfg.order_p,
        kernel: cfg.kernel,
        clamp: false,
        kernel_bandwidths: None,
        widen_on_sparse: true,
    };
    let policy = if cfg.per_replicate_cv {
        BandwidthPolicy::PerReplicateCv(cfg.bw_grid.clone())
    } else {
        BandwidthPolicy::Frozen(bandwidths.clone())
    };
    let points = estimate_on_grid(&x_data, &y_data, &spec, &bandwidths, &cfg.z_grid)?;
    let boot_seed = rng::derive_seed(cfg.seed, 0xB007 + index);
    let replicate_values: Vec<Option<Vec<f64>>> = (0..cfg.bootstrap_replicates)
        .map(|b| {
            bootstrap_replicate(&x_data, &y_data, &spec, &policy, &cfg.z_grid, boot_seed, b as u64)
                .ok()
        })
        .collect();
    let band = aggregate_band(&cfg.z_grid, points.clone(), &replicate_values, cfg.level)?;
    Ok((points, band))
}

/// Fold per-run outputs into the Monte Carlo vs bootstrap comparison.
pub fn aggregate_band_study(
    cfg: &BandStudyConfig,
    per_run: &[Option<(Vec<f64>, AucBand)>],
) -> Result<BandStudyResult> {
    let total = per_run.len();
    let failed = per_run.iter().filter(|r| r.is_none()).count();
    if failed * 100 > total * RUN_FAILURE_LIMIT_PERCENT as usize {
        return Err(Error::StudyFailureRate {
            failed,
            total,
            limit_percent: RUN_FAILURE_LIMIT_PERCENT,
        });
    }
    let effective = total - failed;
    if effective < 2 {
        return Err(Error::InvalidSample("band study needs at least 2 effective runs".into()));
    }
    let ng = cfg.z_grid.len();
    let mut mc_lower = Vec::with_capacity(ng);
    let mut mc_upper = Vec::with_capacity(ng);
    let mut mc_variance = Vec::with_capacity(ng);
    let mut avg_boot_lower = vec![0.0; ng];
    let mut avg_boot_upper = vec![0.0; ng];
    let mut avg_boot_variance = vec![0.0; ng];
    for i in 0..ng {
        let mut points: Vec<f64> = Vec::with_capacity(effective);
        for (p, band) in per_run.iter().flatten() {
            points.push(p[i]);
            avg_boot_lower[i] += band.lower[i];
            avg_boot_upper[i] += band.upper[i];
            avg_boot_variance[i] += band.variance[i];
        }
        let (lo, hi) = crate::bootstrap::percentile_interval(&points, cfg.level)?;
        mc_lower.push(lo);
        mc_upper.push(hi);
        let mean = points.iter().sum::<f64>() / points.len() as f64;
        mc_variance.push(
            points.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / (points.len() - 1) as f64,
        );
        avg_boot_lower[i] /= effective as f64;
        avg_boot_upper[i] /= effective as f64;
        avg_boot_variance[i] /= effective as f64;
    }
    Ok(BandStudyResult {
        z_grid: cfg.z_grid.clone(),
        mc_lower,
        mc_upper,
        mc_variance,
        avg_boot_lower,
        avg_boot_upper,
        avg_boot_variance,
        runs: total,
        effective_runs: effective,
        failed_runs: failed,
        bootstrap_replicates: cfg.bootstrap_replicates,
        level: cfg.level,
        seed: cfg.seed,
    })
}

/// Serial bootstrap-band validation study.
pub fn run_band_study(cfg: &BandStudyConfig) -> Result<BandStudyResult> {
    if cfg.runs < 2 {
        return Err(Error::InvalidSample("band study needs at least 2 runs".into()));
    }
    BootstrapConfig::new(cfg.bootstrap_replicates, cfg.level, cfg.seed)?;
    let per_run: Vec<Option<(Vec<f64>, AucBand)>> =
        (0..cfg.runs).map(|r| band_run(cfg, r as u64).ok()).collect();
    aggregate_band_study(cfg, &per_run)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model1_means_with_zero_noise() {
        // x = 6 + 4.5 + 1.5 sin 3, y = x + √2.5 at z = 3
        let s = SimScenario::new(NoiseFamily::NormalNoise, 5, 5);
        let x = s.f(3.0);
        assert!((x - (6.0 + 4.5 + 1.5 * (3.0f64).sin())).abs() < 1e-12);
        assert!((s.g(3.0) - (x + 2.5f64.sqrt())).abs() < 1e-12);
        assert!((s.v1(3.0) - 0.8).abs() < 1e-12);
        assert!((s.v2(3.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lognormal_identities() {
        let s = SimScenario::new(NoiseFamily::LogNormal, 5, 5);
        // v₁(0) = (e^{1/3} − 1)·f(0)² with f(0) = 1
        assert!((s.f(0.0) - 1.0).abs() < 1e-12);
        assert!((s.v1(0.0) - ((1.0f64 / 3.0).exp() - 1.0)).abs() < 1e-12);
        assert!((s.v1(0.0) - 0.395_612_425).abs() < 1e-6);
    }

    #[test]
    fn true_auc_anchors() {
        let s = SimScenario::new(NoiseFamily::NormalNoise, 5, 5);
        // boundary of the √ term: g = f at z = 0.5 (outside covariate range
        // but the formula is still defined)
        assert!((s.true_auc(0.5) - 0.5).abs() < 1e-12);
        let expected = normal::cdf((2.5f64).sqrt() / (2.8f64).sqrt());
        assert!((s.true_auc(3.0) - expected).abs() < 1e-12);
        assert!((expected - 0.8277).abs() < 5e-4);
        // A(z) > 0.5 whenever g > f
        for i in 0..=20 {
            let z = 1.0 + 4.0 * i as f64 / 20.0;
            assert!(s.true_auc(z) > 0.5);
        }
    }

    #[test]
    fn lognormal_quadrature_matches_closed_form() {
        let s = SimScenario::new(NoiseFamily::LogNormal, 5, 5);
        for &z in &[0.1, 0.35, 0.6, 0.9] {
            let closed = s.true_auc(z);
            let quad = s.true_auc_quadrature(z);
            assert!((closed - quad).abs() < 1e-6, "z = {z}: {closed} vs {quad}");
        }
    }

    #[test]
    fn normal_quadrature_matches_closed_form() {
        let s = SimScenario::new(NoiseFamily::NormalNoise, 5, 5);
        for &z in &[1.2, 3.0, 4.8] {
            assert!((s.true_auc(z) - s.true_auc_quadrature(z)).abs() < 1e-9);
        }
    }

    #[test]
    fn t3_noise_tools_are_proper() {
        // density integrates to 1 with unit variance
        let mass = simpson(scaled_t3_pdf, -150.0, 150.0, 120_001);
        assert!((mass - 1.0).abs() < 1e-6);
        // cdf is the integral of the pdf
        let c = simpson(scaled_t3_pdf, -150.0, 0.7, 120_001);
        assert!((c - scaled_t3_cdf(0.7)).abs() < 1e-6);
    }

    #[test]
    fn generation_is_deterministic_per_stream() {
        let s = SimScenario::new(NoiseFamily::StudentT3, 12, 9);
        let (x1, y1) = s.generate(&mut rng::stream(5, 3));
        let (x2, y2) = s.generate(&mut rng::stream(5, 3));
        assert_eq!(x1, x2);
        assert_eq!(y1, y2);
        let (x3, _) = s.generate(&mut rng::stream(5, 4));
        assert_ne!(x1, x3);
        assert_eq!(x1.len(), 12);
        assert_eq!(y1.len(), 9);
        let (lo, hi) = s.covariate_interval();
        assert!(x1.covariates().iter().all(|&z| z >= lo && z <= hi));
    }

    #[test]
    fn zero_noise_markers_sit_on_the_curves() {
        for noise in [NoiseFamily::NormalNoise, NoiseFamily::StudentT3, NoiseFamily::LogNormal] {
            let mut s = SimScenario::new(noise, 20, 20);
            s.noise_scale = 0.0;
            let (x, y) = s.generate(&mut rng::stream(9, 0));
            for (&z, &v) in x.covariates().iter().zip(x.markers()) {
                let expect = match noise {
                    NoiseFamily::LogNormal => {
                        // σε = 0 leaves exp(log f − σ²/2)
                        libm::exp(libm::log(s.f(z)) - 1.0 / 6.0)
                    }
                    _ => s.f(z),
                };
                assert!((v - expect).abs() < 1e-12);
            }
            for (&z, &v) in y.covariates().iter().zip(y.markers()) {
                let expect = match noise {
                    NoiseFamily::LogNormal => libm::exp(libm::log(s.g(z)) - 1.0 / 6.0),
                    _ => s.g(z),
                };
                assert!((v - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tiny_band_study_reproduces_hand_trace() {
        let s = SimScenario::new(NoiseFamily::NormalNoise, 15, 15);
        let mut cfg = BandStudyConfig::with_defaults(s, 2, 2, 11).unwrap();
        cfg.z_grid = alloc::vec![2.5, 3.5];
        cfg.bw_grid = BandwidthGrid::new(alloc::vec![1.5, 3.0]).unwrap();
        let res = run_band_study(&cfg).unwrap();
        // hand trace: recompute both runs through the public pieces
        let (p0, b0) = band_run(&cfg, 0).unwrap();
        let (p1, b1) = band_run(&cfg, 1).unwrap();
        for i in 0..2 {
            let lo = p0[i].min(p1[i]);
            let hi = p0[i].max(p1[i]);
            let spread = hi - lo;
            assert_eq!(res.mc_lower[i], lo + 0.025 * spread);
            assert_eq!(res.mc_upper[i], lo + 0.975 * spread);
            let mean = (p0[i] + p1[i]) / 2.0;
            let var = (p0[i] - mean).powi(2) + (p1[i] - mean).powi(2);
            assert_eq!(res.mc_variance[i], var);
            assert_eq!(res.avg_boot_variance[i], (b0.variance[i] + b1.variance[i]) / 2.0);
        }
    }

    #[test]
    fn mse_study_deterministic_and_decreasing_under_truth() {
        let s = SimScenario::new(NoiseFamily::NormalNoise, 25, 25);
        let cfg = MseStudyConfig::with_defaults(
            s,
            4,
            alloc::vec![AucEstimator::Camwe],
            BandwidthStrategy::OracleIse,
            3,
        )
        .unwrap();
        let a = run_mse_study(&cfg).unwrap();
        let b = run_mse_study(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.mse[0].iter().all(|&v| v >= 0.0));
        assert_eq!(a.effective_runs + a.failed_runs, 4);
    }
}
