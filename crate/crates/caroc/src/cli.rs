//! Command definitions and orchestration.

use std::path::PathBuf;

use caroc_core::bandwidth::{select_all, BandwidthGrid, BandwidthSet};
use caroc_core::bootstrap::estimate_on_grid;
use caroc_core::estimators::{
    roc_area, roc_curve_camwe, roc_curve_normal, standardized_residuals, working_sample,
    youden_index, CurveSet,
};
use caroc_core::kernel::Kernel;
use caroc_core::local_poly::fit_all_widened;
use caroc_core::sim::{
    BandStudyConfig, BandwidthStrategy, MseStudyConfig, NoiseFamily, SimScenario,
};
use caroc_core::{
    AucEstimator, BandwidthPolicy, BootstrapConfig, EstimatorSpec, SamplePairs,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::io::ingest;
use crate::parallel::{self, with_threads};
use crate::result::{
    band_study_out, mse_study_out, BandOut, BandwidthsOut, FitOut, ResultDoc, RocOut, RocPointOut,
};
use crate::AppError;

#[derive(Debug, Parser)]
#[command(
    name = "caroc",
    version,
    about = "Covariate-adjusted ROC curve and AUC estimation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the mean and variance curves of both populations.
    Fit(FitArgs),
    /// Estimate the covariate-adjusted AUC over a covariate grid.
    Auc(AucArgs),
    /// Compute a covariate-adjusted ROC curve at one covariate value.
    Roc(RocArgs),
    /// Bootstrap pointwise confidence bands for the AUC.
    Bootstrap(BootstrapArgs),
    /// Run a Monte Carlo simulation study.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelName {
    Epanechnikov,
    Biweight,
    Triweight,
    Gaussian,
}

impl KernelName {
    fn build(self) -> Kernel {
        match self {
            KernelName::Epanechnikov => Kernel::epanechnikov(),
            KernelName::Biweight => Kernel::biweight(),
            KernelName::Triweight => Kernel::triweight(),
            KernelName::Gaussian => Kernel::gaussian_truncated(),
        }
    }

    fn label(self) -> &'static str {
        match self {
            KernelName::Epanechnikov => "epanechnikov",
            KernelName::Biweight => "biweight",
            KernelName::Triweight => "triweight",
            KernelName::Gaussian => "gaussian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorName {
    Camwe,
    Normal,
    Kernel,
    MannWhitney,
}

impl EstimatorName {
    fn build(self) -> AucEstimator {
        match self {
            EstimatorName::Camwe => AucEstimator::Camwe,
            EstimatorName::Normal => AucEstimator::NormalClosedForm,
            EstimatorName::Kernel => AucEstimator::BivariateKernel,
            EstimatorName::MannWhitney => AucEstimator::MannWhitneyUnadjusted,
        }
    }

    fn label(self) -> &'static str {
        match self {
            EstimatorName::Camwe => "camwe",
            EstimatorName::Normal => "normal",
            EstimatorName::Kernel => "kernel",
            EstimatorName::MannWhitney => "mann_whitney",
        }
    }
}

/// Options shared by the data-analysis commands.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Input CSV with header `group,z,marker`.
    #[arg(long)]
    pub input: PathBuf,
    /// Local polynomial order (odd).
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    /// Smoothing kernel.
    #[arg(long, value_enum, default_value_t = KernelName::Epanechnikov)]
    pub kernel: KernelName,
    /// Evaluation grid as `zmin,zmax,count`; default: 41 points over the
    /// interior 90% of the overlap of the two covariate ranges.
    #[arg(long)]
    pub grid: Option<String>,
    /// Fixed bandwidths `h1,h2,b1,b2`; skips cross-validation.
    #[arg(long)]
    pub bandwidths: Option<String>,
    /// CV candidate grid as `min,max,count` (log-spaced); default: 15
    /// candidates from 0.05 to 1.0 times the covariate range.
    #[arg(long)]
    pub bw_grid: Option<String>,
    /// Natural-log transform the markers before fitting.
    #[arg(long)]
    pub log_response: bool,
    /// Double the bandwidth (up to 3 times) at evaluation points with too
    /// few neighbours instead of failing.
    #[arg(long)]
    pub widen_on_sparse: bool,
    /// Master RNG seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON document here as well as to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct AucArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value_t = EstimatorName::Camwe)]
    pub estimator: EstimatorName,
    /// Restrict estimates to [0.5, 1].
    #[arg(long)]
    pub clamp: bool,
    /// `hx,hy` for the bivariate kernel estimator.
    #[arg(long)]
    pub kernel_bandwidths: Option<String>,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value_t = EstimatorName::Camwe)]
    pub estimator: EstimatorName,
    /// Covariate value at which to compute the curve.
    #[arg(long)]
    pub z: f64,
    /// Number of interior false-positive-rate points for the normal ROC.
    #[arg(long, default_value_t = 999)]
    pub fpr_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RefitPolicy {
    /// Reuse the bandwidths selected on the original data.
    Frozen,
    /// Re-run cross-validation on every bootstrap replicate.
    PerReplicate,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value_t = EstimatorName::Camwe)]
    pub estimator: EstimatorName,
    #[arg(long)]
    pub clamp: bool,
    #[arg(long)]
    pub kernel_bandwidths: Option<String>,
    /// Number of bootstrap replicates.
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    /// Band confidence level.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, value_enum, default_value_t = RefitPolicy::Frozen)]
    pub refit_bandwidths: RefitPolicy,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioName {
    Normal,
    T3,
    Lognormal,
}

impl ScenarioName {
    fn noise(self) -> NoiseFamily {
        match self {
            ScenarioName::Normal => NoiseFamily::NormalNoise,
            ScenarioName::T3 => NoiseFamily::StudentT3,
            ScenarioName::Lognormal => NoiseFamily::LogNormal,
        }
    }

    fn label(self) -> &'static str {
        match self {
            ScenarioName::Normal => "normal",
            ScenarioName::T3 => "t3",
            ScenarioName::Lognormal => "lognormal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StudyKind {
    /// Monte Carlo MSE comparison of the estimators.
    Mse,
    /// Bootstrap bands vs Monte Carlo bands.
    Band,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyName {
    /// Oracle integrated-squared-error bandwidths (truth known).
    Oracle,
    /// Leave-one-out cross-validated bandwidths.
    Cv,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub scenario: ScenarioName,
    #[arg(long, value_enum, default_value_t = StudyKind::Mse)]
    pub study: StudyKind,
    /// Monte Carlo runs.
    #[arg(long)]
    pub runs: usize,
    /// Nondiseased sample size.
    #[arg(long, default_value_t = 40)]
    pub m: usize,
    /// Diseased sample size.
    #[arg(long, default_value_t = 40)]
    pub n: usize,
    /// Bandwidth policy for MSE studies.
    #[arg(long, value_enum, default_value_t = PolicyName::Oracle)]
    pub policy: PolicyName,
    /// Estimators for MSE studies, comma separated.
    #[arg(long, default_value = "camwe,normal,kernel")]
    pub estimators: String,
    /// Bootstrap replicates for band studies.
    #[arg(long, default_value_t = 500)]
    pub replicates: usize,
    /// Band confidence level for band studies.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Bandwidth handling inside band-study bootstrap replicates.
    #[arg(long, value_enum, default_value_t = RefitPolicy::Frozen)]
    pub refit_bandwidths: RefitPolicy,
    /// Evaluation grid as `zmin,zmax,count`.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_triplet(raw: &str, what: &str) -> Result<(f64, f64, usize), AppError> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 3 {
        return Err(AppError::Input(format!("--{what} expects `a,b,count`, got `{raw}`")));
    }
    let a: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| AppError::Input(format!("--{what}: bad number `{}`", parts[0])))?;
    let b: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| AppError::Input(format!("--{what}: bad number `{}`", parts[1])))?;
    let count: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| AppError::Input(format!("--{what}: bad count `{}`", parts[2])))?;
    if count == 0 || !a.is_finite() || !b.is_finite() {
        return Err(AppError::Input(format!("--{what}: values must be finite, count > 0")));
    }
    Ok((a, b, count))
}

fn parse_grid_spec(raw: &str) -> Result<Vec<f64>, AppError> {
    let (zmin, zmax, count) = parse_triplet(raw, "grid")?;
    if !(zmax > zmin) && count > 1 {
        return Err(AppError::Input(format!("--grid: need zmin < zmax, got `{raw}`")));
    }
    if count == 1 {
        return Ok(vec![zmin]);
    }
    Ok((0..count)
        .map(|i| zmin + (zmax - zmin) * i as f64 / (count - 1) as f64)
        .collect())
}

fn parse_pair(raw: &str, what: &str) -> Result<(f64, f64), AppError> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 2 {
        return Err(AppError::Input(format!("--{what} expects `a,b`, got `{raw}`")));
    }
    let a: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| AppError::Input(format!("--{what}: bad number `{}`", parts[0])))?;
    let b: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| AppError::Input(format!("--{what}: bad number `{}`", parts[1])))?;
    Ok((a, b))
}

fn parse_bandwidths(raw: &str) -> Result<BandwidthSet, AppError> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 4 {
        return Err(AppError::Input(format!(
            "--bandwidths expects `h1,h2,b1,b2`, got `{raw}`"
        )));
    }
    let mut vals = [0.0f64; 4];
    for (slot, part) in vals.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| AppError::Input(format!("--bandwidths: bad number `{part}`")))?;
    }
    BandwidthSet::fixed(vals[0], vals[1], vals[2], vals[3])
        .map_err(|e| AppError::Input(format!("--bandwidths: {e}")))
}

/// Default evaluation grid: 41 equispaced points over the interior 90% of
/// the overlap of the two covariate ranges.
fn default_grid(x: &SamplePairs, y: &SamplePairs) -> Result<Vec<f64>, AppError> {
    let (x_lo, x_hi) = x.covariate_range();
    let (y_lo, y_hi) = y.covariate_range();
    let lo = x_lo.max(y_lo);
    let hi = x_hi.min(y_hi);
    if !(hi > lo) {
        return Err(AppError::Input(
            "covariate ranges of the two groups do not overlap; pass --grid".into(),
        ));
    }
    let range = hi - lo;
    let (a, b) = (lo + 0.05 * range, hi - 0.05 * range);
    Ok((0..41).map(|i| a + (b - a) * i as f64 / 40.0).collect())
}

struct Prepared {
    x: SamplePairs,
    y: SamplePairs,
    z_grid: Vec<f64>,
    bandwidths: BandwidthSet,
    bw_grid: BandwidthGrid,
    kernel: Kernel,
}

/// Shared setup: ingest, resolve the grid, and select or accept bandwidths.
fn prepare(common: &CommonArgs) -> Result<Prepared, AppError> {
    if common.order % 2 == 0 {
        return Err(AppError::Input(format!(
            "--order must be odd, got {}",
            common.order
        )));
    }
    let (x, y) = ingest(&common.input, common.log_response)?;
    let z_grid = match &common.grid {
        Some(raw) => parse_grid_spec(raw)?,
        None => default_grid(&x, &y)?,
    };
    let kernel = common.kernel.build();
    let (x_lo, x_hi) = x.covariate_range();
    let (y_lo, y_hi) = y.covariate_range();
    let range = x_hi.max(y_hi) - x_lo.min(y_lo);
    let bw_grid = match &common.bw_grid {
        Some(raw) => {
            let (min, max, count) = parse_triplet(raw, "bw-grid")?;
            BandwidthGrid::log_spaced(min, max, count)
                .map_err(|e| AppError::Input(format!("--bw-grid: {e}")))?
        }
        None => BandwidthGrid::default_for_range(range)
            .map_err(|e| AppError::Input(format!("covariate range {range}: {e}")))?,
    };
    let bandwidths = match &common.bandwidths {
        Some(raw) => parse_bandwidths(raw)?,
        None => select_all(&x, &y, common.order, kernel, &bw_grid)?,
    };
    Ok(Prepared { x, y, z_grid, bandwidths, bw_grid, kernel })
}

fn base_doc(command: &str, common: &CommonArgs, prepared: &Prepared) -> ResultDoc {
    let mut doc = ResultDoc::new(command, common.seed);
    doc.order_p = Some(common.order);
    doc.kernel = Some(common.kernel.label().into());
    doc.log_response = Some(common.log_response);
    doc.bandwidths = Some(BandwidthsOut::from(&prepared.bandwidths));
    doc.z_grid = Some(prepared.z_grid.clone());
    doc
}

pub fn cmd_fit(args: &FitArgs) -> Result<ResultDoc, AppError> {
    let prepared = prepare(&args.common)?;
    let curves = fit_all_widened(
        &prepared.x,
        &prepared.y,
        args.common.order,
        prepared.bandwidths.as_bandwidths(),
        prepared.kernel,
        None,
        args.common.widen_on_sparse,
    )?;
    let mut f = Vec::new();
    let mut g = Vec::new();
    let mut v1 = Vec::new();
    let mut v2 = Vec::new();
    for &z in &prepared.z_grid {
        f.push(curves.f(z)?);
        g.push(curves.g(z)?);
        v1.push(curves.v1(z)?);
        v2.push(curves.v2(z)?);
    }
    let mut doc = base_doc("fit", &args.common, &prepared);
    doc.fit = Some(FitOut { f, g, v1, v2 });
    Ok(doc)
}

fn estimator_spec(
    name: EstimatorName,
    common: &CommonArgs,
    clamp: bool,
    kernel_bandwidths: &Option<String>,
) -> Result<EstimatorSpec, AppError> {
    let kb = match (name, kernel_bandwidths) {
        (EstimatorName::Kernel, Some(raw)) => {
            let (hx, hy) = parse_pair(raw, "kernel-bandwidths")?;
            if !(hx > 0.0 && hy > 0.0) {
                return Err(AppError::Input(
                    "--kernel-bandwidths must be positive".into(),
                ));
            }
            Some((hx, hy))
        }
        (EstimatorName::Kernel, None) => {
            return Err(AppError::Input(
                "--estimator kernel requires --kernel-bandwidths hx,hy".into(),
            ));
        }
        _ => None,
    };
    Ok(EstimatorSpec {
        estimator: name.build(),
        order_p: common.order,
        kernel: common.kernel.build(),
        clamp,
        kernel_bandwidths: kb,
        widen_on_sparse: common.widen_on_sparse,
    })
}

pub fn cmd_auc(args: &AucArgs) -> Result<ResultDoc, AppError> {
    let prepared = prepare(&args.common)?;
    let spec = estimator_spec(args.estimator, &args.common, args.clamp, &args.kernel_bandwidths)?;
    let estimates = estimate_on_grid(
        &prepared.x,
        &prepared.y,
        &spec,
        &prepared.bandwidths,
        &prepared.z_grid,
    )?;
    let mut doc = base_doc("auc", &args.common, &prepared);
    doc.estimator = Some(args.estimator.label().into());
    doc.clamp = Some(args.clamp);
    doc.kernel_bandwidths = spec.kernel_bandwidths;
    doc.estimates = Some(estimates);
    Ok(doc)
}

pub fn cmd_roc(args: &RocArgs) -> Result<ResultDoc, AppError> {
    let prepared = prepare(&args.common)?;
    let curves = fit_all_widened(
        &prepared.x,
        &prepared.y,
        args.common.order,
        prepared.bandwidths.as_bandwidths(),
        prepared.kernel,
        None,
        args.common.widen_on_sparse,
    )?;
    let roc = match args.estimator {
        EstimatorName::Camwe => {
            let resid = standardized_residuals(&prepared.x, &prepared.y, &curves)?;
            let ws = working_sample(&resid, &curves, args.z)?;
            let points = roc_curve_camwe(&ws);
            let area = roc_area(&points);
            let (yi, c_star) = youden_index(&ws);
            RocOut {
                z: args.z,
                points: points.iter().map(RocPointOut::from).collect(),
                area,
                youden_index: Some(yi),
                youden_threshold: Some(c_star),
            }
        }
        EstimatorName::Normal => {
            if args.fpr_points == 0 {
                return Err(AppError::Input("--fpr-points must be positive".into()));
            }
            let k = args.fpr_points;
            let fprs: Vec<f64> = (1..=k).map(|i| i as f64 / (k + 1) as f64).collect();
            let points = roc_curve_normal(&curves, args.z, &fprs)?;
            let area = roc_area(&points);
            RocOut {
                z: args.z,
                points: points.iter().map(RocPointOut::from).collect(),
                area,
                youden_index: None,
                youden_threshold: None,
            }
        }
        other => {
            return Err(AppError::Input(format!(
                "ROC curves are available for camwe and normal, not {}",
                other.label()
            )));
        }
    };
    let mut doc = base_doc("roc", &args.common, &prepared);
    doc.estimator = Some(args.estimator.label().into());
    doc.roc = Some(roc);
    Ok(doc)
}

pub fn cmd_bootstrap(args: &BootstrapArgs) -> Result<ResultDoc, AppError> {
    let prepared = prepare(&args.common)?;
    let spec = estimator_spec(args.estimator, &args.common, args.clamp, &args.kernel_bandwidths)?;
    let policy = match args.refit_bandwidths {
        RefitPolicy::Frozen => BandwidthPolicy::Frozen(prepared.bandwidths.clone()),
        RefitPolicy::PerReplicate => BandwidthPolicy::PerReplicateCv(prepared.bw_grid.clone()),
    };
    let cfg = BootstrapConfig::new(args.replicates, args.level, args.common.seed)
        .map_err(|e| AppError::Input(e.to_string()))?;
    let band = with_threads(args.threads, || {
        parallel::bootstrap_auc(&prepared.x, &prepared.y, &spec, &policy, &prepared.z_grid, &cfg)
    })?;
    let mut doc = base_doc("bootstrap", &args.common, &prepared);
    doc.estimator = Some(args.estimator.label().into());
    doc.clamp = Some(args.clamp);
    doc.kernel_bandwidths = spec.kernel_bandwidths;
    doc.estimates = Some(band.point_estimates.clone());
    doc.band = Some(BandOut::from(&band));
    Ok(doc)
}

fn parse_estimator_list(raw: &str) -> Result<Vec<EstimatorName>, AppError> {
    raw.split(',')
        .map(|tok| match tok.trim() {
            "camwe" => Ok(EstimatorName::Camwe),
            "normal" => Ok(EstimatorName::Normal),
            "kernel" => Ok(EstimatorName::Kernel),
            "mann-whitney" | "mann_whitney" => Ok(EstimatorName::MannWhitney),
            other => Err(AppError::Input(format!("unknown estimator `{other}`"))),
        })
        .collect()
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<ResultDoc, AppError> {
    let scenario = SimScenario::new(args.scenario.noise(), args.m, args.n);
    let mut doc = ResultDoc::new("simulate", args.seed);
    match args.study {
        StudyKind::Mse => {
            let names = parse_estimator_list(&args.estimators)?;
            if names.is_empty() {
                return Err(AppError::Input("--estimators must not be empty".into()));
            }
            let policy = match args.policy {
                PolicyName::Oracle => BandwidthStrategy::OracleIse,
                PolicyName::Cv => BandwidthStrategy::LooCv,
            };
            let mut cfg = MseStudyConfig::with_defaults(
                scenario,
                args.runs,
                names.iter().map(|n| n.build()).collect(),
                policy,
                args.seed,
            )?;
            if let Some(raw) = &args.grid {
                cfg.z_grid = parse_grid_spec(raw)?;
            }
            let res = with_threads(args.threads, || parallel::run_mse_study(&cfg))?;
            doc.z_grid = Some(cfg.z_grid.clone());
            doc.mse_study = Some(mse_study_out(
                args.scenario.label(),
                match args.policy {
                    PolicyName::Oracle => "oracle_ise",
                    PolicyName::Cv => "loo_cv",
                },
                args.m,
                args.n,
                names.iter().map(|n| n.label().to_string()).collect(),
                &res,
            ));
        }
        StudyKind::Band => {
            let mut cfg =
                BandStudyConfig::with_defaults(scenario, args.runs, args.replicates, args.seed)?;
            cfg.level = args.level;
            cfg.per_replicate_cv = args.refit_bandwidths == RefitPolicy::PerReplicate;
            if let Some(raw) = &args.grid {
                cfg.z_grid = parse_grid_spec(raw)?;
            }
            let res = with_threads(args.threads, || parallel::run_band_study(&cfg))?;
            doc.z_grid = Some(cfg.z_grid.clone());
            doc.band_study = Some(band_study_out(args.scenario.label(), args.m, args.n, &res));
        }
    }
    Ok(doc)
}

/// Dispatch a parsed command.
pub fn run(cli: &Cli) -> Result<ResultDoc, AppError> {
    match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Auc(a) => cmd_auc(a),
        Command::Roc(a) => cmd_roc(a),
        Command::Bootstrap(a) => cmd_bootstrap(a),
        Command::Simulate(a) => cmd_simulate(a),
    }
}

/// Output path of a parsed command, if any.
pub fn out_path(cli: &Cli) -> Option<&PathBuf> {
    match &cli.command {
        Command::Fit(a) => a.common.out.as_ref(),
        Command::Auc(a) => a.common.out.as_ref(),
        Command::Roc(a) => a.common.out.as_ref(),
        Command::Bootstrap(a) => a.common.out.as_ref(),
        Command::Simulate(a) => a.out.as_ref(),
    }
}
