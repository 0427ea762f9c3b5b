//! Odd-order local polynomial regression for mean functions and
//! squared-residual smoothing for heteroscedastic variance functions.
//!
//! Each evaluation at a target z solves a weighted least squares problem on
//! the centered design (z_i − z)ᵏ with kernel weights K_h(z_i − z). The solve
//! goes through a Householder QR of the √weight-scaled design rather than the
//! normal equations, and the intercept coordinate is the estimate.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::kernel::Kernel;
use crate::Result;

/// Which of the two populations a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Population {
    /// Nondiseased sample, markers denoted X.
    NonDiseasedX,
    /// Diseased sample, markers denoted Y.
    DiseasedY,
}

impl Population {
    pub fn label(&self) -> &'static str {
        match self {
            Population::NonDiseasedX => "x",
            Population::DiseasedY => "y",
        }
    }
}

/// Paired (covariate, marker) observations from one population.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SamplePairs {
    covariates: Vec<f64>,
    markers: Vec<f64>,
    population: Population,
}

impl SamplePairs {
    pub fn new(covariates: Vec<f64>, markers: Vec<f64>, population: Population) -> Result<Self> {
        if covariates.is_empty() {
            return Err(Error::EmptySample);
        }
        if covariates.len() != markers.len() {
            return Err(Error::InvalidSample(format!(
                "covariate/marker length mismatch: {} vs {}",
                covariates.len(),
                markers.len()
            )));
        }
        for (i, (&z, &v)) in covariates.iter().zip(&markers).enumerate() {
            if !z.is_finite() || !v.is_finite() {
                return Err(Error::InvalidSample(format!(
                    "non-finite observation at index {i}: (z = {z}, marker = {v})"
                )));
            }
        }
        Ok(SamplePairs { covariates, markers, population })
    }

    pub fn len(&self) -> usize {
        self.covariates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.covariates.is_empty()
    }

    pub fn covariates(&self) -> &[f64] {
        &self.covariates
    }

    pub fn markers(&self) -> &[f64] {
        &self.markers
    }

    pub fn population(&self) -> Population {
        self.population
    }

    /// Range (min, max) of the covariates.
    pub fn covariate_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &z in &self.covariates {
            lo = lo.min(z);
            hi = hi.max(z);
        }
        (lo, hi)
    }

    fn distinct_covariates(&self) -> usize {
        let mut zs = self.covariates.clone();
        zs.sort_by(f64::total_cmp);
        zs.dedup();
        zs.len()
    }

    /// Resample `len()` pairs i.i.d. with replacement, preserving the joint
    /// (covariate, marker) law.
    pub fn resample(&self, rng: &mut impl rand::RngCore) -> SamplePairs {
        let n = self.len();
        let mut covariates = Vec::with_capacity(n);
        let mut markers = Vec::with_capacity(n);
        for _ in 0..n {
            let i = crate::rng::index(rng, n);
            covariates.push(self.covariates[i]);
            markers.push(self.markers[i]);
        }
        SamplePairs { covariates, markers, population: self.population }
    }
}

/// A fitted local polynomial smoother, evaluable at any covariate value.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPolyFit {
    data: SamplePairs,
    order_p: usize,
    bandwidth: f64,
    kernel: Kernel,
    /// Clamp evaluations below at this value (variance fits only).
    floor: Option<f64>,
    /// When the local window is too sparse, double the bandwidth locally,
    /// up to three times, instead of failing.
    widen_on_sparse: bool,
}

/// Maximum number of local bandwidth doublings when widening is enabled.
const MAX_WIDENINGS: u32 = 3;

impl LocalPolyFit {
    pub fn order(&self) -> usize {
        self.order_p
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn data(&self) -> &SamplePairs {
        &self.data
    }

    pub fn floor(&self) -> Option<f64> {
        self.floor
    }

    pub fn with_widening(mut self, widen: bool) -> Self {
        self.widen_on_sparse = widen;
        self
    }

    /// Evaluate the fitted curve at z.
    pub fn eval(&self, z: f64) -> Result<f64> {
        let mut h = self.bandwidth;
        let mut attempt = 0;
        let raw = loop {
            match local_wls_intercept(
                self.data.covariates(),
                self.data.markers(),
                z,
                self.order_p,
                h,
                &self.kernel,
            ) {
                Ok(v) => break v,
                Err(e) => {
                    if self.widen_on_sparse && attempt < MAX_WIDENINGS {
                        attempt += 1;
                        h *= 2.0;
                    } else {
                        return Err(e);
                    }
                }
            }
        };
        Ok(match self.floor {
            Some(floor) => raw.max(floor),
            None => raw,
        })
    }
}

/// Solve the degree-p weighted least squares problem centered at z and
/// return the intercept.
fn local_wls_intercept(
    zs: &[f64],
    values: &[f64],
    z: f64,
    p: usize,
    h: f64,
    kernel: &Kernel,
) -> Result<f64> {
    let dim = p + 1;
    // gather observations with positive kernel weight
    let mut rows: Vec<(f64, f64, f64)> = Vec::new(); // (centered z, value, weight)
    for (&zi, &vi) in zs.iter().zip(values) {
        let w = kernel.eval_scaled(zi - z, h);
        if w > 0.0 {
            rows.push((zi - z, vi, w));
        }
    }
    if rows.len() < dim {
        return Err(Error::InsufficientLocalData { z, found: rows.len(), needed: dim });
    }
    let k = rows.len();
    let mut a = vec![0.0; k * dim];
    let mut b = vec![0.0; k];
    for (r, &(d, v, w)) in rows.iter().enumerate() {
        let sw = libm::sqrt(w);
        let mut pow = sw;
        for c in 0..dim {
            a[r * dim + c] = pow;
            pow *= d;
        }
        b[r] = sw * v;
    }
    match householder_ls(&mut a, &mut b, k, dim) {
        Some(beta0) => Ok(beta0),
        None => Err(Error::InsufficientLocalData { z, found: k, needed: dim }),
    }
}

/// Least squares via Householder QR on a k×d row-major matrix (k ≥ d).
/// Returns the first solution coordinate, or None if R is numerically rank
/// deficient.
fn householder_ls(a: &mut [f64], b: &mut [f64], k: usize, d: usize) -> Option<f64> {
    let mut scale = 0.0f64;
    for v in a.iter() {
        scale = scale.max(v.abs());
    }
    if scale == 0.0 {
        return None;
    }
    let tol = 1e-12 * scale;
    let mut v = vec![0.0; k];
    for j in 0..d {
        // column norm below the diagonal
        let mut norm = 0.0;
        for r in j..k {
            norm += a[r * d + j] * a[r * d + j];
        }
        let norm = libm::sqrt(norm);
        if norm <= tol {
            return None;
        }
        let alpha = if a[j * d + j] >= 0.0 { -norm } else { norm };
        for r in j..k {
            v[r] = a[r * d + j];
        }
        v[j] -= alpha;
        let vtv: f64 = (j..k).map(|r| v[r] * v[r]).sum();
        if vtv <= 0.0 {
            return None;
        }
        a[j * d + j] = alpha;
        for r in j + 1..k {
            a[r * d + j] = 0.0;
        }
        for c in j + 1..d {
            let dot: f64 = (j..k).map(|r| v[r] * a[r * d + c]).sum();
            let f = 2.0 * dot / vtv;
            for r in j..k {
                a[r * d + c] -= f * v[r];
            }
        }
        let dot: f64 = (j..k).map(|r| v[r] * b[r]).sum();
        let f = 2.0 * dot / vtv;
        for r in j..k {
            b[r] -= f * v[r];
        }
    }
    // back substitution on R
    let mut beta = vec![0.0; d];
    for j in (0..d).rev() {
        let mut s = b[j];
        for c in j + 1..d {
            s -= a[j * d + c] * beta[c];
        }
        let diag = a[j * d + j];
        if diag.abs() <= tol {
            return None;
        }
        beta[j] = s / diag;
    }
    Some(beta[0])
}

fn validate_fit_inputs(data: &SamplePairs, p: usize, h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::NonPositiveBandwidth(h));
    }
    if data.len() < p + 2 {
        return Err(Error::InvalidSample(format!(
            "need at least {} observations for a degree-{p} fit, got {}",
            p + 2,
            data.len()
        )));
    }
    if data.distinct_covariates() < p + 1 {
        return Err(Error::InvalidSample(format!(
            "need at least {} distinct covariate values for a degree-{p} fit",
            p + 1
        )));
    }
    Ok(())
}

/// Fit a degree-p local polynomial smoother to the markers.
pub fn fit_mean(data: &SamplePairs, p: usize, h: f64, kernel: Kernel) -> Result<LocalPolyFit> {
    validate_fit_inputs(data, p, h)?;
    Ok(LocalPolyFit {
        data: data.clone(),
        order_p: p,
        bandwidth: h,
        kernel,
        floor: None,
        widen_on_sparse: false,
    })
}

/// Squared residuals (z_i, (value_i − mean̂(z_i))²) of a fitted mean curve.
pub fn variance_observations(data: &SamplePairs, mean_fit: &LocalPolyFit) -> Result<SamplePairs> {
    let mut resid2 = Vec::with_capacity(data.len());
    for (&z, &v) in data.covariates().iter().zip(data.markers()) {
        let r = v - mean_fit.eval(z)?;
        resid2.push(r * r);
    }
    SamplePairs::new(data.covariates().to_vec(), resid2, data.population())
}

/// Fit a local polynomial smoother to squared residuals; evaluations are
/// clamped below at `floor`.
pub fn fit_variance(
    resid2: &SamplePairs,
    p: usize,
    b: f64,
    kernel: Kernel,
    floor: f64,
) -> Result<LocalPolyFit> {
    validate_fit_inputs(resid2, p, b)?;
    if !(floor > 0.0) {
        return Err(Error::InvalidSample(format!("variance floor must be positive, got {floor}")));
    }
    if resid2.markers().iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidSample("squared residuals must be non-negative".into()));
    }
    Ok(LocalPolyFit {
        data: resid2.clone(),
        order_p: p,
        bandwidth: b,
        kernel,
        floor: Some(floor),
        widen_on_sparse: false,
    })
}

/// The four bandwidths of a full fit.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bandwidths {
    pub h1: f64,
    pub h2: f64,
    pub b1: f64,
    pub b2: f64,
}

/// The four fitted curves f̂, ĝ, v̂₁, v̂₂ of a two-sample analysis.
#[derive(Debug, Clone)]
pub struct FittedCurves {
    pub f_hat: LocalPolyFit,
    pub g_hat: LocalPolyFit,
    pub v1_hat: LocalPolyFit,
    pub v2_hat: LocalPolyFit,
    pub variance_floor: f64,
}

/// Scale applied to the pooled marker variance to obtain the default
/// variance floor.
pub const DEFAULT_FLOOR_SCALE: f64 = 1e-8;

fn pooled_marker_variance(x: &SamplePairs, y: &SamplePairs) -> f64 {
    let mut all: Vec<f64> = Vec::with_capacity(x.len() + y.len());
    all.extend_from_slice(x.markers());
    all.extend_from_slice(y.markers());
    let n = all.len() as f64;
    let mean = all.iter().sum::<f64>() / n;
    all.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

impl FittedCurves {
    pub fn bandwidths(&self) -> Bandwidths {
        Bandwidths {
            h1: self.f_hat.bandwidth(),
            h2: self.g_hat.bandwidth(),
            b1: self.v1_hat.bandwidth(),
            b2: self.v2_hat.bandwidth(),
        }
    }

    pub fn with_widening(mut self, widen: bool) -> Self {
        self.f_hat = self.f_hat.with_widening(widen);
        self.g_hat = self.g_hat.with_widening(widen);
        self.v1_hat = self.v1_hat.with_widening(widen);
        self.v2_hat = self.v2_hat.with_widening(widen);
        self
    }
}

/// Fit all four curves: means first, then variance smoothers on the squared
/// residuals of each population.
pub fn fit_all(
    x_data: &SamplePairs,
    y_data: &SamplePairs,
    p: usize,
    bandwidths: Bandwidths,
    kernel: Kernel,
    floor: Option<f64>,
) -> Result<FittedCurves> {
    fit_all_widened(x_data, y_data, p, bandwidths, kernel, floor, false)
}

/// [`fit_all`] with sparse-window widening applied to every evaluation,
/// including the mean-fit evaluations that produce the squared residuals.
pub fn fit_all_widened(
    x_data: &SamplePairs,
    y_data: &SamplePairs,
    p: usize,
    bandwidths: Bandwidths,
    kernel: Kernel,
    floor: Option<f64>,
    widen_on_sparse: bool,
) -> Result<FittedCurves> {
    let floor = match floor {
        Some(f) => f,
        None => {
            let var = pooled_marker_variance(x_data, y_data);
            (DEFAULT_FLOOR_SCALE * var).max(f64::MIN_POSITIVE)
        }
    };
    let f_hat = fit_mean(x_data, p, bandwidths.h1, kernel)
        .map_err(|e| e.with_context("mean fit, population x"))?
        .with_widening(widen_on_sparse);
    let g_hat = fit_mean(y_data, p, bandwidths.h2, kernel)
        .map_err(|e| e.with_context("mean fit, population y"))?
        .with_widening(widen_on_sparse);
    let rx = variance_observations(x_data, &f_hat)
        .map_err(|e| e.with_context("squared residuals, population x"))?;
    let ry = variance_observations(y_data, &g_hat)
        .map_err(|e| e.with_context("squared residuals, population y"))?;
    let v1_hat = fit_variance(&rx, p, bandwidths.b1, kernel, floor)
        .map_err(|e| e.with_context("variance fit, population x"))?
        .with_widening(widen_on_sparse);
    let v2_hat = fit_variance(&ry, p, bandwidths.b2, kernel, floor)
        .map_err(|e| e.with_context("variance fit, population y"))?
        .with_widening(widen_on_sparse);
    Ok(FittedCurves { f_hat, g_hat, v1_hat, v2_hat, variance_floor: floor })
}
