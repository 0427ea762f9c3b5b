//! Covariate-adjusted accuracy estimators.
//!
//! Three routes to the conditional AUC `A(z) = P(Y > X | Z = z)`:
//!
//! * a closed form under normal noise, `Φ{(ĝ−f̂)/√(v̂₁+v̂₂)}`;
//! * the covariate-adjusted Mann-Whitney estimator (CAMWE), which applies the
//!   classical Mann-Whitney statistic to a *working sample* reconstructed at z
//!   from standardized residuals;
//! * a bivariate kernel smoother of the pairwise indicators 1{y ≥ x}.
//!
//! The indicator is closed at zero (`1_{[0,∞)}`), so ties count as
//! concordant. The probabilistic target is the strict P(Y > X | Z = z);
//! continuous noise makes the difference measure zero.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::Error;
use crate::kernel::Kernel;
use crate::local_poly::{FittedCurves, SamplePairs};
use crate::normal;
use crate::Result;

/// Evaluable mean/variance curve set for the two populations.
///
/// Implemented by [`FittedCurves`] (estimated curves) and [`ExactCurves`]
/// (true functions, used by the simulation harness).
pub trait CurveSet {
    fn f(&self, z: f64) -> Result<f64>;
    fn g(&self, z: f64) -> Result<f64>;
    fn v1(&self, z: f64) -> Result<f64>;
    fn v2(&self, z: f64) -> Result<f64>;
}

impl CurveSet for FittedCurves {
    fn f(&self, z: f64) -> Result<f64> {
        self.f_hat.eval(z).map_err(|e| e.with_context("f"))
    }
    fn g(&self, z: f64) -> Result<f64> {
        self.g_hat.eval(z).map_err(|e| e.with_context("g"))
    }
    fn v1(&self, z: f64) -> Result<f64> {
        self.v1_hat.eval(z).map_err(|e| e.with_context("v1"))
    }
    fn v2(&self, z: f64) -> Result<f64> {
        self.v2_hat.eval(z).map_err(|e| e.with_context("v2"))
    }
}

type CurveFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Curve set given by explicit functions (simulation truth, constants, ...).
pub struct ExactCurves {
    pub f: CurveFn,
    pub g: CurveFn,
    pub v1: CurveFn,
    pub v2: CurveFn,
}

impl ExactCurves {
    /// Constant curves; with these, CAMWE reduces to the classical
    /// Mann-Whitney statistic.
    pub fn constant(f: f64, g: f64, v1: f64, v2: f64) -> Self {
        ExactCurves {
            f: Box::new(move |_| f),
            g: Box::new(move |_| g),
            v1: Box::new(move |_| v1),
            v2: Box::new(move |_| v2),
        }
    }
}

impl CurveSet for ExactCurves {
    fn f(&self, z: f64) -> Result<f64> {
        Ok((self.f)(z))
    }
    fn g(&self, z: f64) -> Result<f64> {
        Ok((self.g)(z))
    }
    fn v1(&self, z: f64) -> Result<f64> {
        Ok((self.v1)(z))
    }
    fn v2(&self, z: f64) -> Result<f64> {
        Ok((self.v2)(z))
    }
}

/// Which AUC estimator produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum AucEstimator {
    NormalClosedForm,
    Camwe,
    BivariateKernel,
    MannWhitneyUnadjusted,
}

/// A single AUC estimate at a covariate value.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AucEstimate {
    pub z: f64,
    pub value: f64,
    pub estimator: AucEstimator,
    pub clamped: bool,
}

impl AucEstimate {
    /// Constrain the estimate to be at least 0.5 (optional; the unrestricted
    /// form is the default).
    pub fn clamp_min_half(mut self) -> Self {
        if self.value < 0.5 {
            self.value = 0.5;
            self.clamped = true;
        }
        self
    }
}

/// One point on an ROC curve.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RocPoint {
    pub threshold: f64,
    pub sensitivity: f64,
    pub one_minus_specificity: f64,
}

/// Classical Mann-Whitney statistic `(1/mn) Σᵢ Σⱼ 1_{[0,∞)}(yⱼ − xᵢ)`.
///
/// Computed by sorting x and counting `#{xᵢ ≤ yⱼ}` per yⱼ; the count is an
/// integer, so this matches the double loop exactly.
pub fn mann_whitney(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = x.to_vec();
    xs.sort_by(f64::total_cmp);
    let mut concordant: u64 = 0;
    for &yj in y {
        concordant += xs.partition_point(|&xi| xi <= yj) as u64;
    }
    Ok(concordant as f64 / (x.len() as f64 * y.len() as f64))
}

/// Closed-form AUC under the normal noise assumption,
/// `Φ{(ĝ(z)−f̂(z))/√(v̂₁(z)+v̂₂(z))}`.
pub fn auc_normal(curves: &impl CurveSet, z: f64) -> Result<AucEstimate> {
    let delta = curves.g(z)? - curves.f(z)?;
    let var = curves.v1(z)? + curves.v2(z)?;
    if !(var > 0.0) {
        return Err(Error::InvalidSample(alloc::format!(
            "nonpositive total variance {var} at z = {z}"
        )));
    }
    Ok(AucEstimate {
        z,
        value: normal::cdf(delta / libm::sqrt(var)),
        estimator: AucEstimator::NormalClosedForm,
        clamped: false,
    })
}

/// Sensitivity and specificity at threshold c under normal noise:
/// `q = Φ{(ĝ−c)/√v̂₂}`, `p = Φ{(c−f̂)/√v̂₁}`.
pub fn sens_spec_normal(curves: &impl CurveSet, z: f64, c: f64) -> Result<(f64, f64)> {
    let v1 = curves.v1(z)?;
    let v2 = curves.v2(z)?;
    if !(v1 > 0.0 && v2 > 0.0) {
        return Err(Error::InvalidSample(alloc::format!("nonpositive variance at z = {z}")));
    }
    let q = normal::cdf((curves.g(z)? - c) / libm::sqrt(v2));
    let p = normal::cdf((c - curves.f(z)?) / libm::sqrt(v1));
    Ok((q, p))
}

/// Normal-noise ROC curve evaluated on a strictly increasing FPR grid in
/// (0, 1): `q = Φ[{ĝ−f̂+√v̂₁ Φ⁻¹(fpr)}/√v̂₂]`.
pub fn roc_curve_normal(curves: &impl CurveSet, z: f64, fpr_grid: &[f64]) -> Result<Vec<RocPoint>> {
    if fpr_grid.is_empty() {
        return Err(Error::EmptyInput);
    }
    for w in fpr_grid.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::InvalidSample("fpr grid must be strictly increasing".into()));
        }
    }
    if fpr_grid[0] <= 0.0 || *fpr_grid.last().unwrap() >= 1.0 {
        return Err(Error::InvalidSample("fpr grid must lie strictly inside (0, 1)".into()));
    }
    let f = curves.f(z)?;
    let g = curves.g(z)?;
    let v1 = curves.v1(z)?;
    let v2 = curves.v2(z)?;
    if !(v1 > 0.0 && v2 > 0.0) {
        return Err(Error::InvalidSample(alloc::format!("nonpositive variance at z = {z}")));
    }
    let (s1, s2) = (libm::sqrt(v1), libm::sqrt(v2));
    Ok(fpr_grid
        .iter()
        .map(|&fpr| RocPoint {
            threshold: f + s1 * normal::inv_cdf(1.0 - fpr),
            sensitivity: normal::cdf((g - f + s1 * normal::inv_cdf(fpr)) / s2),
            one_minus_specificity: fpr,
        })
        .collect())
}

/// Standardized residuals of both samples under a curve set.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StandardizedResiduals {
    pub eps_x: Vec<f64>,
    pub eps_y: Vec<f64>,
}

/// `ε_{i,x} = (xᵢ − f̂(z_{i,x}))/√v̂₁(z_{i,x})` and the y analogue.
///
/// Computed once per curve set; working samples at any z reuse them.
pub fn standardized_residuals(
    x_data: &SamplePairs,
    y_data: &SamplePairs,
    curves: &impl CurveSet,
) -> Result<StandardizedResiduals> {
    let mut eps_x = Vec::with_capacity(x_data.len());
    for (i, (&z, &x)) in x_data.covariates().iter().zip(x_data.markers()).enumerate() {
        let f = curves.f(z).map_err(|e| e.with_context(alloc::format!("x observation {i}")))?;
        let v = curves.v1(z).map_err(|e| e.with_context(alloc::format!("x observation {i}")))?;
        eps_x.push((x - f) / libm::sqrt(v));
    }
    let mut eps_y = Vec::with_capacity(y_data.len());
    for (j, (&z, &y)) in y_data.covariates().iter().zip(y_data.markers()).enumerate() {
        let g = curves.g(z).map_err(|e| e.with_context(alloc::format!("y observation {j}")))?;
        let v = curves.v2(z).map_err(|e| e.with_context(alloc::format!("y observation {j}")))?;
        eps_y.push((y - g) / libm::sqrt(v));
    }
    Ok(StandardizedResiduals { eps_x, eps_y })
}

/// Marker values reconstructed as if every observation occurred at Z = z.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WorkingSample {
    pub z: f64,
    pub x_values: Vec<f64>,
    pub y_values: Vec<f64>,
}

/// Build the working sample at z:
/// `x_{i,z} = f̂(z) + √v̂₁(z) ε_{i,x}`, `y_{j,z} = ĝ(z) + √v̂₂(z) ε_{j,y}`.
pub fn working_sample(
    resid: &StandardizedResiduals,
    curves: &impl CurveSet,
    z: f64,
) -> Result<WorkingSample> {
    let f = curves.f(z)?;
    let g = curves.g(z)?;
    let s1 = libm::sqrt(curves.v1(z)?);
    let s2 = libm::sqrt(curves.v2(z)?);
    Ok(WorkingSample {
        z,
        x_values: resid.eps_x.iter().map(|&e| f + s1 * e).collect(),
        y_values: resid.eps_y.iter().map(|&e| g + s2 * e).collect(),
    })
}

/// Covariate-adjusted Mann-Whitney estimator: the Mann-Whitney statistic on
/// the working sample at z.
pub fn camwe(
    x_data: &SamplePairs,
    y_data: &SamplePairs,
    curves: &impl CurveSet,
    z: f64,
    clamp: bool,
) -> Result<AucEstimate> {
    let resid = standardized_residuals(x_data, y_data, curves)?;
    camwe_from_residuals(&resid, curves, z, clamp)
}

/// CAMWE from precomputed residuals; use this when sweeping a z grid.
pub fn camwe_from_residuals(
    resid: &StandardizedResiduals,
    curves: &impl CurveSet,
    z: f64,
    clamp: bool,
) -> Result<AucEstimate> {
    let ws = working_sample(resid, curves, z)?;
    let value = mann_whitney(&ws.x_values, &ws.y_values)?;
    let est = AucEstimate { z, value, estimator: AucEstimator::Camwe, clamped: false };
    Ok(if clamp { est.clamp_min_half() } else { est })
}

/// Empirical sensitivity and specificity of a working sample at threshold c:
/// `q = (1/n) Σ 1{y_{j,z} ≥ c}`, `p = (1/m) Σ 1{x_{i,z} ≤ c}`.
pub fn sens_spec_camwe(ws: &WorkingSample, c: f64) -> (f64, f64) {
    let n = ws.y_values.len();
    let m = ws.x_values.len();
    let q = ws.y_values.iter().filter(|&&y| y >= c).count() as f64 / n as f64;
    let p = ws.x_values.iter().filter(|&&x| x <= c).count() as f64 / m as f64;
    (q, p)
}

/// Empirical ROC curve of a working sample.
///
/// Thresholds sweep the pooled sample values plus ±∞ endpoints, descending,
/// so the curve runs from (0, 0) to (1, 1). Consecutive duplicate points are
/// dropped. With no pooled ties, the trapezoid area equals the Mann-Whitney
/// statistic on the working sample exactly.
pub fn roc_curve_camwe(ws: &WorkingSample) -> Vec<RocPoint> {
    let mut pooled: Vec<f64> = Vec::with_capacity(ws.x_values.len() + ws.y_values.len());
    pooled.extend_from_slice(&ws.x_values);
    pooled.extend_from_slice(&ws.y_values);
    pooled.sort_by(f64::total_cmp);
    pooled.dedup();

    let m = ws.x_values.len() as f64;
    let n = ws.y_values.len() as f64;
    let mut points: Vec<RocPoint> = Vec::with_capacity(2 * pooled.len() + 2);
    let mut push = |c: f64, q: f64, fpr: f64| {
        let pt = RocPoint { threshold: c, sensitivity: q, one_minus_specificity: fpr };
        if let Some(last) = points.last() {
            if last.sensitivity == pt.sensitivity
                && last.one_minus_specificity == pt.one_minus_specificity
            {
                return;
            }
        }
        points.push(pt);
    };
    push(f64::INFINITY, 0.0, 0.0);
    for &c in pooled.iter().rev() {
        // sensitivity counts y ≥ c but 1−specificity counts x > c, so the
        // staircase corner between consecutive thresholds (where x ≥ c has
        // already crossed) needs its own point or the trapezoid rule cuts it
        let q = ws.y_values.iter().filter(|&&y| y >= c).count() as f64 / n;
        let fpr_at = ws.x_values.iter().filter(|&&x| x > c).count() as f64 / m;
        let fpr_below = ws.x_values.iter().filter(|&&x| x >= c).count() as f64 / m;
        push(c, q, fpr_at);
        push(c, q, fpr_below);
    }
    push(f64::NEG_INFINITY, 1.0, 1.0);
    points
}

/// Trapezoid area under a ROC polyline ordered by increasing FPR.
pub fn roc_area(points: &[RocPoint]) -> f64 {
    let mut area = 0.0;
    for w in points.windows(2) {
        area += 0.5
            * (w[1].sensitivity + w[0].sensitivity)
            * (w[1].one_minus_specificity - w[0].one_minus_specificity);
    }
    area
}

/// Youden index `q_M + p_M − 1` maximized over the pooled working-sample
/// values; ties break toward the smallest threshold.
pub fn youden_index(ws: &WorkingSample) -> (f64, f64) {
    let mut pooled: Vec<f64> = Vec::with_capacity(ws.x_values.len() + ws.y_values.len());
    pooled.extend_from_slice(&ws.x_values);
    pooled.extend_from_slice(&ws.y_values);
    pooled.sort_by(f64::total_cmp);
    pooled.dedup();

    let mut best = f64::NEG_INFINITY;
    let mut best_c = f64::NAN;
    for &c in &pooled {
        let (q, p) = sens_spec_camwe(ws, c);
        let yi = q + p - 1.0;
        if yi > best {
            best = yi;
            best_c = c;
        }
    }
    (best, best_c)
}

/// Bivariate kernel AUC estimator: the ratio of the kernel-weighted
/// indicator sum to the kernel-weight sum over all (i, j) pairs.
pub fn auc_bivariate_kernel(
    x_data: &SamplePairs,
    y_data: &SamplePairs,
    hx: f64,
    hy: f64,
    kernel: Kernel,
    z: f64,
) -> Result<AucEstimate> {
    if !(hx > 0.0) {
        return Err(Error::NonPositiveBandwidth(hx));
    }
    if !(hy > 0.0) {
        return Err(Error::NonPositiveBandwidth(hy));
    }
    let wx: Vec<f64> =
        x_data.covariates().iter().map(|&zi| kernel.eval_scaled(zi - z, hx)).collect();
    let wy: Vec<f64> =
        y_data.covariates().iter().map(|&zj| kernel.eval_scaled(zj - z, hy)).collect();
    let mut num = 0.0;
    let mut den = 0.0;
    for (&xi, &wxi) in x_data.markers().iter().zip(&wx) {
        if wxi == 0.0 {
            continue;
        }
        for (&yj, &wyj) in y_data.markers().iter().zip(&wy) {
            let w = wxi * wyj;
            den += w;
            if yj >= xi {
                num += w;
            }
        }
    }
    if den <= 0.0 {
        return Err(Error::ZeroDenominator { z });
    }
    Ok(AucEstimate {
        z,
        value: num / den,
        estimator: AucEstimator::BivariateKernel,
        clamped: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_poly::Population;

    fn xs(zs: &[f64], vs: &[f64]) -> SamplePairs {
        SamplePairs::new(zs.to_vec(), vs.to_vec(), Population::NonDiseasedX).unwrap()
    }

    fn ys(zs: &[f64], vs: &[f64]) -> SamplePairs {
        SamplePairs::new(zs.to_vec(), vs.to_vec(), Population::DiseasedY).unwrap()
    }

    #[test]
    fn mann_whitney_basics() {
        assert_eq!(mann_whitney(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(mann_whitney(&[0.0], &[0.0]).unwrap(), 1.0); // tie counts
        assert_eq!(mann_whitney(&[1.0, 3.0], &[2.0, 4.0]).unwrap(), 0.75);
        assert!(matches!(mann_whitney(&[], &[1.0]), Err(Error::EmptySample)));
    }

    #[test]
    fn mann_whitney_complement_identity() {
        let x = [1.0, 2.0, 2.0, 5.0];
        let y = [2.0, 3.0, 5.0];
        let ties = x.iter().flat_map(|&a| y.iter().map(move |&b| (a, b)))
            .filter(|(a, b)| a == b)
            .count() as f64;
        let mn = (x.len() * y.len()) as f64;
        let fwd = mann_whitney(&x, &y).unwrap();
        let rev = mann_whitney(&y, &x).unwrap();
        assert!((fwd + rev - (1.0 + ties / mn)).abs() < 1e-15);
    }

    #[test]
    fn auc_normal_closed_forms() {
        let eq = ExactCurves::constant(1.0, 1.0, 0.5, 0.5);
        assert!((auc_normal(&eq, 0.0).unwrap().value - 0.5).abs() < 1e-12);
        // δ = 1 standard deviation
        let one_sd = ExactCurves::constant(0.0, 1.0, 0.5, 0.5);
        assert!((auc_normal(&one_sd, 0.0).unwrap().value - 0.841_344_746_068_542_9).abs() < 1e-9);
    }

    #[test]
    fn sens_spec_normal_anchors() {
        let c = ExactCurves::constant(1.0, 3.0, 0.7, 1.1);
        let (q, _) = sens_spec_normal(&c, 0.0, 3.0).unwrap();
        assert!((q - 0.5).abs() < 1e-12);
        let (_, p) = sens_spec_normal(&c, 0.0, 1.0).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        let (q, p) = sens_spec_normal(&c, 0.0, 1e8).unwrap();
        assert!(q < 1e-12 && (p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn roc_normal_diagonal_when_symmetric() {
        let c = ExactCurves::constant(2.0, 2.0, 1.0, 1.0);
        let grid: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        let pts = roc_curve_normal(&c, 0.0, &grid).unwrap();
        for pt in &pts {
            assert!((pt.sensitivity - pt.one_minus_specificity).abs() < 1e-12);
        }
        // monotone in both coordinates
        for w in pts.windows(2) {
            assert!(w[1].sensitivity >= w[0].sensitivity - 1e-12);
        }
        assert!(roc_curve_normal(&c, 0.0, &[0.5, 0.2]).is_err());
        assert!(roc_curve_normal(&c, 0.0, &[0.0, 0.5]).is_err());
    }

    #[test]
    fn residuals_invert_generation() {
        // data generated from known constant curves: residuals equal draws;
        // dyadic draws keep every step of the reconstruction exact
        let draws = [0.25, -1.5, 0.75];
        let f = 2.0;
        let v1 = 4.0; // s1 = 2, power of two: exact arithmetic
        let zvals = [1.0, 2.0, 3.0];
        let markers: Vec<f64> = draws.iter().map(|&e| f + 2.0 * e).collect();
        let x = xs(&zvals, &markers);
        let y = ys(&zvals, &markers);
        let c = ExactCurves::constant(f, f, v1, v1);
        let r = standardized_residuals(&x, &y, &c).unwrap();
        for (a, b) in r.eps_x.iter().zip(&draws) {
            assert_eq!(a, b);
        }
        // identity curves: residuals equal raw markers
        let id = ExactCurves::constant(0.0, 0.0, 1.0, 1.0);
        let r = standardized_residuals(&x, &y, &id).unwrap();
        assert_eq!(r.eps_x, markers);
    }

    #[test]
    fn working_sample_shifts_residuals_under_unit_variance() {
        let zvals = [0.0, 1.0];
        let x = xs(&zvals, &[0.5, -0.25]);
        let y = ys(&zvals, &[1.5, 0.75]);
        let c = ExactCurves::constant(3.0, 7.0, 1.0, 1.0);
        let r = standardized_residuals(&x, &y, &c).unwrap();
        let ws = working_sample(&r, &c, 0.5).unwrap();
        for (w, e) in ws.x_values.iter().zip(&r.eps_x) {
            assert_eq!(*w, 3.0 + e);
        }
        for (w, e) in ws.y_values.iter().zip(&r.eps_y) {
            assert_eq!(*w, 7.0 + e);
        }
    }

    #[test]
    fn camwe_constant_curves_is_mann_whitney() {
        let zx = [1.0, 2.0, 3.0, 4.0];
        let zy = [1.5, 2.5, 3.5];
        let mx = [0.5, 2.25, -1.0, 3.5];
        let my = [1.25, 4.0, 0.75];
        let x = xs(&zx, &mx);
        let y = ys(&zy, &my);
        // power-of-two constants keep the reconstruction bit exact
        let c = ExactCurves::constant(2.0, 4.0, 4.0, 16.0);
        let est = camwe(&x, &y, &c, 2.0, false).unwrap();
        assert_eq!(est.value, mann_whitney(&mx, &my).unwrap());
    }

    #[test]
    fn camwe_identical_samples_tie_count() {
        // x_data = y_data with identical curves: value = (mn + m)/(2mn) with n = m
        let zv = [1.0, 2.0, 3.0, 4.0, 5.0];
        let mv = [0.1, 0.9, 0.4, 0.7, 0.2];
        let x = xs(&zv, &mv);
        let y = ys(&zv, &mv);
        let c = ExactCurves::constant(0.0, 0.0, 1.0, 1.0);
        let est = camwe(&x, &y, &c, 3.0, false).unwrap();
        let (m, n) = (5.0, 5.0);
        assert_eq!(est.value, (m * n + m) / (2.0 * m * n));
    }

    #[test]
    fn camwe_clamp_flag() {
        let zv = [1.0, 2.0, 3.0];
        let x = xs(&zv, &[2.0, 3.0, 4.0]);
        let y = ys(&zv, &[0.0, 1.0, -1.0]); // y below x: AUC < 0.5
        let c = ExactCurves::constant(0.0, 0.0, 1.0, 1.0);
        let raw = camwe(&x, &y, &c, 2.0, false).unwrap();
        assert!(raw.value < 0.5 && !raw.clamped);
        let clamped = camwe(&x, &y, &c, 2.0, true).unwrap();
        assert_eq!(clamped.value, 0.5);
        assert!(clamped.clamped);
    }

    #[test]
    fn sens_spec_camwe_counts() {
        let ws = WorkingSample {
            z: 0.0,
            x_values: alloc::vec![1.0, 2.0, 3.0],
            y_values: alloc::vec![2.5, 3.5],
        };
        assert_eq!(sens_spec_camwe(&ws, -10.0), (1.0, 0.0));
        assert_eq!(sens_spec_camwe(&ws, 10.0), (0.0, 1.0));
        let (q, p) = sens_spec_camwe(&ws, 2.5);
        assert_eq!(q, 1.0); // both y ≥ 2.5
        assert_eq!(p, 2.0 / 3.0); // x ≤ 2.5
    }

    #[test]
    fn roc_camwe_separated_and_singletons() {
        let sep = WorkingSample {
            z: 0.0,
            x_values: alloc::vec![0.0, 1.0],
            y_values: alloc::vec![5.0, 6.0],
        };
        let pts = roc_curve_camwe(&sep);
        assert!(pts
            .iter()
            .any(|p| p.one_minus_specificity == 0.0 && p.sensitivity == 1.0));

        let tiny =
            WorkingSample { z: 0.0, x_values: alloc::vec![0.0], y_values: alloc::vec![1.0] };
        let pts = roc_curve_camwe(&tiny);
        let coords: Vec<(f64, f64)> =
            pts.iter().map(|p| (p.one_minus_specificity, p.sensitivity)).collect();
        assert_eq!(coords, alloc::vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
    }

    #[test]
    fn roc_camwe_area_equals_mann_whitney_untied() {
        // power-of-two sample sizes make every trapezoid term dyadic, so the
        // area matches the Mann-Whitney statistic bit for bit
        let x = [0.3, 1.7, -0.4, 2.9, 0.05, 1.3, 2.2, -0.8];
        let y = [0.9, 2.1];
        let ws = WorkingSample { z: 0.0, x_values: x.to_vec(), y_values: y.to_vec() };
        let area = roc_area(&roc_curve_camwe(&ws));
        assert_eq!(area, mann_whitney(&x, &y).unwrap());

        // non-dyadic sizes agree to accumulation noise
        let x = [0.3, 1.7, -0.4, 2.9, 0.05];
        let y = [0.9, 2.1, -0.1, 3.3, 1.1];
        let ws = WorkingSample { z: 0.0, x_values: x.to_vec(), y_values: y.to_vec() };
        let area = roc_area(&roc_curve_camwe(&ws));
        assert!((area - mann_whitney(&x, &y).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn youden_cases() {
        let sep = WorkingSample {
            z: 0.0,
            x_values: alloc::vec![0.0, 1.0],
            y_values: alloc::vec![5.0, 6.0],
        };
        let (yi, c) = youden_index(&sep);
        assert_eq!(yi, 1.0);
        assert_eq!(c, 1.0); // smallest threshold achieving YI = 1

        let degenerate =
            WorkingSample { z: 0.0, x_values: alloc::vec![0.0], y_values: alloc::vec![0.0] };
        let (yi, c) = youden_index(&degenerate);
        assert_eq!((yi, c), (1.0, 0.0));
    }

    #[test]
    fn bivariate_kernel_degenerate_cases() {
        let z0 = [2.0, 2.0, 2.0];
        let x = xs(&z0, &[1.0, 2.0, 3.0]);
        let y = ys(&z0, &[2.5, 0.5, 4.0]);
        // all covariates at z: every weight equal, reduces to Mann-Whitney
        let est =
            auc_bivariate_kernel(&x, &y, 0.5, 0.5, Kernel::epanechnikov(), 2.0).unwrap();
        assert!(
            (est.value - mann_whitney(x.markers(), y.markers()).unwrap()).abs() < 1e-15
        );
        // z outside both windows
        assert!(matches!(
            auc_bivariate_kernel(&x, &y, 0.5, 0.5, Kernel::epanechnikov(), 10.0),
            Err(Error::ZeroDenominator { .. })
        ));
        assert!(auc_bivariate_kernel(&x, &y, 0.0, 0.5, Kernel::epanechnikov(), 2.0).is_err());
    }
}
