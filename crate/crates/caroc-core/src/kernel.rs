//! Kernel densities, their moments, and the equivalent-kernel construction.
//!
//! All supported kernels are symmetric densities with compact support. The
//! equivalent kernel `K*(u) = e₁ᵀ S_p⁻¹ (1, u, …, uᵖ)ᵀ K(u)` is the effective
//! weight function of a degree-p local polynomial fit; for odd p it is a
//! (p+1)th-order kernel, which the unit tests verify by quadrature.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::normal;
use crate::quad::{self, DEFAULT_NODES};
use crate::Result;

/// Supported base kernel families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum KernelFamily {
    Epanechnikov,
    Biweight,
    Triweight,
    /// Standard normal density truncated to a finite radius and renormalized,
    /// so compact support holds literally.
    GaussianTruncated,
}

/// A compactly supported symmetric kernel density.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Kernel {
    pub family: KernelFamily,
    pub support_halfwidth: f64,
}

/// Default truncation radius for the Gaussian kernel.
pub const GAUSSIAN_TRUNCATION_RADIUS: f64 = 4.0;

impl Kernel {
    pub fn epanechnikov() -> Self {
        Kernel { family: KernelFamily::Epanechnikov, support_halfwidth: 1.0 }
    }

    pub fn biweight() -> Self {
        Kernel { family: KernelFamily::Biweight, support_halfwidth: 1.0 }
    }

    pub fn triweight() -> Self {
        Kernel { family: KernelFamily::Triweight, support_halfwidth: 1.0 }
    }

    pub fn gaussian_truncated() -> Self {
        Kernel {
            family: KernelFamily::GaussianTruncated,
            support_halfwidth: GAUSSIAN_TRUNCATION_RADIUS,
        }
    }

    /// Evaluate K(u); zero outside the support.
    pub fn eval(&self, u: f64) -> f64 {
        let s = self.support_halfwidth;
        if u.abs() > s {
            return 0.0;
        }
        match self.family {
            KernelFamily::Epanechnikov => 0.75 * (1.0 - u * u),
            KernelFamily::Biweight => {
                let t = 1.0 - u * u;
                15.0 / 16.0 * t * t
            }
            KernelFamily::Triweight => {
                let t = 1.0 - u * u;
                35.0 / 32.0 * t * t * t
            }
            KernelFamily::GaussianTruncated => {
                let mass = normal::cdf(s) - normal::cdf(-s);
                normal::pdf(u) / mass
            }
        }
    }

    /// Scaled evaluation K_h(u) = K(u/h)/h.
    pub fn eval_scaled(&self, u: f64, h: f64) -> f64 {
        self.eval(u / h) / h
    }

    /// j-th moment μ_j(K) = ∫ uʲ K(u) du by composite Simpson quadrature.
    pub fn moment(&self, j: u32) -> f64 {
        let s = self.support_halfwidth;
        quad::simpson(|u| libm::pow(u, j as f64) * self.eval(u), -s, s, DEFAULT_NODES)
    }
}

/// The equivalent kernel of a degree-p local polynomial fit.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentKernel {
    pub order_p: usize,
    pub base: Kernel,
    /// Moment matrix S_p with entries μ_{j+l}(K), 0 ≤ j,l ≤ p.
    pub moment_matrix: Vec<Vec<f64>>,
    /// First row of S_p⁻¹; K*(u) = Σ_j coeffs[j] uʲ K(u).
    coeffs: Vec<f64>,
}

/// Polynomial orders accepted by the equivalent-kernel construction.
/// Odd orders are the recommended choice; 0 is kept for local-constant fits.
pub const SUPPORTED_ORDERS: [usize; 4] = [0, 1, 3, 5];

const CONDITION_LIMIT: f64 = 1e12;

impl EquivalentKernel {
    /// Build K* for a degree-p fit with the given base kernel.
    pub fn new(base: Kernel, p: usize) -> Result<Self> {
        if !SUPPORTED_ORDERS.contains(&p) {
            return Err(Error::InvalidSample(
                alloc::format!("unsupported polynomial order {p}; expected one of 0, 1, 3, 5")
                    .to_string(),
            ));
        }
        let dim = p + 1;
        let mut moments = vec![0.0; 2 * p + 1];
        for (j, m) in moments.iter_mut().enumerate() {
            *m = base.moment(j as u32);
        }
        let moment_matrix: Vec<Vec<f64>> =
            (0..dim).map(|j| (0..dim).map(|l| moments[j + l]).collect()).collect();

        let flat: Vec<f64> = moment_matrix.iter().flatten().copied().collect();
        let inv = invert_dense(&flat, dim)
            .ok_or(Error::SingularMomentMatrix { condition: f64::INFINITY })?;
        let condition = norm1(&flat, dim) * norm1(&inv, dim);
        if !condition.is_finite() || condition >= CONDITION_LIMIT {
            return Err(Error::SingularMomentMatrix { condition });
        }
        let coeffs = inv[..dim].to_vec();
        Ok(EquivalentKernel { order_p: p, base, moment_matrix, coeffs })
    }

    /// Evaluate K*(u).
    pub fn eval(&self, u: f64) -> f64 {
        let mut poly = 0.0;
        for c in self.coeffs.iter().rev() {
            poly = poly * u + c;
        }
        poly * self.base.eval(u)
    }

    /// j-th moment μ_j(K*) by quadrature.
    pub fn moment(&self, j: u32) -> f64 {
        let s = self.base.support_halfwidth;
        quad::simpson(|u| libm::pow(u, j as f64) * self.eval(u), -s, s, DEFAULT_NODES)
    }

    /// Roughness functional R(K*, ρ) = ∫ K*(u) K*(u/ρ) du.
    ///
    /// At ρ = 1 this is R(K*) = ∫ K*².
    pub fn roughness(&self, rho: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(Error::InvalidSample("roughness requires rho > 0".to_string()));
        }
        let s = self.base.support_halfwidth;
        Ok(quad::simpson(|u| self.eval(u) * self.eval(u / rho), -s, s, DEFAULT_NODES))
    }
}

/// Invert an n×n row-major matrix by Gauss-Jordan with partial pivoting.
fn invert_dense(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let mut pivot = col;
        for r in col + 1..n {
            if m[r * n + col].abs() > m[pivot * n + col].abs() {
                pivot = r;
            }
        }
        if m[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for c in 0..n {
                m.swap(col * n + c, pivot * n + c);
                inv.swap(col * n + c, pivot * n + c);
            }
        }
        let d = m[col * n + col];
        for c in 0..n {
            m[col * n + c] /= d;
            inv[col * n + c] /= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = m[r * n + col];
            if factor == 0.0 {
                continue;
            }
            for c in 0..n {
                m[r * n + c] -= factor * m[col * n + c];
                inv[r * n + c] -= factor * inv[col * n + c];
            }
        }
    }
    Some(inv)
}

fn norm1(a: &[f64], n: usize) -> f64 {
    let mut best = 0.0f64;
    for c in 0..n {
        let mut s = 0.0;
        for r in 0..n {
            s += a[r * n + c].abs();
        }
        best = best.max(s);
    }
    best
}
