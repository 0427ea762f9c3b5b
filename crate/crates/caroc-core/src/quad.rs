//! Deterministic composite Simpson quadrature.
//!
//! Fixed node counts keep every integral reproducible bit for bit; the
//! default 2001-point rule is far more accurate than any tolerance used by
//! the kernel-moment and roughness computations.

/// Composite Simpson rule with `n` nodes (`n` odd, ≥ 3) over `[a, b]`.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 3 && n % 2 == 1, "simpson needs an odd node count >= 3");
    let h = (b - a) / (n - 1) as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n - 1 {
        let x = a + h * i as f64;
        sum += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    sum * h / 3.0
}

/// Default node count used for kernel integrals.
pub const DEFAULT_NODES: usize = 2001;

/// Trapezoid rule over explicit (grid, value) pairs; grid must be sorted.
pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(grid.len(), values.len());
    let mut area = 0.0;
    for i in 1..grid.len() {
        area += 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
    }
    area
}
