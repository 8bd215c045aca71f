//! Ginibre correlation kernel and its determinantal correlation functions.

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::Point;
use crate::scalar::Real;

/// Infinite-volume exponential kernel or its rank-`n` truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    GinibreInfinite,
    GinibreFinite { n: usize },
}

/// `K(x, y) = π⁻¹ exp(-|x|²/2 - |y|²/2 + x ȳ)`, or the truncated series
/// `π⁻¹ e^{-(|x|²+|y|²)/2} Σ_{k<n} (x ȳ)^k / k!`.
///
/// Both forms are evaluated from combined exponents, so no intermediate
/// factor overflows even far from the origin.
pub fn kernel_eval<T: Real>(spec: KernelSpec, x: Point<T>, y: Point<T>) -> Complex<T> {
    let half = T::lit(0.5);
    let gauss = -half * (x.norm_sqr() + y.norm_sqr());
    let w = x.to_complex() * y.to_complex().conj();
    match spec {
        KernelSpec::GinibreInfinite => (Complex::new(gauss, T::zero()) + w).exp() * T::FRAC_1_PI(),
        KernelSpec::GinibreFinite { n } => truncated_series(n, w, gauss) * T::FRAC_1_PI(),
    }
}

/// `Σ_{k<n} exp(gauss) w^k / k!`, every term formed in log space.
fn truncated_series<T: Real>(n: usize, w: Complex<T>, gauss: T) -> Complex<T> {
    if n == 0 {
        return Complex::new(T::zero(), T::zero());
    }
    let mut sum = Complex::new(gauss.exp(), T::zero());
    let r = w.norm();
    if r == T::zero() {
        return sum;
    }
    let (ln_r, theta) = (r.ln(), w.arg());
    let mut ln_fact = T::zero();
    for k in 1..n {
        let kf = T::from_usize_lossy(k);
        ln_fact = ln_fact + kf.ln();
        let mag = (gauss + kf * ln_r - ln_fact).exp();
        let (s, c) = (kf * theta).sin_cos();
        sum = sum + Complex::new(mag * c, mag * s);
    }
    sum
}

static CLAMPED: AtomicU64 = AtomicU64::new(0);

/// Number of correlation evaluations clamped from a tiny negative value to 0.
pub fn clamped_count() -> u64 {
    CLAMPED.load(Ordering::Relaxed)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationValue<T> {
    /// `max(Re det, 0)`.
    pub value: T,
    /// Imaginary part of the determinant (roundoff residue).
    pub imaginary: T,
    /// True when a negative real part was clamped.
    pub clamped: bool,
}

/// `ρⁿ(x_1..x_n) = det[K(x_i, x_j)]`, with diagnostics.
pub fn correlation_detailed<T: Real>(spec: KernelSpec, points: &[Point<T>]) -> Result<CorrelationValue<T>> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("correlation needs at least one point".into()));
    }
    if let Some(p) = points.iter().find(|p| !p.is_finite()) {
        return Err(Error::NonFinite { re: p.re.to_f64_lossy(), im: p.im.to_f64_lossy() });
    }
    let n = points.len();
    let mut a = Vec::with_capacity(n * n);
    for &xi in points {
        for &xj in points {
            a.push(kernel_eval(spec, xi, xj));
        }
    }
    let d = linalg::det(&mut a, n);
    if !(d.re.is_finite() && d.im.is_finite()) {
        return Err(Error::Degenerate("determinant routine produced a non-finite value".into()));
    }
    let clamped = d.re < T::zero();
    if clamped {
        CLAMPED.fetch_add(1, Ordering::Relaxed);
    }
    Ok(CorrelationValue { value: d.re.max(T::zero()), imaginary: d.im, clamped })
}

pub fn correlation<T: Real>(spec: KernelSpec, points: &[Point<T>]) -> Result<T> {
    correlation_detailed(spec, points).map(|c| c.value)
}
