//! Small dense complex determinants (LU with partial pivoting).

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

/// `det = phase · exp(log_abs)`; a singular matrix has `log_abs = -∞` and zero phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDet<T> {
    pub log_abs: T,
    pub phase: Complex<T>,
}

impl<T: Real> LogDet<T> {
    pub fn is_singular(&self) -> bool {
        self.log_abs == T::neg_infinity()
    }

    pub fn value(&self) -> Complex<T> {
        if self.is_singular() {
            Complex::zero()
        } else {
            self.phase * self.log_abs.exp()
        }
    }
}

/// Log-determinant of the row-major `n × n` matrix `a`, destroyed in place.
pub fn log_det<T: Real>(a: &mut [Complex<T>], n: usize) -> LogDet<T> {
    assert_eq!(a.len(), n * n, "matrix buffer has wrong size");
    let mut log_abs = T::zero();
    let mut phase = Complex::<T>::one();
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k * n + k].norm();
        for r in (k + 1)..n {
            let v = a[r * n + k].norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == T::zero() {
            return LogDet { log_abs: T::neg_infinity(), phase: Complex::zero() };
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            phase = -phase;
        }
        let d = a[k * n + k];
        log_abs = log_abs + best.ln();
        phase = phase * (d / best);
        for r in (k + 1)..n {
            let f = a[r * n + k] / d;
            if f.is_zero() {
                continue;
            }
            for c in (k + 1)..n {
                let v = a[k * n + c];
                a[r * n + c] = a[r * n + c] - f * v;
            }
        }
    }
    LogDet { log_abs, phase }
}

pub fn det<T: Real>(a: &mut [Complex<T>], n: usize) -> Complex<T> {
    log_det(a, n).value()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn matches_cofactor_expansion() {
        let m = [c(1.0, 2.0), c(0.5, -1.0), c(3.0, 0.0), c(-2.0, 1.0), c(0.0, 1.0), c(1.0, 1.0), c(4.0, -3.0), c(2.0, 2.0), c(-1.0, 0.5)];
        let cof = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
            + m[2] * (m[3] * m[7] - m[4] * m[6]);
        let mut a = m;
        let d = det(&mut a, 3);
        assert!((d - cof).norm() < 1e-12 * cof.norm());
    }

    #[test]
    fn singular_and_pivoting() {
        let mut a = [c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)];
        assert!(log_det(&mut a, 2).is_singular());
        let mut p = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        assert!((det(&mut p, 2) - c(-1.0, 0.0)).norm() < 1e-15);
        let mut e: [Complex<f64>; 0] = [];
        assert_eq!(det(&mut e, 0), c(1.0, 0.0));
    }
}
