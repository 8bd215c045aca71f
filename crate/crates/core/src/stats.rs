//! Sample moments, leave-one-out jackknife and ordinary least squares.

use crate::scalar::Real;

pub fn mean<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::nan();
    }
    xs.iter().fold(T::zero(), |a, &x| a + x) / T::from_usize_lossy(xs.len())
}

/// Unbiased sample variance (`n - 1` denominator); zero for fewer than two values.
pub fn variance<T: Real>(xs: &[T]) -> T {
    if xs.len() < 2 {
        return T::zero();
    }
    let m = mean(xs);
    xs.iter().fold(T::zero(), |a, &x| a + (x - m) * (x - m)) / T::from_usize_lossy(xs.len() - 1)
}

/// Standard error of the mean.
pub fn std_error<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::nan();
    }
    (variance(xs) / T::from_usize_lossy(xs.len())).sqrt()
}

/// Jackknife standard error of `stat`; the estimate itself is `stat(xs)`.
pub fn jackknife<T: Real, F: Fn(&[T]) -> T>(xs: &[T], stat: F) -> (T, T) {
    let n = xs.len();
    let full = stat(xs);
    if n < 2 {
        return (full, T::zero());
    }
    let mut buf = Vec::with_capacity(n - 1);
    let loo: Vec<T> = (0..n)
        .map(|i| {
            buf.clear();
            buf.extend(xs.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x));
            stat(&buf)
        })
        .collect();
    let m = mean(&loo);
    let nf = T::from_usize_lossy(n);
    let ss = loo.iter().fold(T::zero(), |a, &x| a + (x - m) * (x - m));
    (full, ((nf - T::one()) / nf * ss).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Standard error of the slope from the residual variance.
    pub slope_stderr: T,
    pub n: usize,
}

/// Least-squares line through `(xs, ys)`; needs at least two distinct `x`.
pub fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> Option<LinearFit<T>> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let (mx, my) = (mean(xs), mean(ys));
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
    }
    if sxx == T::zero() {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let ssr = xs.iter().zip(ys).fold(T::zero(), |a, (&x, &y)| {
            let r = y - intercept - slope * x;
            a + r * r
        });
        (ssr / T::from_usize_lossy(n - 2) / sxx).sqrt()
    } else {
        T::zero()
    };
    Some(LinearFit { slope, intercept, slope_stderr, n })
}
