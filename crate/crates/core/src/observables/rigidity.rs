use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{Configuration, Point};
use crate::scalar::Real;
use crate::stats;

/// `(N_R, M_R)`: count and vector sum of the points with `|s| < R`.
pub fn number_mean_functions<T: Real>(config: &Configuration<T>, radius: T) -> (usize, Point<T>) {
    config
        .points()
        .iter()
        .filter(|p| p.in_disk(radius))
        .fold((0, Point::origin()), |(n, m), &p| (n + 1, m + p))
}

/// Ensemble statistics of `N_R` at one radius, with jackknife errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumberStatistics {
    pub radius: f64,
    pub mean: f64,
    pub mean_stderr: f64,
    pub variance: f64,
    pub variance_stderr: f64,
    /// `variance / mean`; NaN when the mean vanishes.
    pub ratio: f64,
    pub ratio_stderr: f64,
    pub ensemble_size: usize,
}

fn ratio(xs: &[f64]) -> f64 {
    stats::variance(xs) / stats::mean(xs)
}

pub fn number_variance_profile<T: Real>(ensemble: &[Configuration<T>], radii: &[T]) -> Vec<NumberStatistics> {
    radii
        .iter()
        .map(|&r| {
            let counts: Vec<f64> =
                ensemble.par_iter().map(|c| number_mean_functions(c, r).0 as f64).collect();
            let (mean, mean_stderr) = stats::jackknife(&counts, stats::mean);
            let (variance, variance_stderr) = stats::jackknife(&counts, stats::variance);
            let (ratio, ratio_stderr) = stats::jackknife(&counts, ratio);
            NumberStatistics {
                radius: r.to_f64_lossy(),
                mean,
                mean_stderr,
                variance,
                variance_stderr,
                ratio,
                ratio_stderr,
                ensemble_size: counts.len(),
            }
        })
        .collect()
}
