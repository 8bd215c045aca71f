use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::model::Point;
use crate::scalar::Real;
use crate::stats;

/// Ensemble mean-squared displacement of one particle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MsdSeries<T> {
    pub lags: Vec<T>,
    pub values: Vec<T>,
    pub stderr: Vec<T>,
    pub ensemble_size: usize,
}

/// Per-replica squared displacements `|X_{t_k} - X_0|²`, one row per replica.
#[derive(Clone, Debug, PartialEq)]
pub struct MsdSamples<T> {
    pub lags: Vec<T>,
    pub samples: Vec<Vec<T>>,
}

impl<T: Real> MsdSamples<T> {
    pub fn series(&self) -> MsdSeries<T> {
        let m = self.samples.len();
        let mut values = Vec::with_capacity(self.lags.len());
        let mut stderr = Vec::with_capacity(self.lags.len());
        let mut col = Vec::with_capacity(m);
        for k in 0..self.lags.len() {
            col.clear();
            col.extend(self.samples.iter().map(|row| row[k]));
            values.push(stats::mean(&col));
            stderr.push(if m > 1 { stats::std_error(&col) } else { T::zero() });
        }
        MsdSeries { lags: self.lags.clone(), values, stderr, ensemble_size: m }
    }

    /// Exponent fit with a leave-one-replica-out jackknife error in place of
    /// the regression error.
    pub fn jackknife_exponent(&self, window: (T, T)) -> Result<ExponentFit<T>> {
        let full = scaling_exponent(&self.series(), window)?;
        let m = self.samples.len();
        if m < 2 {
            return Ok(full);
        }
        let mut alphas = Vec::with_capacity(m);
        for skip in 0..m {
            let rest = MsdSamples {
                lags: self.lags.clone(),
                samples: self
                    .samples
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, r)| r.clone())
                    .collect(),
            };
            alphas.push(scaling_exponent(&rest.series(), window)?.alpha);
        }
        let mean = stats::mean(&alphas);
        let ss = alphas.iter().fold(T::zero(), |a, &x| a + (x - mean) * (x - mean));
        let mf = T::from_usize_lossy(m);
        Ok(ExponentFit { stderr: ((mf - T::one()) / mf * ss).sqrt(), ..full })
    }
}

fn lag_indices<T: Real>(times: &[T], lags: &[T]) -> Result<Vec<usize>> {
    lags.iter()
        .map(|&lag| {
            let tol = T::lit(1e-9) * lag.abs().max(T::one());
            let k = times.partition_point(|&t| t < lag - tol);
            if k < times.len() && (times[k] - lag).abs() <= tol {
                Ok(k)
            } else {
                Err(Error::LagOffGrid(lag.to_f64_lossy()))
            }
        })
        .collect()
}

/// Squared displacements of `paths` (all sampled at `times`) at each lag.
pub fn msd_samples<T: Real>(times: &[T], paths: &[Vec<Point<T>>], lags: &[T]) -> Result<MsdSamples<T>> {
    if lags.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("lags must increase strictly".into()));
    }
    if paths.iter().any(|p| p.len() != times.len()) {
        return Err(Error::InhomogeneousGrid);
    }
    let idx = lag_indices(times, lags)?;
    let samples = paths
        .iter()
        .map(|path| idx.iter().map(|&k| (path[k] - path[0]).norm_sqr()).collect())
        .collect();
    Ok(MsdSamples { lags: lags.to_vec(), samples })
}

/// MSD of particle `tagged` over an ensemble sharing one time grid.
pub fn msd<T: Real>(trajectories: &[Trajectory<T>], tagged: usize, lags: &[T]) -> Result<MsdSeries<T>> {
    let Some(first) = trajectories.first() else {
        return Err(Error::TooFewSamples { used: 0, total: 0 });
    };
    if trajectories.iter().any(|t| t.times != first.times) {
        return Err(Error::InhomogeneousGrid);
    }
    let paths = trajectories.iter().map(|t| t.path(tagged)).collect::<Result<Vec<_>>>()?;
    Ok(msd_samples(&first.times, &paths, lags)?.series())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit<T> {
    pub alpha: T,
    pub stderr: T,
    pub intercept: T,
    pub n_lags: usize,
    pub window: (T, T),
}

/// `[T/10, T/2]`.
pub fn default_fit_window<T: Real>(t_max: T) -> (T, T) {
    (t_max / T::lit(10.0), t_max / T::lit(2.0))
}

/// Least-squares slope of `log msd` against `log t` over lags in the closed
/// window.
pub fn scaling_exponent<T: Real>(series: &MsdSeries<T>, window: (T, T)) -> Result<ExponentFit<T>> {
    let (lo, hi) = window;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in series.lags.iter().zip(&series.values) {
        if t < lo || t > hi || !(t > T::zero()) {
            continue;
        }
        if !(v > T::zero()) {
            return Err(Error::NonPositive { lag: t.to_f64_lossy(), value: v.to_f64_lossy() });
        }
        xs.push(t.ln());
        ys.push(v.ln());
    }
    if xs.len() < 5 {
        return Err(Error::InvalidArgument(format!(
            "exponent fit needs at least 5 lags in [{lo}, {hi}], found {}",
            xs.len()
        )));
    }
    let fit = stats::linear_fit(&xs, &ys).ok_or_else(|| Error::InvalidArgument("degenerate fit window".into()))?;
    Ok(ExponentFit { alpha: fit.slope, stderr: fit.slope_stderr, intercept: fit.intercept, n_lags: fit.n, window })
}

/// The path `t ↦ ε X_{t/ε²}` on `t ∈ [0, t_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RescaledPath<T> {
    pub times: Vec<T>,
    pub points: Vec<Point<T>>,
    pub sup_norm: T,
}

/// Diffusive rescaling of one particle, sampled at the trajectory's own times
/// up to `t_max` with nearest-frame lookup at `t/ε²`.
pub fn rescaled_path<T: Real>(traj: &Trajectory<T>, tagged: usize, eps: T, t_max: T) -> Result<RescaledPath<T>> {
    if !(eps > T::zero()) || !(t_max >= T::zero()) {
        return Err(Error::InvalidArgument("need eps > 0 and t_max >= 0".into()));
    }
    let path = traj.path(tagged)?;
    let available = *traj.times.last().expect("non-empty trajectory");
    let required = t_max / (eps * eps);
    if required > available * (T::one() + T::lit(1e-12)) {
        return Err(Error::HorizonTooShort { available: available.to_f64_lossy(), required: required.to_f64_lossy() });
    }
    let nearest = |s: T| {
        let k = traj.times.partition_point(|&t| t < s);
        if k == 0 {
            0
        } else if k == traj.times.len() || s - traj.times[k - 1] <= traj.times[k] - s {
            k - 1
        } else {
            k
        }
    };
    let times: Vec<T> = traj.times.iter().copied().take_while(|&t| t <= t_max).collect();
    let points: Vec<Point<T>> = times.iter().map(|&t| path[nearest(t / (eps * eps))] * eps).collect();
    let sup_norm = points.iter().fold(T::zero(), |a, p| a.max(p.norm()));
    Ok(RescaledPath { times, points, sup_norm })
}
