//! Reduced Palm measures of the Ginibre field: normalisation constants,
//! truncated Radon-Nikodym densities, and a finite-N conditional sampler.
//!
//! For tuples `x`, `y` of `m` points the density of the reduced Palm measure at
//! `x` against the one at `y` is the `r → ∞` limit of
//!
//! ```text
//! Z_{x,y}⁻¹ Π_{|s_j|<r} |x - s_j|² / |y - s_j|²,   |x - s| = Π_i |x_i - s|
//! Z_{x,y} = (det K(x) / det K(y)) · (|Δ(y)|² / |Δ(x)|²)
//! ```
//!
//! with `Δ` the difference product. Everything is accumulated in log space.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{Configuration, Point, Provenance, Truncation, Window};
use crate::pointfield::{ginibre_eigenvalues, ginibre_window_radius};
use crate::rng::seeded_rng;
use crate::scalar::Real;

/// Pair distance below which two tuple points count as coincident; at most
/// one such pair is supported.
pub const PAIR_DEGENERACY: f64 = 1e-6;
/// The closest pair is evaluated in divided-difference form below this
/// distance; the direct determinant loses `~ε/|h|²` to cancellation.
pub const REGULARIZE_DISTANCE: f64 = 1e-3;
/// Distance at which a configuration point counts as sitting on a conditioning point.
pub const SINGULAR_DISTANCE: f64 = 1e-12;
pub const MAX_PINNED: usize = 8;
const LOG_UNDERFLOW: f64 = -700.0;

/// Points the field is conditioned on.
#[derive(Clone, Debug, PartialEq)]
pub struct PalmCondition<T> {
    pinned: Vec<Point<T>>,
    pub truncation: Truncation<T>,
}

impl<T: Real> PalmCondition<T> {
    /// At most [`MAX_PINNED`] pairwise distinct points. An empty list is the
    /// degenerate, unconditioned case.
    pub fn new(pinned: Vec<Point<T>>, truncation: Truncation<T>) -> Result<Self> {
        if pinned.len() > MAX_PINNED {
            return Err(Error::InvalidArgument(format!("at most {MAX_PINNED} pinned points supported")));
        }
        truncation.validate()?;
        for (i, p) in pinned.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFinite { re: p.re.to_f64_lossy(), im: p.im.to_f64_lossy() });
            }
            if pinned[..i].iter().any(|q| q == p) {
                return Err(Error::InvalidArgument("pinned points must be pairwise distinct".into()));
            }
        }
        Ok(Self { pinned, truncation })
    }

    pub fn pinned(&self) -> &[Point<T>] {
        &self.pinned
    }
}

fn canonical<T: Real>(pts: &[Point<T>]) -> Vec<Point<T>> {
    let mut v = pts.to_vec();
    v.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    v
}

fn check_tuples<T: Real>(x: &[Point<T>], y: &[Point<T>]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!("tuple sizes differ: {} vs {}", x.len(), y.len())));
    }
    if x.is_empty() {
        return Err(Error::InvalidArgument("tuples must hold at least one point".into()));
    }
    if let Some(p) = x.iter().chain(y).find(|p| !p.is_finite()) {
        return Err(Error::NonFinite { re: p.re.to_f64_lossy(), im: p.im.to_f64_lossy() });
    }
    Ok(())
}

/// `expm1(z) / z`, continuous at 0.
fn expm1_over<T: Real>(z: Complex<T>) -> Complex<T> {
    if z.norm() < T::lit(1e-2) {
        let one = Complex::new(T::one(), T::zero());
        let mut term = one;
        let mut sum = one;
        for k in 2..=7 {
            term = term * z / T::from_usize_lossy(k);
            sum = sum + term;
        }
        sum
    } else {
        (z.exp() - Complex::new(T::one(), T::zero())) / z
    }
}

fn real_expm1_over<T: Real>(t: T) -> T {
    if t.abs() < T::lit(1e-2) {
        expm1_over(Complex::new(t, T::zero())).re
    } else {
        t.exp_m1() / t
    }
}

/// `log(det K(x) / |Δ(x)|²)`, split into its two parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedGram<T> {
    /// `log det` of the (possibly regularised) kernel matrix.
    pub log_det: T,
    /// `log |Δ|²` over the remaining pairs.
    pub log_vandermonde: T,
}

impl<T: Real> ReducedGram<T> {
    pub fn log_value(&self) -> T {
        self.log_det - self.log_vandermonde
    }
}

/// `det[K(x_i, x_j)] / |Δ(x)|²` in log space.
///
/// The closest pair, if nearer than [`REGULARIZE_DISTANCE`], is handled by
/// replacing its second row and column with divided differences, which
/// removes the common `|h|²` factor exactly and extends the value
/// continuously to coincident points. Two or more pairs within
/// [`PAIR_DEGENERACY`] are rejected.
pub fn reduced_gram<T: Real>(x: &[Point<T>]) -> Result<ReducedGram<T>> {
    let m = x.len();
    let thr2 = T::lit(PAIR_DEGENERACY * PAIR_DEGENERACY);
    let mut degenerate = 0;
    let mut closest: Option<((usize, usize), T)> = None;
    for i in 0..m {
        for j in (i + 1)..m {
            let d2 = (x[i] - x[j]).norm_sqr();
            if d2 < thr2 {
                degenerate += 1;
            }
            if closest.is_none_or(|(_, best)| d2 < best) {
                closest = Some(((i, j), d2));
            }
        }
    }
    if degenerate > 1 {
        return Err(Error::Degenerate("more than one coincident pair; only pair degeneracies are supported".into()));
    }
    let reg2 = T::lit(REGULARIZE_DISTANCE * REGULARIZE_DISTANCE);
    let close = closest.filter(|&(_, d2)| d2 < reg2).map(|(pair, _)| pair);
    let half = T::lit(0.5);
    let z: Vec<Complex<T>> = x.iter().map(|p| p.to_complex()).collect();
    let n2: Vec<T> = x.iter().map(|p| p.norm_sqr()).collect();
    let entry = |l: usize, k: usize| -> Complex<T> {
        (Complex::new(-half * (n2[l] + n2[k]), T::zero()) + z[l] * z[k].conj()).exp() * T::FRAC_1_PI()
    };
    let mut a: Vec<Complex<T>> = Vec::with_capacity(m * m);
    for l in 0..m {
        for k in 0..m {
            a.push(entry(l, k));
        }
    }
    if let Some((i, j)) = close {
        let base = z[i];
        let h = z[j] - base;
        for k in 0..m {
            if k == j {
                continue;
            }
            // row j: (e^{x_j x̄_k} - e^{x_i x̄_k}) / h
            let row = (Complex::new(-half * (n2[j] + n2[k]), T::zero()) + base * z[k].conj()).exp()
                * z[k].conj()
                * expm1_over(h * z[k].conj());
            a[j * m + k] = row * T::FRAC_1_PI();
            // column j: (e^{x_k x̄_j} - e^{x_k x̄_i}) / h̄
            let col = (Complex::new(-half * (n2[k] + n2[j]), T::zero()) + z[k] * base.conj()).exp()
                * z[k]
                * expm1_over(z[k] * h.conj());
            a[k * m + j] = col * T::FRAC_1_PI();
        }
        let p = h * base.conj();
        let q = base * h.conj();
        let h2 = h.norm_sqr();
        let mixed = Complex::new((-n2[j] + n2[i]).exp(), T::zero())
            * base.conj()
            * expm1_over(p)
            * base
            * expm1_over(q);
        let diag = mixed + Complex::new((-h2).exp() * real_expm1_over(h2), T::zero());
        a[j * m + j] = diag * T::FRAC_1_PI();
    }
    let ld = linalg::log_det(&mut a, m);
    if ld.is_singular() || !ld.log_abs.is_finite() {
        return Err(Error::Degenerate("kernel matrix is singular".into()));
    }
    let mut log_vandermonde = T::zero();
    for l in 0..m {
        for k in (l + 1)..m {
            if close == Some((l, k)) {
                continue;
            }
            log_vandermonde = log_vandermonde + (x[l] - x[k]).norm_sqr().ln();
        }
    }
    Ok(ReducedGram { log_det: ld.log_abs, log_vandermonde })
}

/// `log Z_{x,y}`; order of points within each tuple is irrelevant.
pub fn log_palm_normalization<T: Real>(x: &[Point<T>], y: &[Point<T>]) -> Result<T> {
    check_tuples(x, y)?;
    let gx = reduced_gram(&canonical(x))?;
    let gy = reduced_gram(&canonical(y))?;
    Ok(gx.log_value() - gy.log_value())
}

/// `Z_{x,y}`. Fails when a log-determinant drops below -700; use
/// [`log_palm_normalization`] there.
pub fn palm_normalization<T: Real>(x: &[Point<T>], y: &[Point<T>]) -> Result<T> {
    check_tuples(x, y)?;
    let gx = reduced_gram(&canonical(x))?;
    let gy = reduced_gram(&canonical(y))?;
    for g in [gx, gy] {
        if g.log_det.to_f64_lossy() < LOG_UNDERFLOW {
            return Err(Error::LogUnderflow { value: g.log_det.to_f64_lossy() });
        }
    }
    let log_z = gx.log_value() - gy.log_value();
    if log_z.abs().to_f64_lossy() > -LOG_UNDERFLOW {
        return Err(Error::LogUnderflow { value: log_z.to_f64_lossy() });
    }
    Ok(log_z.exp())
}

/// `log` of the truncated density `Z⁻¹ Π_{|s_j|<r} |x - s_j|² / |y - s_j|²`.
pub fn palm_log_density_ratio<T: Real>(
    x: &[Point<T>],
    y: &[Point<T>],
    config: &[Point<T>],
    truncation: Truncation<T>,
) -> Result<T> {
    check_tuples(x, y)?;
    truncation.validate()?;
    let (x, y) = (canonical(x), canonical(y));
    let sing2 = T::lit(SINGULAR_DISTANCE * SINGULAR_DISTANCE);
    for s in config {
        for q in x.iter().chain(&y) {
            let d2 = (*q - *s).norm_sqr();
            if d2 < sing2 {
                return Err(Error::Singular { distance: d2.sqrt().to_f64_lossy() });
            }
        }
    }
    let r2 = truncation.radius_sqr();
    let mut acc = T::zero();
    for s in config.iter().filter(|s| s.norm_sqr() < r2) {
        for (xi, yi) in x.iter().zip(&y) {
            acc = acc + (*xi - *s).norm_sqr().ln() - (*yi - *s).norm_sqr().ln();
        }
    }
    let log_z = reduced_gram(&x)?.log_value() - reduced_gram(&y)?.log_value();
    Ok(acc - log_z)
}

pub fn palm_density_ratio<T: Real>(
    x: &[Point<T>],
    y: &[Point<T>],
    config: &[Point<T>],
    truncation: Truncation<T>,
) -> Result<T> {
    palm_log_density_ratio(x, y, config, truncation).map(|l| l.exp())
}

/// `(r, log ratio)` over increasing truncation radii.
pub fn palm_stabilization<T: Real>(
    x: &[Point<T>],
    y: &[Point<T>],
    config: &[Point<T>],
    radii: &[T],
) -> Result<Vec<(T, T)>> {
    radii
        .iter()
        .map(|&r| palm_log_density_ratio(x, y, config, Truncation::Radius(r)).map(|l| (r, l)))
        .collect()
}

#[derive(Clone, Debug)]
pub struct PalmRun {
    /// Free points only (the reduced configuration).
    pub config: Configuration<f64>,
    pub tail_acceptance: f64,
}

/// Tuning of [`sample_palm_finite_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PalmSampler {
    /// Standard deviation of the single-particle Gaussian move.
    pub move_step: f64,
}

impl Default for PalmSampler {
    fn default() -> Self {
        Self { move_step: 0.5 }
    }
}

/// Reduced finite-N Ginibre field given `m` pinned eigenvalues.
///
/// Metropolis single-particle moves of the `N - m` free points, targeting
/// `Π_{i<j}|z_i - z_j|² Π_k Π_i |x_k - z_i|² e^{-Σ|z_i|²}`. The chain starts
/// from an exact `N - m` point Ginibre sample; a sweep is `N - m` proposals.
pub fn sample_palm_finite_with(
    n: usize,
    condition: &PalmCondition<f64>,
    n_sweeps: usize,
    seed: u64,
    tuning: &PalmSampler,
) -> Result<PalmRun> {
    let pinned = condition.pinned();
    let m = pinned.len();
    if n < m + 1 {
        return Err(Error::InvalidArgument(format!("need N >= m + 1 (N = {n}, m = {m})")));
    }
    if n_sweeps == 0 {
        return Err(Error::InvalidArgument("Palm sampler needs at least one sweep".into()));
    }
    let free = n - m;
    let mut z = ginibre_eigenvalues(free, seed)?;
    let mut rng = seeded_rng(crate::rng::split_seed(seed, 0x9a17));
    let log_weight = |zs: &[Point<f64>], i: usize, at: Point<f64>| -> f64 {
        let mut w = -at.norm_sqr();
        for (j, q) in zs.iter().enumerate() {
            if j != i {
                w += (at - *q).norm_sqr().ln();
            }
        }
        for q in pinned {
            w += (at - *q).norm_sqr().ln();
        }
        w
    };
    let tail_start = n_sweeps - (n_sweeps / 10).max(1);
    let (mut tail_prop, mut tail_acc) = (0u64, 0u64);
    for sweep in 0..n_sweeps {
        for _ in 0..free {
            let i = rng.random_range(0..free);
            let dx: f64 = StandardNormal.sample(&mut rng);
            let dy: f64 = StandardNormal.sample(&mut rng);
            let cand = z[i] + Point::new(dx, dy) * tuning.move_step;
            let delta = log_weight(&z, i, cand) - log_weight(&z, i, z[i]);
            let ok = delta.is_finite() && rng.random::<f64>().ln() < delta;
            if ok {
                z[i] = cand;
            }
            if sweep >= tail_start {
                tail_prop += 1;
                tail_acc += ok as u64;
            }
        }
    }
    let tail_acceptance = tail_acc as f64 / tail_prop.max(1) as f64;
    if tail_acceptance < 1e-3 {
        return Err(Error::MixingFailure { rate: tail_acceptance });
    }
    let window = Window::disk(ginibre_window_radius(n, &z));
    let config = Configuration::new(z, window)?.with_provenance(Provenance::new("ginibre_palm", Some(seed)));
    Ok(PalmRun { config, tail_acceptance })
}

pub fn sample_palm_finite(
    n: usize,
    condition: &PalmCondition<f64>,
    n_sweeps: usize,
    seed: u64,
) -> Result<Configuration<f64>> {
    sample_palm_finite_with(n, condition, n_sweeps, seed, &PalmSampler::default()).map(|r| r.config)
}
