use faer::Mat;
use num_complex::Complex;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::model::{Configuration, Point, Provenance, Window};
use crate::rng::seeded_rng;

/// Eigenvalues of an `n × n` matrix of i.i.d. standard complex Gaussians.
///
/// Real and imaginary parts are independent `N(0, 1/2)`, so each entry has
/// unit total variance and the bulk intensity is `1/π` without rescaling.
/// Entries are drawn in row-major order from a ChaCha8 stream keyed by `seed`.
pub fn ginibre_eigenvalues(n: usize, seed: u64) -> Result<Vec<Point<f64>>> {
    if n == 0 {
        return Err(Error::InvalidArgument("Ginibre sample needs N >= 1".into()));
    }
    let mut rng = seeded_rng(seed);
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid normal");
    let entries: Vec<Complex<f64>> =
        (0..n * n).map(|_| Complex::new(normal.sample(&mut rng), normal.sample(&mut rng))).collect();
    // thread-count independent results
    faer::set_global_parallelism(faer::Par::Seq);
    let m = Mat::<Complex<f64>>::from_fn(n, n, |i, j| entries[i * n + j]);
    let eig = m.eigenvalues().map_err(|_| Error::EigenNonConvergence { seed })?;
    let pts: Vec<Point<f64>> = eig.into_iter().map(Point::from_complex).collect();
    if pts.len() != n || pts.iter().any(|p| !p.is_finite()) {
        return Err(Error::EigenNonConvergence { seed });
    }
    Ok(pts)
}

/// Radius of the window attached to Ginibre samples: `1.5 √N`, enlarged when a
/// rare eigenvalue falls outside it.
pub fn ginibre_window_radius(n: usize, points: &[Point<f64>]) -> f64 {
    let nominal = 1.5 * (n as f64).sqrt();
    let extreme = points.iter().map(|p| p.norm()).fold(0.0, f64::max);
    if extreme < nominal {
        nominal
    } else {
        extreme * (1.0 + 1e-9) + f64::MIN_POSITIVE
    }
}

/// Finite-N Ginibre ensemble: joint density `∝ Π|z_i - z_j|² e^{-Σ|z_i|²}`.
pub fn sample_ginibre(n: usize, seed: u64) -> Result<Configuration<f64>> {
    let pts = ginibre_eigenvalues(n, seed)?;
    let window = Window::disk(ginibre_window_radius(n, &pts));
    Ok(Configuration::new(pts, window)?.with_provenance(Provenance::new("ginibre", Some(seed))))
}
