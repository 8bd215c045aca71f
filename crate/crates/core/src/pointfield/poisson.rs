use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::model::{Configuration, Point, Provenance, Window, WindowShape};
use crate::rng::seeded_rng;

/// Homogeneous Poisson field: `Poisson(intensity · area)` points, i.i.d. uniform.
pub fn sample_poisson(intensity: f64, window: Window<f64>, seed: u64) -> Result<Configuration<f64>> {
    window.validate()?;
    let mean = intensity * window.area();
    if !(intensity > 0.0) || !(mean < 1e7) {
        return Err(Error::InvalidArgument(format!(
            "Poisson intensity must be positive with intensity * area < 1e7 (got {mean:.3e})"
        )));
    }
    let mut rng = seeded_rng(seed);
    let count = Poisson::new(mean).map_err(|e| Error::InvalidArgument(e.to_string()))?.sample(&mut rng) as usize;
    let points = (0..count).map(|_| uniform_in(&window, &mut rng)).collect();
    Ok(Configuration::new(points, window)?.with_provenance(Provenance::new("poisson", Some(seed))))
}

/// Uniform point in a window.
pub(crate) fn uniform_in<R: Rng>(window: &Window<f64>, rng: &mut R) -> Point<f64> {
    let c = window.center;
    match window.shape {
        WindowShape::Disk { radius } => {
            let r = radius * rng.random::<f64>().sqrt();
            let t = std::f64::consts::TAU * rng.random::<f64>();
            c + Point::new(r * t.cos(), r * t.sin())
        }
        WindowShape::Rectangle { width, height } => {
            c + Point::new(width * (rng.random::<f64>() - 0.5), height * (rng.random::<f64>() - 0.5))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn count_statistics() {
        let m = 1000;
        let counts: Vec<f64> = (0..m)
            .map(|s| sample_poisson(1.0 / PI, Window::disk(10.0), s).unwrap().len() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / m as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        assert!((mean - 100.0).abs() < 3.0 * (100.0f64 / m as f64).sqrt());
        assert!((var / mean - 1.0).abs() < 0.05, "ratio {}", var / mean);
    }

    #[test]
    fn vanishing_intensity_is_empty() {
        let empty = (0..200)
            .filter(|&s| sample_poisson(1e-9, Window::disk(1.0), s).unwrap().is_empty())
            .count();
        assert_eq!(empty, 200);
        assert!(sample_poisson(0.0, Window::disk(1.0), 0).is_err());
        assert!(sample_poisson(1e6, Window::disk(100.0), 0).is_err());
    }

    #[test]
    fn rectangle_points_inside() {
        let w = Window::rectangle(4.0, 2.0, Point::new(10.0, -3.0));
        let c = sample_poisson(5.0, w, 9).unwrap();
        assert!(c.len() > 10);
        assert!(c.points().iter().all(|p| w.contains(p)));
    }
}
