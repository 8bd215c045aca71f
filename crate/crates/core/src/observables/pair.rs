use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Configuration;
use crate::scalar::Real;
use crate::stats;

/// Radial pair correlation `g(r)` per distance bin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCorrelation {
    pub edges: Vec<f64>,
    pub g: Vec<f64>,
    /// Jackknife over configurations.
    pub stderr: Vec<f64>,
    /// Estimated intensity.
    pub intensity: f64,
}

struct Tally {
    /// Pair counts per bin over reference points.
    counts: Vec<f64>,
    references: f64,
    points: f64,
    area: f64,
}

fn tally<T: Real>(config: &Configuration<T>, edges: &[f64]) -> Tally {
    let r_max = *edges.last().expect("edges validated");
    let e2: Vec<f64> = edges.iter().map(|e| e * e).collect();
    let pts = config.points();
    let mut counts = vec![0.0; edges.len() - 1];
    let mut references = 0.0;
    for (i, a) in pts.iter().enumerate() {
        // minus sampling: only points whose r_max-disk fits in the window
        if config.window().boundary_distance(a).to_f64_lossy() < r_max {
            continue;
        }
        references += 1.0;
        for (j, b) in pts.iter().enumerate() {
            if i == j {
                continue;
            }
            let d2 = (*a - *b).norm_sqr().to_f64_lossy();
            let k = e2.partition_point(|&e| e <= d2);
            if k >= 1 && k < e2.len() {
                counts[k - 1] += 1.0;
            }
        }
    }
    Tally { counts, references, points: pts.len() as f64, area: config.window().area().to_f64_lossy() }
}

fn estimate(tallies: &[&Tally], edges: &[f64]) -> (Vec<f64>, f64) {
    let points: f64 = tallies.iter().map(|t| t.points).sum();
    let area: f64 = tallies.iter().map(|t| t.area).sum();
    let refs: f64 = tallies.iter().map(|t| t.references).sum();
    let lambda = points / area;
    let g = (0..edges.len() - 1)
        .map(|k| {
            let c: f64 = tallies.iter().map(|t| t.counts[k]).sum();
            let annulus = std::f64::consts::PI * (edges[k + 1] * edges[k + 1] - edges[k] * edges[k]);
            c / (refs * lambda * annulus)
        })
        .collect();
    (g, lambda)
}

/// Minus-sampling estimator pooled over an ensemble.
pub fn pair_correlation<T: Real>(ensemble: &[Configuration<T>], edges: &[f64]) -> Result<PairCorrelation> {
    if edges.len() < 2 || edges[0] < 0.0 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("bin edges must be non-negative and increasing".into()));
    }
    let tallies: Vec<Tally> = ensemble.iter().map(|c| tally(c, edges)).collect();
    if tallies.iter().map(|t| t.references).sum::<f64>() == 0.0 {
        return Err(Error::TooFewSamples { used: 0, total: ensemble.len() });
    }
    let all: Vec<&Tally> = tallies.iter().collect();
    let (g, intensity) = estimate(&all, edges);
    let m = tallies.len();
    let mut stderr = vec![0.0; g.len()];
    if m > 1 {
        let loo: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let rest: Vec<&Tally> = all.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, t)| *t).collect();
                estimate(&rest, edges).0
            })
            .collect();
        for k in 0..g.len() {
            let col: Vec<f64> = loo.iter().map(|r| r[k]).collect();
            let mf = m as f64;
            stderr[k] = ((mf - 1.0) * stats::variance(&col) * (mf - 1.0) / mf).sqrt();
        }
    }
    Ok(PairCorrelation { edges: edges.to_vec(), g, stderr, intensity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Window;
    use crate::pointfield::sample_poisson;

    #[test]
    fn poisson_is_flat() {
        let ens: Vec<_> = (0..200).map(|s| sample_poisson(1.0, Window::disk(8.0), s).unwrap()).collect();
        let edges: Vec<f64> = (0..=6).map(|k| 0.25 + 0.25 * k as f64).collect();
        let pc = pair_correlation(&ens, &edges).unwrap();
        assert!((pc.intensity - 1.0).abs() < 0.02);
        for (g, se) in pc.g.iter().zip(&pc.stderr) {
            assert!((g - 1.0).abs() < 3.5 * se, "g = {g} ± {se}");
        }
    }

    #[test]
    fn bad_edges() {
        let ens = vec![sample_poisson(1.0, Window::disk(2.0), 0).unwrap()];
        assert!(pair_correlation(&ens, &[1.0]).is_err());
        assert!(pair_correlation(&ens, &[1.0, 0.5]).is_err());
        assert!(pair_correlation(&ens, &[0.0, 5.0]).is_err());
    }
}
