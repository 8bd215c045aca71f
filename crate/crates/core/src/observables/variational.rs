use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trial::{carre_du_champ, shift_derivative_fd, TrialFunction};
use crate::error::{Error, Result};
use crate::model::Configuration;
use crate::scalar::Real;
use crate::stats;

/// Monte-Carlo estimate of `E[½ Σ_q |D_q f - δ_pq|² + 𝔻[f, f]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationalBound {
    pub estimate: f64,
    pub stderr: f64,
    pub shift_term: f64,
    pub shift_term_stderr: f64,
    pub carre_term: f64,
    pub carre_term_stderr: f64,
    pub used: usize,
    /// Samples where the trial is undefined or its gradient does not exist.
    pub skipped: usize,
    /// Samples where a point crossed `|s| = R` inside the finite difference.
    pub flagged: usize,
    pub total: usize,
    pub skipped_fraction: f64,
    pub flagged_fraction: f64,
}

enum Outcome {
    Used { shift: f64, carre: f64 },
    Skipped,
    Flagged,
}

fn score<T: Real>(trial: &TrialFunction<T>, p: usize, config: &Configuration<T>, eps: T) -> Outcome {
    if trial.is_vacuous(config) {
        return Outcome::Skipped;
    }
    let Ok(carre) = carre_du_champ(trial, config) else {
        return Outcome::Skipped;
    };
    let mut shift = 0.0;
    for q in 0..2 {
        let d = shift_derivative_fd(trial, config, q, eps);
        if d.crossing {
            return Outcome::Flagged;
        }
        let delta = if q == p { 1.0 } else { 0.0 };
        let r = d.value.to_f64_lossy() - delta;
        shift += r * r;
    }
    Outcome::Used { shift: 0.5 * shift, carre: carre.to_f64_lossy() }
}

/// Scores `trial` against the target direction `p` on every sample.
///
/// Undefined or boundary samples are skipped, boundary-crossing samples are
/// flagged; both are excluded from the estimate and counted. More than half
/// excluded is an error.
pub fn variational_bound<T: Real>(
    trial: &TrialFunction<T>,
    p: usize,
    samples: &[Configuration<T>],
    eps: T,
) -> Result<VariationalBound> {
    trial.validate()?;
    if p > 1 || !(eps > T::zero()) {
        return Err(Error::InvalidArgument("need coordinate 0 or 1 and eps > 0".into()));
    }
    let outcomes: Vec<Outcome> = samples.par_iter().map(|c| score(trial, p, c, eps)).collect();
    let total = outcomes.len();
    let (mut shift, mut carre, mut both) = (Vec::new(), Vec::new(), Vec::new());
    let (mut skipped, mut flagged) = (0, 0);
    for o in outcomes {
        match o {
            Outcome::Used { shift: s, carre: c } => {
                shift.push(s);
                carre.push(c);
                both.push(s + c);
            }
            Outcome::Skipped => skipped += 1,
            Outcome::Flagged => flagged += 1,
        }
    }
    let used = both.len();
    if used == 0 || 2 * used < total {
        return Err(Error::TooFewSamples { used, total });
    }
    let se = |xs: &[f64]| if xs.len() > 1 { stats::std_error(xs) } else { 0.0 };
    Ok(VariationalBound {
        estimate: stats::mean(&both),
        stderr: se(&both),
        shift_term: stats::mean(&shift),
        shift_term_stderr: se(&shift),
        carre_term: stats::mean(&carre),
        carre_term_stderr: se(&carre),
        used,
        skipped,
        flagged,
        total,
        skipped_fraction: skipped as f64 / total as f64,
        flagged_fraction: flagged as f64 / total as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Point, Window};
    use crate::pointfield::{sample_ginibre, sample_poisson};

    #[test]
    fn zero_trial_scores_exactly_half() {
        let ens: Vec<_> = (0..37).map(|s| sample_ginibre(30, s).unwrap()).collect();
        for p in 0..2 {
            let b = variational_bound(&TrialFunction::zero(), p, &ens, 1e-4).unwrap();
            assert_eq!(b.estimate, 0.5);
            assert_eq!(b.shift_term, 0.5);
            assert_eq!(b.carre_term, 0.0);
            assert_eq!(b.stderr, 0.0);
            assert_eq!(b.used, 37);
        }
    }

    #[test]
    fn single_particle_closed_form() {
        // one point inside S_R: shift derivative exactly +1, carré ½
        let ens: Vec<_> = (0..10)
            .map(|k| Configuration::new(vec![Point::new(0.1 * k as f64, -0.3)], Window::disk(10.0)).unwrap())
            .collect();
        let b = variational_bound(&TrialFunction::mean_shift(5.0, 0, 1000), 0, &ens, 1e-3).unwrap();
        assert!(b.shift_term < 1e-18, "{}", b.shift_term);
        assert!((b.carre_term - 0.5).abs() < 1e-15);
        assert!((b.estimate - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mostly_empty_samples_are_rejected() {
        let ens: Vec<_> = (0..10)
            .map(|s| sample_poisson(0.01, Window::disk(3.0), s).unwrap())
            .collect();
        let err = variational_bound(&TrialFunction::mean_shift(1.0, 0, 5), 0, &ens, 1e-4).unwrap_err();
        assert!(matches!(err, Error::TooFewSamples { .. }));
        assert!(variational_bound::<f64>(&TrialFunction::zero(), 0, &[], 1e-4).is_err());
    }

    #[test]
    fn carre_term_decreases_with_radius() {
        let ens: Vec<_> = (0..60).map(|s| sample_ginibre(100, s).unwrap()).collect();
        let terms: Vec<f64> = [2.0, 3.5, 5.0]
            .iter()
            .map(|&r| variational_bound(&TrialFunction::mean_shift(r, 0, 10), 0, &ens, 1e-6).unwrap().carre_term)
            .collect();
        assert!(terms[0] > terms[1] && terms[1] > terms[2], "{terms:?}");
    }

    #[test]
    fn thread_count_invariance() {
        let ens: Vec<_> = (0..40).map(|s| sample_ginibre(64, s).unwrap()).collect();
        let trial = TrialFunction::mean_shift(3.0, 1, 10);
        let run = |t: usize| {
            rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap().install(|| {
                variational_bound(&trial, 1, &ens, 1e-6).unwrap()
            })
        };
        assert_eq!(run(1), run(4));
    }
}
