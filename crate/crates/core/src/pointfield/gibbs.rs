//! Grand-canonical Metropolis-Hastings sampler for pair-interaction Gibbs fields.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Configuration, Point, Provenance, Window};
use crate::pointfield::poisson::uniform_in;
use crate::rng::seeded_rng;
use crate::scalar::Real;

/// Symmetric pair potential `Ψ(x) = Ψ(-x)`, a function of `|x|` only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairPotential {
    /// `Ψ ≡ 0`.
    Zero,
    /// `Ψ = +∞` for `|x| < radius`, zero otherwise.
    HardCore { radius: f64 },
    /// Soft core `Ψ(x) = amplitude · exp(-|x|² / range²)`.
    Gaussian { amplitude: f64, range: f64 },
}

impl PairPotential {
    /// The soft core `e^{-|x|²}`.
    pub const UNIT_GAUSSIAN: Self = Self::Gaussian { amplitude: 1.0, range: 1.0 };

    pub fn validate(&self) -> Result<()> {
        match *self {
            PairPotential::HardCore { radius } if !(radius > 0.0) => {
                Err(Error::InvalidArgument("hard-core radius must be positive".into()))
            }
            PairPotential::Gaussian { amplitude, range } if !(range > 0.0) || !amplitude.is_finite() => {
                Err(Error::InvalidArgument("Gaussian core needs finite amplitude and positive range".into()))
            }
            _ => Ok(()),
        }
    }

    /// `Ψ` as a function of the squared separation.
    #[inline]
    pub fn value<T: Real>(&self, r2: T) -> T {
        match *self {
            PairPotential::Zero => T::zero(),
            PairPotential::HardCore { radius } => {
                if r2 < T::lit(radius * radius) {
                    T::infinity()
                } else {
                    T::zero()
                }
            }
            PairPotential::Gaussian { amplitude, range } => {
                let u = r2 / T::lit(range * range);
                if u > T::lit(60.0) {
                    T::zero()
                } else {
                    T::lit(amplitude) * (-u).exp()
                }
            }
        }
    }

    /// `g` with `∇Ψ(x) = g(|x|²) · x`, or `None` where Ψ is not differentiable.
    #[inline]
    pub fn radial_gradient<T: Real>(&self, r2: T) -> Option<T> {
        match *self {
            PairPotential::Zero => Some(T::zero()),
            PairPotential::HardCore { .. } => None,
            PairPotential::Gaussian { amplitude, range } => {
                let l2 = T::lit(range * range);
                Some(-T::lit(2.0 * amplitude) / l2 * (-r2 / l2).exp())
            }
        }
    }

    pub fn is_differentiable(&self) -> bool {
        !matches!(self, PairPotential::HardCore { .. })
    }

    /// Separation beyond which `Ψ` is treated as zero; `None` if unbounded.
    pub fn range(&self) -> Option<f64> {
        match *self {
            PairPotential::Zero => Some(0.0),
            PairPotential::HardCore { radius } => Some(radius),
            PairPotential::Gaussian { range, .. } => Some(range * 60f64.sqrt()),
        }
    }
}

/// Gibbs specification: density `∝ z^n e^{-β Σ_{j<k} Ψ(x_j - x_k)}` on a window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsPotential {
    pub pair: PairPotential,
    pub beta: f64,
    /// Activity `z`.
    pub activity: f64,
}

impl GibbsPotential {
    pub fn validate(&self) -> Result<()> {
        self.pair.validate()?;
        if !(self.beta >= 0.0) || !(self.activity > 0.0) {
            return Err(Error::InvalidArgument("Gibbs field needs beta >= 0 and activity > 0".into()));
        }
        Ok(())
    }
}

/// Proposal mix and move size; the probabilities must sum to one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GibbsProposals {
    pub move_prob: f64,
    pub birth_prob: f64,
    pub death_prob: f64,
    /// Standard deviation of the Gaussian displacement of a move.
    pub move_step: f64,
}

impl Default for GibbsProposals {
    fn default() -> Self {
        Self { move_prob: 0.4, birth_prob: 0.3, death_prob: 0.3, move_step: 0.5 }
    }
}

#[derive(Clone, Debug)]
pub struct GibbsRun {
    pub config: Configuration<f64>,
    pub proposed: u64,
    pub accepted: u64,
    /// Acceptance rate over the final 10% of sweeps.
    pub tail_acceptance: f64,
}

const MIN_TAIL_ACCEPTANCE: f64 = 1e-3;
const MIN_SWEEP: usize = 16;

fn interaction(pair: &PairPotential, at: Point<f64>, points: &[Point<f64>], skip: Option<usize>) -> f64 {
    let mut e = 0.0;
    for (j, q) in points.iter().enumerate() {
        if Some(j) != skip {
            e += pair.value((at - *q).norm_sqr());
            if e == f64::INFINITY {
                break;
            }
        }
    }
    e
}

/// `min(1, ratio · e^{-β ΔE})` with `β · ∞` handled explicitly.
fn acceptance(ratio: f64, beta: f64, delta_e: f64) -> f64 {
    let w = if beta == 0.0 {
        1.0
    } else if delta_e == f64::INFINITY {
        0.0
    } else if delta_e == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        (-beta * delta_e).exp()
    };
    (ratio * w).min(1.0)
}

/// One configuration after `n_sweeps` sweeps, starting from the empty state.
///
/// A sweep is `max(16, ⌈z·|W|⌉)` proposals. The length is fixed in advance:
/// a state-dependent sweep length would bias the law at the final step.
pub fn sample_gibbs_with(
    potential: &GibbsPotential,
    window: Window<f64>,
    n_sweeps: usize,
    seed: u64,
    proposals: &GibbsProposals,
) -> Result<GibbsRun> {
    potential.validate()?;
    window.validate()?;
    let total = proposals.move_prob + proposals.birth_prob + proposals.death_prob;
    if (total - 1.0).abs() > 1e-9 || proposals.birth_prob <= 0.0 || proposals.death_prob <= 0.0 {
        return Err(Error::InvalidArgument("proposal probabilities must be positive and sum to 1".into()));
    }
    if n_sweeps == 0 {
        return Err(Error::InvalidArgument("Gibbs sampler needs at least one sweep".into()));
    }
    let mut rng = seeded_rng(seed);
    let za = potential.activity * window.area();
    let (pair, beta) = (potential.pair, potential.beta);
    let mut pts: Vec<Point<f64>> = Vec::new();
    let tail_start = n_sweeps - (n_sweeps / 10).max(1);
    let (mut proposed, mut accepted, mut tail_prop, mut tail_acc) = (0u64, 0u64, 0u64, 0u64);

    let len = (za.ceil() as usize).max(MIN_SWEEP);
    for sweep in 0..n_sweeps {
        for _ in 0..len {
            let u: f64 = rng.random();
            let ok = if u < proposals.move_prob {
                if pts.is_empty() {
                    false
                } else {
                    let i = rng.random_range(0..pts.len());
                    let dx: f64 = StandardNormal.sample(&mut rng);
                    let dy: f64 = StandardNormal.sample(&mut rng);
                    let cand = pts[i] + Point::new(dx, dy) * proposals.move_step;
                    if !window.contains(&cand) {
                        false
                    } else {
                        let de = interaction(&pair, cand, &pts, Some(i)) - interaction(&pair, pts[i], &pts, Some(i));
                        let de = if de.is_nan() { f64::INFINITY } else { de };
                        if rng.random::<f64>() < acceptance(1.0, beta, de) {
                            pts[i] = cand;
                            true
                        } else {
                            false
                        }
                    }
                }
            } else if u < proposals.move_prob + proposals.birth_prob {
                let cand = uniform_in(&window, &mut rng);
                let de = interaction(&pair, cand, &pts, None);
                let ratio = za / (pts.len() + 1) as f64 * proposals.death_prob / proposals.birth_prob;
                if rng.random::<f64>() < acceptance(ratio, beta, de) {
                    pts.push(cand);
                    true
                } else {
                    false
                }
            } else if pts.is_empty() {
                false
            } else {
                let i = rng.random_range(0..pts.len());
                let de = -interaction(&pair, pts[i], &pts, Some(i));
                let ratio = pts.len() as f64 / za * proposals.birth_prob / proposals.death_prob;
                if rng.random::<f64>() < acceptance(ratio, beta, de) {
                    pts.swap_remove(i);
                    true
                } else {
                    false
                }
            };
            proposed += 1;
            accepted += ok as u64;
            if sweep >= tail_start {
                tail_prop += 1;
                tail_acc += ok as u64;
            }
        }
    }
    let tail_acceptance = tail_acc as f64 / tail_prop.max(1) as f64;
    if tail_acceptance < MIN_TAIL_ACCEPTANCE {
        return Err(Error::MixingFailure { rate: tail_acceptance });
    }
    let config = Configuration::new(pts, window)?.with_provenance(Provenance::new("gibbs", Some(seed)));
    Ok(GibbsRun { config, proposed, accepted, tail_acceptance })
}

/// [`sample_gibbs_with`] using the default 40/30/30 move/birth/death mix.
pub fn sample_gibbs(potential: &GibbsPotential, window: Window<f64>, n_sweeps: usize, seed: u64) -> Result<Configuration<f64>> {
    sample_gibbs_with(potential, window, n_sweeps, seed, &GibbsProposals::default()).map(|r| r.config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_interaction_matches_poisson_counts() {
        let pot = GibbsPotential { pair: PairPotential::Zero, beta: 1.0, activity: 0.5 };
        let m = 400;
        let counts: Vec<f64> =
            (0..m).map(|s| sample_gibbs(&pot, Window::disk(4.0), 60, s).unwrap().len() as f64).collect();
        let mean = counts.iter().sum::<f64>() / m as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        let expect = 0.5 * std::f64::consts::PI * 16.0;
        assert!((mean - expect).abs() < 3.0 * (expect / m as f64).sqrt(), "mean {mean} vs {expect}");
        assert!((var / mean - 1.0).abs() < 3.0 * (2.0 / m as f64).sqrt(), "var/mean {}", var / mean);
    }

    #[test]
    fn hard_core_is_respected() {
        let sigma = 0.8;
        let pot = GibbsPotential { pair: PairPotential::HardCore { radius: sigma }, beta: 1.0, activity: 2.0 };
        for seed in 0..20 {
            let c = sample_gibbs(&pot, Window::disk(5.0), 100, seed).unwrap();
            let p = c.points();
            assert!(p.len() > 10);
            for i in 0..p.len() {
                for j in (i + 1)..p.len() {
                    assert!((p[i] - p[j]).norm() >= sigma);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let pot = GibbsPotential { pair: PairPotential::Zero, beta: 1.0, activity: 0.0 };
        assert!(sample_gibbs(&pot, Window::disk(1.0), 10, 0).is_err());
        let pot = GibbsPotential { pair: PairPotential::Zero, beta: 1.0, activity: 1.0 };
        let bad = GibbsProposals { move_prob: 0.5, ..Default::default() };
        assert!(sample_gibbs_with(&pot, Window::disk(1.0), 10, 0, &bad).is_err());
    }

    #[test]
    fn frozen_chain_reports_mixing_failure() {
        // births are refused at this activity and an empty chain cannot move
        let pot = GibbsPotential { pair: PairPotential::HardCore { radius: 1.0 }, beta: 1.0, activity: 1e-12 };
        let r = sample_gibbs_with(&pot, Window::disk(0.4), 50, 1, &GibbsProposals::default());
        assert!(matches!(r, Err(Error::MixingFailure { .. })), "{r:?}");
    }

    #[test]
    fn potential_values() {
        let g = PairPotential::UNIT_GAUSSIAN;
        assert!((g.value(1.0f64) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(PairPotential::HardCore { radius: 1.0 }.value(0.5f64), f64::INFINITY);
        assert_eq!(PairPotential::HardCore { radius: 1.0 }.value(1.5f64), 0.0);
        // finite-difference check of the radial gradient
        let h = 1e-6;
        let r2 = 0.7f64;
        let dpsi_dr2 = (g.value(r2 + h) - g.value(r2 - h)) / (2.0 * h);
        assert!((g.radial_gradient(r2).unwrap() - 2.0 * dpsi_dr2).abs() < 1e-8);
    }
}
