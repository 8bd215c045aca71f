use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Point, Truncation};
use crate::pointfield::PairPotential;
use crate::scalar::Real;

/// Closest admissible approach of two Coulomb particles.
pub const COLLISION_DISTANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriftKind {
    /// Log-Coulomb repulsion `Σ (x_i - x_j)/|x_i - x_j|²` (β = 2).
    CoulombConfined,
    /// No interaction.
    Free,
    /// Gradient dynamics `-(β/2) Σ ∇Ψ(x_i - x_j)` for a smooth pair potential.
    GibbsGradient { pair: PairPotential, beta: f64 },
}

/// Drift `b_i = -c x_i + interaction_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftSpec<T> {
    pub kind: DriftKind,
    pub truncation: Truncation<T>,
    /// Confinement strength `c >= 0`.
    pub confinement: T,
}

impl<T: Real> DriftSpec<T> {
    /// Coulomb repulsion with unit confinement: the finite-N Ginibre law is invariant.
    pub fn coulomb_confined() -> Self {
        Self { kind: DriftKind::CoulombConfined, truncation: Truncation::All, confinement: T::one() }
    }

    pub fn free() -> Self {
        Self { kind: DriftKind::Free, truncation: Truncation::All, confinement: T::zero() }
    }

    pub fn gibbs_gradient(pair: PairPotential, beta: f64) -> Self {
        Self { kind: DriftKind::GibbsGradient { pair, beta }, truncation: Truncation::All, confinement: T::zero() }
    }

    pub fn with_truncation(mut self, truncation: Truncation<T>) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn with_confinement(mut self, c: T) -> Self {
        self.confinement = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.truncation.validate()?;
        if !(self.confinement >= T::zero()) {
            return Err(Error::InvalidArgument("confinement strength must be >= 0".into()));
        }
        if let DriftKind::GibbsGradient { pair, beta } = self.kind {
            pair.validate()?;
            if !pair.is_differentiable() || !(beta >= 0.0) {
                return Err(Error::InvalidArgument("gradient dynamics need a differentiable potential and beta >= 0".into()));
            }
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> DriftSpec<U> {
        DriftSpec { kind: self.kind, truncation: self.truncation.cast(), confinement: U::lit(self.confinement.to_f64_lossy()) }
    }
}

/// Sum of `weight(r²) · (x_i - x_j)` over `j != i` with `r² < rc²`, in
/// ascending `j`, plus the smallest `r²` seen.
#[inline]
fn pair_sum<T: Real, W: Fn(T) -> T>(positions: &[Point<T>], i: usize, rc2: T, weight: W) -> (Point<T>, T) {
    let xi = positions[i];
    let (mut ax, mut ay, mut min_r2) = (T::zero(), T::zero(), T::infinity());
    let mut visit = |xs: &[Point<T>]| {
        for xj in xs {
            let dx = xi.re - xj.re;
            let dy = xi.im - xj.im;
            let r2 = dx * dx + dy * dy;
            let w = if r2 < rc2 { weight(r2) } else { T::zero() };
            ax = ax + w * dx;
            ay = ay + w * dy;
            min_r2 = min_r2.min(r2);
        }
    };
    visit(&positions[..i]);
    visit(&positions[i + 1..]);
    (Point::new(ax, ay), min_r2)
}

/// Interaction part of the drift on particle `i` and the squared distance to
/// its nearest neighbour.
pub(crate) fn interaction<T: Real>(positions: &[Point<T>], i: usize, spec: &DriftSpec<T>) -> (Point<T>, T) {
    let rc2 = spec.truncation.radius_sqr();
    match spec.kind {
        DriftKind::CoulombConfined => pair_sum(positions, i, rc2, |r2| T::one() / r2),
        DriftKind::Free => (Point::origin(), T::infinity()),
        DriftKind::GibbsGradient { pair, beta } => {
            let half_beta = T::lit(0.5 * beta);
            pair_sum(positions, i, rc2, |r2| -half_beta * pair.radial_gradient(r2).unwrap_or(T::zero()))
        }
    }
}

/// `Σ_{j≠i, |x_i - x_j| < r} (x_i - x_j)/|x_i - x_j|²`.
pub fn coulomb_drift<T: Real>(positions: &[Point<T>], i: usize, truncation: Truncation<T>) -> Result<Point<T>> {
    if i >= positions.len() {
        return Err(Error::IndexOutOfRange { index: i, len: positions.len() });
    }
    let (b, min_r2) = pair_sum(positions, i, truncation.radius_sqr(), |r2| T::one() / r2);
    check_collision(i, min_r2)?;
    Ok(b)
}

pub(crate) fn check_collision<T: Real>(i: usize, min_r2: T) -> Result<()> {
    let lim = T::lit(COLLISION_DISTANCE);
    if min_r2 < lim * lim {
        return Err(Error::Collision { particle: i, distance: min_r2.sqrt().to_f64_lossy() });
    }
    Ok(())
}

/// Full drift `-c x_i + interaction` on particle `i`.
pub fn drift<T: Real>(positions: &[Point<T>], i: usize, spec: &DriftSpec<T>) -> Result<Point<T>> {
    if i >= positions.len() {
        return Err(Error::IndexOutOfRange { index: i, len: positions.len() });
    }
    let (b, min_r2) = interaction(positions, i, spec);
    if spec.kind == DriftKind::CoulombConfined {
        check_collision(i, min_r2)?;
    }
    Ok(b - positions[i] * spec.confinement)
}
