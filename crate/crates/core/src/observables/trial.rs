use serde::{Deserialize, Serialize};

use super::cutoff::{cutoff_xi, cutoff_xi_derivative};
use super::rigidity::number_mean_functions;
use crate::error::{Error, Result};
use crate::model::{shift, Configuration, Point};
use crate::scalar::Real;

/// Points closer than this to `|s| = R` make the mean-shift gradient undefined.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

/// Smooth bump `A·exp(1 - 1/(1 - |x - c|²/ρ²))` supported on the open disk
/// of radius `ρ` around `c`; equals `A` at the center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump<T> {
    pub center: Point<T>,
    pub radius: T,
    pub amplitude: T,
}

impl<T: Real> Bump<T> {
    pub fn value(&self, x: Point<T>) -> T {
        let q = (x - self.center).norm_sqr() / (self.radius * self.radius);
        if q >= T::one() {
            return T::zero();
        }
        self.amplitude * (T::one() - T::one() / (T::one() - q)).exp()
    }

    pub fn gradient(&self, x: Point<T>) -> Point<T> {
        let d = x - self.center;
        let r2 = self.radius * self.radius;
        let w = T::one() - d.norm_sqr() / r2;
        if w <= T::zero() {
            return Point::origin();
        }
        let v = self.amplitude * (T::one() - T::one() / w).exp();
        d * (-T::lit(2.0) * v / (r2 * w * w))
    }
}

/// Functions of a configuration used as trial functions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrialFunction<T> {
    Constant { value: T },
    /// `Σ_i φ(s_i)`.
    LinearStatistic { bump: Bump<T> },
    /// `ξ_L(±M_{R,p}/N_R)`, zero when `N_R = 0`. With `negated` the sign is
    /// `-`, which makes the shift derivative `+1` in coordinate `p`.
    MeanShift { radius: T, coordinate: usize, level: u32, negated: bool },
}

impl<T: Real> TrialFunction<T> {
    pub fn zero() -> Self {
        Self::Constant { value: T::zero() }
    }

    /// Mean-shift trial with shift derivative `+δ_pq` on the linear range.
    pub fn mean_shift(radius: T, coordinate: usize, level: u32) -> Self {
        Self::MeanShift { radius, coordinate, level, negated: true }
    }

    /// Cutoff of the raw windowed mean `M_{R,p}/N_R`.
    pub fn raw_mean_shift(radius: T, coordinate: usize, level: u32) -> Self {
        Self::MeanShift { radius, coordinate, level, negated: false }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Constant { value } if !value.is_finite() => {
                Err(Error::InvalidArgument("constant trial must be finite".into()))
            }
            Self::LinearStatistic { bump } if !(bump.radius > T::zero()) || !bump.amplitude.is_finite() => {
                Err(Error::InvalidArgument("bump needs a positive radius and finite amplitude".into()))
            }
            Self::MeanShift { radius, coordinate, .. } if !(radius > T::zero()) || coordinate > 1 => {
                Err(Error::InvalidArgument("mean shift needs R > 0 and coordinate 0 or 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Whether the function is undefined (mean shift with `N_R = 0`).
    pub fn is_vacuous(&self, config: &Configuration<T>) -> bool {
        matches!(*self, Self::MeanShift { radius, .. } if number_mean_functions(config, radius).0 == 0)
    }

    fn mean_shift_argument(radius: T, coordinate: usize, negated: bool, config: &Configuration<T>) -> Option<(usize, T)> {
        let (n, m) = number_mean_functions(config, radius);
        if n == 0 {
            return None;
        }
        let a = m.coord(coordinate) / T::from_usize_lossy(n);
        Some((n, if negated { -a } else { a }))
    }

    pub fn evaluate(&self, config: &Configuration<T>) -> T {
        match *self {
            Self::Constant { value } => value,
            Self::LinearStatistic { bump } => config.points().iter().fold(T::zero(), |a, &p| a + bump.value(p)),
            Self::MeanShift { radius, coordinate, level, negated } => {
                Self::mean_shift_argument(radius, coordinate, negated, config)
                    .map_or(T::zero(), |(_, a)| cutoff_xi(level, a))
            }
        }
    }

    /// Gradient with respect to each point, in configuration order.
    pub fn gradient(&self, config: &Configuration<T>) -> Result<Vec<Point<T>>> {
        let pts = config.points();
        match *self {
            Self::Constant { .. } => Ok(vec![Point::origin(); pts.len()]),
            Self::LinearStatistic { bump } => Ok(pts.iter().map(|&p| bump.gradient(p)).collect()),
            Self::MeanShift { radius, coordinate, level, negated } => {
                let tol = T::lit(BOUNDARY_TOLERANCE);
                if let Some(p) = pts.iter().find(|p| (p.norm() - radius).abs() < tol) {
                    return Err(Error::OnBoundary { offset: (p.norm() - radius).to_f64_lossy() });
                }
                let Some((n, a)) = Self::mean_shift_argument(radius, coordinate, negated, config) else {
                    return Ok(vec![Point::origin(); pts.len()]);
                };
                let sign = if negated { -T::one() } else { T::one() };
                let g = Point::unit(coordinate) * (sign * cutoff_xi_derivative(level, a) / T::from_usize_lossy(n));
                Ok(pts.iter().map(|p| if p.in_disk(radius) { g } else { Point::origin() }).collect())
            }
        }
    }
}

/// `𝔻[f, f] = ½ Σ_i |∇_{s_i} f|²`.
pub fn carre_du_champ<T: Real>(f: &TrialFunction<T>, config: &Configuration<T>) -> Result<T> {
    Ok(f.gradient(config)?.iter().fold(T::zero(), |a, g| a + g.norm_sqr()) / T::lit(2.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftDerivative<T> {
    pub value: T,
    /// Some point entered or left `S_R` between the two shifted evaluations.
    pub crossing: bool,
}

/// Central difference `(f(θ_{εe_p} s) - f(θ_{-εe_p} s)) / 2ε`.
pub fn shift_derivative_fd<T: Real>(
    f: &TrialFunction<T>,
    config: &Configuration<T>,
    coordinate: usize,
    eps: T,
) -> ShiftDerivative<T> {
    let step = Point::unit(coordinate) * eps;
    let plus = shift(config, step);
    let minus = shift(config, -step);
    let value = (f.evaluate(&plus) - f.evaluate(&minus)) / (T::lit(2.0) * eps);
    let crossing = match *f {
        TrialFunction::MeanShift { radius, .. } => plus
            .points()
            .iter()
            .zip(minus.points())
            .any(|(a, b)| a.in_disk(radius) != b.in_disk(radius)),
        _ => false,
    };
    ShiftDerivative { value, crossing }
}
