//! Points, observation windows and finite configurations of the plane.
//!
//! The plane is identified with `C`: a [`Point`] is `re + i im`. A
//! [`Configuration`] is a finite multiset of points together with the window it
//! was observed in; equality ignores point order.

use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub re: T,
    pub im: T,
}

impl<T: Real> Point<T> {
    #[inline]
    pub const fn new(re: T, im: T) -> Self {
        Self { re, im }
    }

    #[inline]
    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero())
    }

    /// Unit vector along coordinate `p` (0 = real axis, 1 = imaginary axis).
    pub fn unit(p: usize) -> Self {
        match p {
            0 => Self::new(T::one(), T::zero()),
            _ => Self::new(T::zero(), T::one()),
        }
    }

    #[inline]
    pub fn coord(&self, p: usize) -> T {
        if p == 0 {
            self.re
        } else {
            self.im
        }
    }

    #[inline]
    pub fn norm_sqr(&self) -> T {
        self.re * self.re + self.im * self.im
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.re.hypot(self.im)
    }

    /// Polar angle in `[0, 2π)`.
    pub fn angle(&self) -> T {
        let a = self.im.atan2(self.re);
        if a < T::zero() {
            a + T::TAU()
        } else {
            a
        }
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> T {
        self.re * other.re + self.im * other.im
    }

    pub fn rotate(&self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.re - s * self.im, s * self.re + c * self.im)
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    #[inline]
    pub fn to_complex(self) -> Complex<T> {
        Complex::new(self.re, self.im)
    }

    #[inline]
    pub fn from_complex(z: Complex<T>) -> Self {
        Self::new(z.re, z.im)
    }

    pub fn cast<U: Real>(self) -> Point<U> {
        Point::new(U::lit(self.re.to_f64_lossy()), U::lit(self.im.to_f64_lossy()))
    }

    /// Strict membership in the open disk `{|x| < radius}` about the origin.
    #[inline]
    pub fn in_disk(&self, radius: T) -> bool {
        self.norm_sqr() < radius * radius
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.re
            .partial_cmp(&other.re)
            .unwrap_or(Ordering::Equal)
            .then(self.im.partial_cmp(&other.im).unwrap_or(Ordering::Equal))
    }
}

impl<T: Real> Add for Point<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl<T: Real> Sub for Point<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl<T: Real> Neg for Point<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

impl<T: Real> Mul<T> for Point<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: T) -> Self {
        Self::new(self.re * rhs, self.im * rhs)
    }
}

impl<T: Real> Div<T> for Point<T> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: T) -> Self {
        Self::new(self.re / rhs, self.im / rhs)
    }
}

impl<T: Real> AddAssign for Point<T> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.re = self.re + rhs.re;
        self.im = self.im + rhs.im;
    }
}

impl<T: Real> SubAssign for Point<T> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        self.re = self.re - rhs.re;
        self.im = self.im - rhs.im;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowShape<T> {
    Disk { radius: T },
    Rectangle { width: T, height: T },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window<T> {
    #[serde(flatten)]
    pub shape: WindowShape<T>,
    pub center: Point<T>,
}

impl<T: Real> Window<T> {
    /// Disk `S_R = {|x| < R}` centred at the origin.
    pub fn disk(radius: T) -> Self {
        Self { shape: WindowShape::Disk { radius }, center: Point::origin() }
    }

    pub fn rectangle(width: T, height: T, center: Point<T>) -> Self {
        Self { shape: WindowShape::Rectangle { width, height }, center }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.shape {
            WindowShape::Disk { radius } => radius > T::zero() && radius.is_finite(),
            WindowShape::Rectangle { width, height } => {
                width > T::zero() && height > T::zero() && width.is_finite() && height.is_finite()
            }
        };
        if ok && self.center.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidArgument("window must have positive finite extent".into()))
        }
    }

    pub fn area(&self) -> T {
        match self.shape {
            WindowShape::Disk { radius } => T::PI() * radius * radius,
            WindowShape::Rectangle { width, height } => width * height,
        }
    }

    /// Closed containment, used for validation.
    pub fn contains(&self, p: &Point<T>) -> bool {
        let d = *p - self.center;
        match self.shape {
            WindowShape::Disk { radius } => d.norm_sqr() <= radius * radius,
            WindowShape::Rectangle { width, height } => {
                let two = T::lit(2.0);
                d.re.abs() <= width / two && d.im.abs() <= height / two
            }
        }
    }

    pub fn translate(&self, by: Point<T>) -> Self {
        Self { shape: self.shape, center: self.center + by }
    }

    /// Distance from an interior point to the window boundary.
    pub fn boundary_distance(&self, p: &Point<T>) -> T {
        let d = *p - self.center;
        match self.shape {
            WindowShape::Disk { radius } => radius - d.norm(),
            WindowShape::Rectangle { width, height } => {
                let two = T::lit(2.0);
                (width / two - d.re.abs()).min(height / two - d.im.abs())
            }
        }
    }

    pub fn cast<U: Real>(&self) -> Window<U> {
        let shape = match self.shape {
            WindowShape::Disk { radius } => WindowShape::Disk { radius: U::lit(radius.to_f64_lossy()) },
            WindowShape::Rectangle { width, height } => WindowShape::Rectangle {
                width: U::lit(width.to_f64_lossy()),
                height: U::lit(height.to_f64_lossy()),
            },
        };
        Window { shape, center: self.center.cast() }
    }
}

/// Where a configuration came from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub field: String,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(field: impl Into<String>, seed: Option<u64>) -> Self {
        Self { field: field.into(), seed }
    }
}

/// Finite multiset of points observed in a window.
#[derive(Clone, Debug)]
pub struct Configuration<T> {
    points: Vec<Point<T>>,
    window: Window<T>,
    pub provenance: Provenance,
}

impl<T: Real> Configuration<T> {
    /// Rejects non-finite coordinates and points outside `window`.
    pub fn new(points: Vec<Point<T>>, window: Window<T>) -> Result<Self> {
        window.validate()?;
        for p in &points {
            if !p.is_finite() {
                return Err(Error::NonFinite { re: p.re.to_f64_lossy(), im: p.im.to_f64_lossy() });
            }
            if !window.contains(p) {
                return Err(Error::OutsideWindow { re: p.re.to_f64_lossy(), im: p.im.to_f64_lossy() });
            }
        }
        Ok(Self { points, window, provenance: Provenance::default() })
    }

    pub fn empty(window: Window<T>) -> Self {
        Self { points: Vec::new(), window, provenance: Provenance::default() }
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    #[inline]
    pub fn points(&self) -> &[Point<T>] {
        &self.points
    }

    #[inline]
    pub fn window(&self) -> &Window<T> {
        &self.window
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Point<T>> {
        self.points
    }

    pub fn cast<U: Real>(&self) -> Configuration<U> {
        Configuration {
            points: self.points.iter().map(|p| p.cast()).collect(),
            window: self.window.cast(),
            provenance: self.provenance.clone(),
        }
    }

    fn sorted_points(&self) -> Vec<Point<T>> {
        let mut v = self.points.clone();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }

    /// Multiset comparison with a per-coordinate tolerance.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        if self.len() != other.len() {
            return false;
        }
        self.sorted_points()
            .iter()
            .zip(other.sorted_points().iter())
            .all(|(a, b)| (a.re - b.re).abs() <= tol && (a.im - b.im).abs() <= tol)
    }
}

impl<T: Real> PartialEq for Configuration<T> {
    fn eq(&self, other: &Self) -> bool {
        self.window == other.window && self.sorted_points() == other.sorted_points()
    }
}

/// Interaction or summation cutoff: either every point, or only those within `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Truncation<T> {
    All,
    Radius(T),
}

impl<T: Real> Truncation<T> {
    /// Squared cutoff, `+∞` for [`Truncation::All`].
    pub fn radius_sqr(&self) -> T {
        match *self {
            Truncation::All => T::infinity(),
            Truncation::Radius(r) => r * r,
        }
    }

    pub fn cast<U: Real>(&self) -> Truncation<U> {
        match *self {
            Truncation::All => Truncation::All,
            Truncation::Radius(r) => Truncation::Radius(U::lit(r.to_f64_lossy())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Truncation::Radius(r) if !(r > T::zero()) => {
                Err(Error::InvalidArgument(format!("truncation radius must be positive, got {r}")))
            }
            _ => Ok(()),
        }
    }
}

impl<T: Serialize> Serialize for Truncation<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Truncation::All => s.serialize_str("all"),
            Truncation::Radius(r) => r.serialize(s),
        }
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Truncation<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr<T> {
            Radius(T),
            Word(String),
        }
        match Repr::<T>::deserialize(d)? {
            Repr::Radius(r) => Ok(Truncation::Radius(r)),
            Repr::Word(w) if w == "all" => Ok(Truncation::All),
            Repr::Word(w) => Err(serde::de::Error::custom(format!("expected a radius or \"all\", got \"{w}\""))),
        }
    }
}

/// Orders points by increasing modulus; ties go to the smaller angle in
/// `[0, 2π)` and then to the lexicographically smaller `(re, im)`.
pub fn label_radial<T: Real>(config: &Configuration<T>) -> Vec<Point<T>> {
    let mut keyed: Vec<(T, T, Point<T>)> =
        config.points.iter().map(|p| (p.norm_sqr(), p.angle(), *p)).collect();
    keyed.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal))
            .then(a.2.total_cmp(&b.2))
    });
    keyed.into_iter().map(|(_, _, p)| p).collect()
}

/// Translation `s_i -> s_i - x`; the window moves with the points.
pub fn shift<T: Real>(config: &Configuration<T>, x: Point<T>) -> Configuration<T> {
    Configuration {
        points: config.points.iter().map(|&p| p - x).collect(),
        window: config.window.translate(-x),
        provenance: config.provenance.clone(),
    }
}

/// Points strictly inside `S_R`; the window becomes the disk of radius `R`.
pub fn restrict<T: Real>(config: &Configuration<T>, radius: T) -> Configuration<T> {
    Configuration {
        points: config.points.iter().copied().filter(|p| p.in_disk(radius)).collect(),
        window: Window::disk(radius),
        provenance: config.provenance.clone(),
    }
}

/// Points with `|s_i| >= R`; the window is kept.
pub fn restrict_complement<T: Real>(config: &Configuration<T>, radius: T) -> Configuration<T> {
    Configuration {
        points: config.points.iter().copied().filter(|p| !p.in_disk(radius)).collect(),
        window: config.window,
        provenance: config.provenance.clone(),
    }
}
