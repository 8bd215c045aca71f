use crate::scalar::Real;

/// Smooth clipping `ξ_L`: identity on `[-L, L]`, constant `±(L+1)` beyond
/// `|t| >= L + 2`, odd, non-decreasing, with slope in `[0, 1]`.
///
/// On the band `u = (t - L)/2 ∈ [0, 1]` the blend is `L + 2u - 2u³ + u⁴`, the
/// quintic Hermite interpolant matching value, slope and curvature at both
/// ends (its leading coefficient happens to vanish), so `ξ_L` is C².
pub fn cutoff_xi<T: Real>(level: u32, t: T) -> T {
    let l = T::from_u32(level).expect("level representable");
    let a = t.abs();
    let v = if a <= l {
        a
    } else if a >= l + T::lit(2.0) {
        l + T::one()
    } else {
        let u = (a - l) / T::lit(2.0);
        let u3 = u * u * u;
        l + T::lit(2.0) * u - T::lit(2.0) * u3 + u3 * u
    };
    v.copysign(t)
}

/// `ξ_L'(t)`.
pub fn cutoff_xi_derivative<T: Real>(level: u32, t: T) -> T {
    let l = T::from_u32(level).expect("level representable");
    let a = t.abs();
    if a <= l {
        T::one()
    } else if a >= l + T::lit(2.0) {
        T::zero()
    } else {
        let u = (a - l) / T::lit(2.0);
        // d/dt = ½ d/du; (2 - 6u² + 4u³)/2 = (1-u)²(1+2u)
        (T::one() - u) * (T::one() - u) * (T::one() + T::lit(2.0) * u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn anchor_values() {
        for l in [1u32, 3, 10] {
            let lf = l as f64;
            assert_eq!(cutoff_xi(l, 0.0), 0.0);
            assert_eq!(cutoff_xi(l, lf + 3.0), lf + 1.0);
            assert_eq!(cutoff_xi(l, -lf - 3.0), -lf - 1.0);
            assert_eq!(cutoff_xi(l, lf + 2.0), lf + 1.0);
            assert_eq!(cutoff_xi(l, lf), lf);
            assert_eq!(cutoff_xi(l, 0.7 * lf), 0.7 * lf);
        }
    }

    #[test]
    fn derivative_bounded_on_dense_grid() {
        let l = 2;
        let mut prev = cutoff_xi(l, -6.0);
        for k in 0..=10_000 {
            let t = -6.0 + 12.0 * k as f64 / 10_000.0;
            let d = cutoff_xi_derivative(l, t);
            assert!((0.0..=2.0).contains(&d), "ξ'({t}) = {d}");
            let v = cutoff_xi(l, t);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn derivative_matches_finite_differences_and_is_c2() {
        let l = 3;
        let h = 1e-5;
        for k in 0..400 {
            let t = -6.0 + 12.0 * (k as f64 + 0.5) / 400.0;
            let fd = (cutoff_xi(l, t + h) - cutoff_xi(l, t - h)) / (2.0 * h);
            assert!((fd - cutoff_xi_derivative(l, t)).abs() < 1e-8);
        }
        // curvature vanishes on both sides of each knot
        for knot in [3.0, 5.0] {
            let d2 = |t: f64| (cutoff_xi_derivative(l, t + 1e-6) - cutoff_xi_derivative(l, t - 1e-6)) / 2e-6;
            assert!(d2(knot - 1e-4).abs() < 1e-3 && d2(knot + 1e-4).abs() < 1e-3);
        }
    }

    #[test]
    fn single_precision() {
        assert_eq!(cutoff_xi(1u32, 10.0f32), 2.0);
        assert_eq!(cutoff_xi_derivative(1u32, 0.5f32), 1.0);
    }

    proptest! {
        #[test]
        fn odd_symmetry(t in -50.0f64..50.0, l in 0u32..20) {
            prop_assert_eq!(cutoff_xi(l, -t), -cutoff_xi(l, t));
            prop_assert_eq!(cutoff_xi_derivative(l, -t), cutoff_xi_derivative(l, t));
        }

        #[test]
        fn monotone(a in -50.0f64..50.0, b in -50.0f64..50.0, l in 0u32..20) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(cutoff_xi(l, lo) <= cutoff_xi(l, hi));
        }
    }
}
