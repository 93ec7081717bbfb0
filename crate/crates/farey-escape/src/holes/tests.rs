use super::*;
use crate::quadrature::adaptive_simpson;
use approx::assert_relative_eq;
use proptest::prelude::*;

#[test]
fn construction_rejects_bad_parameters() {
    assert!(HoleParams::new(0.0, 0.1).is_err());
    assert!(HoleParams::new(-1.0, 0.1).is_err());
    assert!(HoleParams::new(1.0, 0.5).is_err());
    assert!(HoleParams::new(1.0, f64::NAN).is_err());
    assert!(HoleParams::new(2.0, -100.0).is_ok());
}

#[test]
fn shift_reparametrization() {
    let h = HoleParams::new(1.0, 0.1).unwrap();
    assert_relative_eq!(h.a(), 1.0 / 9.0, max_relative = 1e-15);
    let h = HoleParams::new(1.0, -1.0).unwrap();
    assert_relative_eq!(h.a(), -0.5, max_relative = 1e-15);
    // a ∈ (−1, 1) over the admissible ε range
    for eps in [-1e6, -100.0, -1.0, 0.0, 0.3, 0.49] {
        let a = HoleParams::new(1.0, eps).unwrap().a();
        assert!(a > -1.0 && a < 1.0);
    }
}

#[test]
fn xi_is_half_at_the_shift() {
    for (mu, eps) in [(1.0, 0.1), (2.5, -3.0), (3.5, 0.4)] {
        let h = HoleParams::new(mu, eps).unwrap();
        assert_relative_eq!(h.xi(h.a()), 0.5, max_relative = 1e-15);
    }
}

/// Steep hole approximates the indicator of [0, a): with μ = 10,
/// a = 0.4 the profile is within 1e−6 of {1, 0} once |x − a| ≥ 0.5
/// (erfc(5)/2 ≈ 8e−13).
#[test]
fn xi_approaches_indicator_for_large_mu() {
    let h = HoleParams::new(10.0, 0.4 / 1.4).unwrap();
    assert_relative_eq!(h.a(), 0.4, max_relative = 1e-15);
    for d in [-5.0f64, -1.0, -0.5] {
        assert!((h.xi(0.4 + d) - 1.0f64).abs() < 1e-6);
    }
    for d in [0.5f64, 0.8, 2.0, 10.0] {
        assert!(h.xi::<f64>(0.4 + d).abs() < 1e-6);
    }
}

#[test]
fn xi_at_zero_strictly_below_one() {
    // (cases stay clear of Erf saturation: μ·a ≲ 6 keeps 1 − ξ(0)
    // representable in doubles)
    for (mu, eps) in [(1.0, 0.1), (3.5, 0.49), (2.0, -50.0), (3.0, 0.45)] {
        let h = HoleParams::new(mu, eps).unwrap();
        assert!(h.xi::<f64>(0.0) < 1.0);
    }
}

/// Quadrature oracle: ∫₀^X ξ dx by adaptive Simpson plus the analytic
/// tail (1/(2μ))(e^{−c²}/√π − c·erfc(c)) with c = μ(X − a), the
/// primitive of erfc/2.
fn measure_by_quadrature(h: &HoleParams) -> f64 {
    let a = h.a();
    let mu = h.mu();
    let x_cut = a.max(0.0) + 9.0 / mu;
    let scale = h.measure::<f64>().value.max(1e-300);
    let body = adaptive_simpson(&|x| h.xi(x), 0.0, x_cut, 1e-13 * scale).unwrap();
    let c = mu * (x_cut - a);
    let tail = ((-c * c).exp() / std::f64::consts::PI.sqrt()
        - c * crate::specialfn::erfc(c).unwrap())
        / (2.0 * mu);
    body + tail
}

#[test]
fn closed_form_measure_matches_quadrature_grid() {
    for mu in [1.0, 2.0, 2.5, 3.0, 3.5] {
        for eps in [0.1, 0.0, -1.0, -5.0, -20.0, -100.0] {
            let h = HoleParams::new(mu, eps).unwrap();
            let closed = h.measure::<f64>().value;
            let quad = measure_by_quadrature(&h);
            assert_relative_eq!(closed, quad, max_relative = 1e-10);
        }
    }
}

#[test]
fn measure_respects_crude_bound() {
    for mu in [1.0, 2.0, 3.5] {
        for eps in [0.3, 0.0, -2.0, -100.0] {
            let h = HoleParams::new(mu, eps).unwrap();
            let m = h.measure::<f64>().value;
            let a = h.a();
            assert!(m >= 0.0);
            assert!(m <= a + 1.0 / (2.0 * mu * std::f64::consts::PI.sqrt()) + a.abs());
        }
    }
}

#[test]
fn limit_measure_is_the_infimum_over_epsilon() {
    for mu in [1.0, 2.0, 2.5, 3.0, 3.5] {
        let floor: f64 = limit_measure(mu);
        assert!(floor > 0.0);
        for eps in [-1.0, -10.0, -1e3, -1e6] {
            let m = HoleParams::new(mu, eps).unwrap().measure::<f64>().value;
            assert!(m > floor, "M({mu},{eps}) = {m} vs floor {floor}");
        }
        // ε → −∞ converges to the floor
        let deep = HoleParams::new(mu, -1e12).unwrap().measure::<f64>().value;
        assert_relative_eq!(deep, floor, max_relative = 1e-6);
    }
}

#[test]
fn sharp_hole_limit_recovers_interval_length() {
    // μ large at fixed ε ∈ (0, 1/2): M → a, the measure of [0, a).
    let h = HoleParams::new(200.0, 0.3).unwrap();
    let a = h.a();
    assert_relative_eq!(h.measure::<f64>().value, a, max_relative = 1e-8);
}

#[test]
fn serde_round_trip_validates() {
    let h = HoleParams::new(2.0, -1.0).unwrap();
    let json = serde_json::to_string(&h).unwrap();
    let back: HoleParams = serde_json::from_str(&json).unwrap();
    assert_eq!(h, back);
    assert!(serde_json::from_str::<HoleParams>(r#"{"epsilon":0.6,"mu":1.0}"#).is_err());
    assert!(serde_json::from_str::<HoleParams>(r#"{"epsilon":0.1,"mu":-2.0}"#).is_err());
}

proptest! {
    /// ξ(a+d) + ξ(a−d) = 1 by oddness of Erf.
    #[test]
    fn xi_is_symmetric_about_the_shift(
        mu in 0.25f64..3.5,
        eps in -50.0f64..0.49,
        d in 0.0f64..20.0,
    ) {
        let h = HoleParams::new(mu, eps).unwrap();
        let a = h.a();
        let s: f64 = h.xi(a + d) + h.xi(a - d);
        prop_assert!((s - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn xi_is_strictly_decreasing(
        mu in 0.25f64..3.5,
        eps in -50.0f64..0.49,
        x in -5.0f64..5.0,
        d in 1e-2f64..3.0,
    ) {
        let h = HoleParams::new(mu, eps).unwrap();
        let hi: f64 = h.xi(x);
        let lo: f64 = h.xi(x + d);
        prop_assert!(lo <= hi);
        // strict except where the profile saturates near 1.0 in doubles
        if hi < 1.0 - 1e-12 {
            prop_assert!(lo < hi);
        }
    }

    #[test]
    fn measure_is_increasing_in_epsilon(
        mu in 0.25f64..3.5,
        eps in -50.0f64..0.45,
        step in 1e-3f64..0.04,
    ) {
        let lo = HoleParams::new(mu, eps).unwrap().measure::<f64>().value;
        let hi = HoleParams::new(mu, eps + step).unwrap().measure::<f64>().value;
        prop_assert!(hi > lo);
    }
}
