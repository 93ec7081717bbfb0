use super::*;
use crate::holes::HoleParams;
use crate::operator::{build_matrix, MatrixKind, OperatorMatrix, SeriesControl};
use approx::assert_relative_eq;

fn dense(size: usize, entries: Vec<f64>) -> OperatorMatrix {
    OperatorMatrix::from_raw(size, MatrixKind::Closed, entries)
}

#[test]
fn identity_matrix_gives_one() {
    let mut entries = vec![0.0; 16];
    for i in 0..4 {
        entries[i * 4 + i] = 1.0;
    }
    let r = principal_eigenvalue(&dense(4, entries), 1e-12, 100).unwrap();
    assert_eq!(r.lambda, 1.0);
    assert_eq!(r.residual, 0.0);
    assert_eq!(r.truncation, 4);
}

#[test]
fn symmetric_two_by_two() {
    let r = principal_eigenvalue(&dense(2, vec![2.0, 1.0, 1.0, 2.0]), 1e-14, 10_000).unwrap();
    assert_relative_eq!(r.lambda, 3.0, max_relative = 1e-12);
    assert!(r.residual <= 1e-14 * 3.0);
}

#[test]
fn complex_dominance_detected() {
    // eigenvalues ±2i
    let err = principal_eigenvalue(&dense(2, vec![0.0, -4.0, 1.0, 0.0]), 1e-14, 10_000)
        .unwrap_err();
    assert!(matches!(err, SpectralError::ComplexDominance(_)));
}

#[test]
fn no_convergence_reports_best_iterate() {
    // pure rotation: Rayleigh quotient is identically 0, never converges
    let err =
        principal_eigenvalue(&dense(2, vec![0.0, -1.0, 1.0, 0.0]), 1e-14, 50).unwrap_err();
    match err {
        SpectralError::NoConvergence { iterations, residual, .. } => {
            assert_eq!(iterations, 50);
            assert!(residual > 0.0);
        }
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn closed_truncations_increase_and_stay_below_one() {
    let m64 = build_matrix(64, MatrixKind::Closed, None, None).unwrap();
    let m128 = build_matrix(128, MatrixKind::Closed, None, None).unwrap();
    let l64 = principal_eigenvalue(&m64, EIG_TOL, EIG_MAX_ITER).unwrap();
    let l128 = principal_eigenvalue(&m128, EIG_TOL, EIG_MAX_ITER).unwrap();
    assert!(l64.lambda < l128.lambda);
    assert!(l128.lambda < 1.0);
}

#[test]
fn escape_rate_contract() {
    let a = SpectralResult { lambda: 0.9, residual: 0.0, iterations: 1, truncation: 8 };
    let b = SpectralResult { lambda: 0.9, residual: 0.0, iterations: 1, truncation: 8 };
    assert_eq!(escape_rate(&a, &b).unwrap(), 0.0);
    let c = SpectralResult { lambda: 0.9 / std::f64::consts::E, ..a };
    assert_relative_eq!(escape_rate(&c, &b).unwrap(), 1.0, max_relative = 1e-14);
    let d = SpectralResult { truncation: 16, ..a };
    assert!(matches!(
        escape_rate(&d, &b),
        Err(SpectralError::TruncationMismatch { .. })
    ));
    let e = SpectralResult { lambda: -0.1, ..a };
    assert!(matches!(escape_rate(&e, &b), Err(SpectralError::NonPositive { .. })));
}

#[test]
fn open_eigenvalue_below_closed_at_equal_truncation() {
    let ctl = SeriesControl::default();
    let hole = HoleParams::new(1.0, 0.1).unwrap();
    let closed = build_matrix(16, MatrixKind::Closed, None, None).unwrap();
    let open = build_matrix(16, MatrixKind::Open, Some(hole), Some(ctl)).unwrap();
    assert!(open.entries().iter().all(|x| x.is_finite()));
    let lc = principal_eigenvalue(&closed, EIG_TOL, EIG_MAX_ITER).unwrap();
    let lo = principal_eigenvalue(&open, EIG_TOL, EIG_MAX_ITER).unwrap();
    assert!(lo.lambda < lc.lambda);
}

#[test]
fn single_point_curve_has_positive_gamma() {
    let curve = escape_curve(1.0, &[0.1], 16, &SeriesControl::default(), false).unwrap();
    assert_eq!(curve.points.len(), 1);
    assert!(curve.failures.is_empty());
    assert!(curve.points[0].gamma > 0.0);
}

#[test]
fn curve_is_sorted_and_monotone() {
    // holes large enough that the N = 16 truncation drift is far below
    // the escape rate itself
    let curve =
        escape_curve(2.0, &[0.1, -0.5, 0.0, -1.0], 16, &SeriesControl::default(), false)
            .unwrap();
    assert_eq!(curve.points.len(), 4);
    for w in curve.points.windows(2) {
        assert!(w[0].hole_measure < w[1].hole_measure);
        // bigger hole ⇒ smaller eigenvalue ⇒ larger escape rate
        assert!(w[0].lambda_open >= w[1].lambda_open);
        assert!(w[0].gamma <= w[1].gamma);
    }
    for p in &curve.points {
        assert!(p.gamma >= 0.0);
    }
}

#[test]
fn curve_records_per_point_failures() {
    // ε = 0.6 violates the hole invariant; the rest of the grid survives
    let curve = escape_curve(1.5, &[0.1, 0.6], 12, &SeriesControl::default(), false).unwrap();
    assert_eq!(curve.points.len(), 1);
    assert_eq!(curve.failures.len(), 1);
    assert_eq!(curve.failures[0].0, 0.6);
}

#[test]
fn curve_csv_is_deterministic() {
    let ctl = SeriesControl::default();
    let a = escape_curve(2.0, &[0.1, -1.0], 12, &ctl, false).unwrap().to_csv();
    let b = escape_curve(2.0, &[0.1, -1.0], 12, &ctl, false).unwrap().to_csv();
    assert_eq!(a, b);
    assert!(a.starts_with("mu,epsilon,N,"));
    assert_eq!(a.lines().count(), 3);
}

fn synthetic_curve(gammas: impl Fn(f64) -> f64) -> EscapeCurve {
    let ms = [1e-5, 1e-4, 1e-3, 1e-2];
    EscapeCurve {
        mu: 3.0,
        truncation: 0,
        points: ms
            .iter()
            .map(|&m| CurvePoint {
                epsilon: 0.0,
                hole_measure: m,
                gamma: gammas(m),
                lambda_open: 0.0,
                lambda_closed: 0.0,
                truncation: 0,
                residual_open: 0.0,
                residual_closed: 0.0,
                series_terms_used: 0,
                doubling_shift: None,
                doubling_stable: None,
            })
            .collect(),
        failures: vec![],
    }
}

#[test]
fn scaling_report_selects_the_generating_law() {
    let on_f = synthetic_curve(|m| m / -m.ln());
    let rep = scaling_compare(&on_f).unwrap();
    assert_eq!(rep.selected, ScalingLaw::MOverNegLogM);
    assert!(rep.points.iter().all(|p| (p.ratio_f - 1.0).abs() < 1e-12));
    assert!(rep.sse_f < 1e-20);

    let on_identity = synthetic_curve(|m| m);
    let rep = scaling_compare(&on_identity).unwrap();
    assert_eq!(rep.selected, ScalingLaw::Identity);
    assert!(rep.points.iter().all(|p| (p.ratio_identity - 1.0).abs() < 1e-12));

    let mut too_few = synthetic_curve(|m| m);
    too_few.points.truncate(2);
    assert!(matches!(
        scaling_compare(&too_few),
        Err(SpectralError::InsufficientPoints(2))
    ));
}

#[test]
fn doubling_check_flags_are_populated() {
    let curve = escape_curve(2.0, &[0.1], 8, &SeriesControl::default(), true).unwrap();
    let p = &curve.points[0];
    assert!(p.doubling_shift.is_some());
    assert!(p.doubling_stable.is_some());
}
