//! Acceptance gate for the whole pipeline: one test per criterion,
//! each printing exactly one PASS/FAIL line with the measured numbers
//! and the tolerance pinned next to it. Criteria that the pipeline
//! cannot honestly reach at the pinned resolutions are allowed to fail
//! here rather than being loosened; the line carries the measured
//! discrepancy so the failure is self-describing.

use farey_escape::holes::limit_measure;
use farey_escape::operator::{build_matrix, MatrixKind, OpenAssembler, Precision};
use farey_escape::oracles::{
    borel_identity_check, km_open_eigenvalue, mc_survival, ulam_eigenvalue, HoleMode, MapKind,
    UlamConfig,
};
use farey_escape::spectral::{
    escape_curve, principal_eigenvalue, scaling_compare, ScalingLaw, EIG_MAX_ITER, EIG_TOL,
};
use farey_escape::{HoleParams, SeriesControl};

/// ±5% on the hole-measure table (reference values carry one significant figure).
const MEASURE_TOL: f64 = 0.05;
/// Scaling band for γ/(M/−log M) in criterion 2.
const SCALING_BAND: f64 = 3.0;
/// Truncation pinned for the scaling curves.
const SCALING_N: usize = 128;
/// Truncation for the ordering check (criterion 3).
const ORDERING_N: usize = 64;
/// ±20% band on γ(n)·n·log n for the piecewise-linear model map.
const KM_BAND: f64 = 0.20;
/// Closed-matrix symmetry tolerance (entries are exact dyadic rationals).
const SYMMETRY_TOL: f64 = 1e-12;
/// Borel-identity ceiling.
const BOREL_TOL: f64 = 1e-8;
/// Laguerre-vs-Ulam soft agreement band.
const CROSS_TOL: f64 = 0.10;
/// 128-bit vs 256-bit open entries, absolute.
const PRECISION_TOL: f64 = 1e-20;

fn verdict(criterion: &str, failures: &[String]) {
    if failures.is_empty() {
        println!("ACCEPTANCE {criterion}: PASS");
    } else {
        let detail = failures.join("; ");
        println!("ACCEPTANCE {criterion}: FAIL — {detail}");
        panic!("{criterion} failed: {detail}");
    }
}

/// Criterion 1: hole-measure limits against the reported values
/// 0.025 (μ=1), 2e−4 (μ=2), 1e−5 (μ=2.5), 5e−7 (μ=3), 1e−8 (μ=3.5)
/// for ε → −∞, plus spot values at (μ=3, ε=−20) and (μ=3.5, ε=−10).
#[test]
fn criterion_1_hole_measure_limits() {
    let mut failures = Vec::new();
    let table = [(1.0, 0.025), (2.0, 2e-4), (2.5, 1e-5), (3.0, 5e-7), (3.5, 1e-8)];
    for (mu, reported) in table {
        let m: f64 = limit_measure(mu);
        let rel = (m - reported).abs() / reported;
        if rel > MEASURE_TOL {
            failures.push(format!(
                "limit M(mu={mu}) = {m:.4e} vs reported {reported:.1e} (off {:.0}%, tol {:.0}%)",
                rel * 100.0,
                MEASURE_TOL * 100.0
            ));
        }
    }
    for (mu, eps, reported) in [(3.0, -20.0, 1e-6), (3.5, -10.0, 1e-7)] {
        let m = HoleParams::new(mu, eps).unwrap().measure::<f64>().value;
        let rel: f64 = (m - reported).abs() / reported;
        if rel > MEASURE_TOL {
            failures.push(format!(
                "M(mu={mu}, eps={eps}) = {m:.4e} vs reported {reported:.1e} (off {:.0}%)",
                rel * 100.0
            ));
        }
    }
    verdict("criterion 1 (hole-measure limits)", &failures);
}

/// Criterion 2: for μ ∈ {3, 3.5} over points with M ∈ [1e−6, 1e−2] at
/// N = 128, the log-log fit must select f(t) = t/(−log t) over the
/// identity and γ/f must stay within a factor of 3.
#[test]
fn criterion_2_scaling_law() {
    let ctl = SeriesControl::default();
    let grids: [(f64, &[f64]); 2] = [
        (3.0, &[-0.5, -0.7, -1.2, -2.0, -3.0, -5.0, -10.0, -30.0]),
        (3.5, &[-0.4, -0.55, -0.7, -1.2, -2.0, -3.0]),
    ];
    let mut failures = Vec::new();
    for (mu, grid) in grids {
        let mut curve = escape_curve(mu, grid, SCALING_N, &ctl, false).unwrap();
        curve
            .points
            .retain(|p| p.hole_measure >= 1e-6 && p.hole_measure <= 1e-2);
        let report = scaling_compare(&curve).unwrap();
        let worst = report
            .points
            .iter()
            .map(|p| p.ratio_f.max(1.0 / p.ratio_f))
            .fold(0.0f64, f64::max);
        if report.selected != ScalingLaw::MOverNegLogM {
            failures.push(format!(
                "mu={mu}: fit selects {:?} (sse_f {:.3e} vs sse_id {:.3e})",
                report.selected, report.sse_f, report.sse_identity
            ));
        }
        if worst > SCALING_BAND {
            failures.push(format!(
                "mu={mu}: gamma/(M/-log M) reaches {worst:.1} (band {SCALING_BAND})"
            ));
        }
    }
    verdict("criterion 2 (M/-log M scaling at N = 128)", &failures);
}

/// Bisect ε so that M_μ(ε) equals the target (measure is strictly
/// increasing in ε).
fn eps_for_measure(mu: f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (-1e4f64, 0.49f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let m = HoleParams::new(mu, mid).unwrap().measure::<f64>().value;
        if m < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Criterion 3: at shared hole-measure abscissae the curves are ordered
/// from μ = 1 (biggest) down to μ = 3.5 (lowest), and the μ = 1 curve
/// terminates near M ≈ 0.025.
#[test]
fn criterion_3_curve_ordering() {
    let ctl = SeriesControl::default();
    let mus = [1.0, 2.0, 2.5, 3.0, 3.5];
    let shared_m = [0.03, 0.06, 0.12];
    let mut failures = Vec::new();
    for target in shared_m {
        let mut gammas = Vec::new();
        for mu in mus {
            let eps = eps_for_measure(mu, target);
            let curve = escape_curve(mu, &[eps], ORDERING_N, &ctl, false).unwrap();
            assert_eq!(curve.points.len(), 1, "curve point failed at mu={mu} eps={eps}");
            gammas.push(curve.points[0].gamma);
        }
        for w in gammas.windows(2) {
            if !(w[0] > w[1]) {
                failures.push(format!(
                    "M={target}: gammas not decreasing in mu: {gammas:?}"
                ));
                break;
            }
        }
    }
    let floor: f64 = limit_measure(1.0);
    if (floor - 0.025).abs() / 0.025 > 0.10 {
        failures.push(format!("mu=1 curve floor {floor:.4e} not near 0.025"));
    }
    verdict("criterion 3 (curve ordering at shared M)", &failures);
}

/// Criterion 4: the piecewise-linear model map gives γ(2) = log 2
/// exactly and γ(n)·n·log n flat to ±20% over n ∈ {50, 100, 500, 1000}.
#[test]
fn criterion_4_km_scaling() {
    let mut failures = Vec::new();
    let lambda2 = km_open_eigenvalue(2).unwrap();
    if lambda2 != 0.5 {
        failures.push(format!("lambda(2) = {lambda2} != 1/2 exactly"));
    }
    let scaled: Vec<f64> = [50usize, 100, 500, 1000]
        .iter()
        .map(|&n| {
            let lam = km_open_eigenvalue(n).unwrap();
            -lam.ln() * n as f64 * (n as f64).ln()
        })
        .collect();
    let mean = scaled.iter().sum::<f64>() / scaled.len() as f64;
    for (i, s) in scaled.iter().enumerate() {
        let dev = (s - mean).abs() / mean;
        if dev > KM_BAND {
            failures.push(format!(
                "gamma*n*log n at index {i} deviates {:.0}% from mean {mean:.4}",
                dev * 100.0
            ));
        }
    }
    verdict("criterion 4 (model-map 1/(n log n) scaling)", &failures);
}

/// Criterion 5: closed-matrix symmetry (j+1)a_{jν} = (ν+1)a_{νj} and
/// strictly increasing sub-unit eigenvalues over doubling truncations.
#[test]
fn criterion_5_closed_structure() {
    let mut failures = Vec::new();
    let m = build_matrix(32, MatrixKind::Closed, None, None).unwrap();
    let e = m.entries();
    let mut worst = 0.0f64;
    for j in 0..32 {
        for nu in 0..32 {
            let d = ((j + 1) as f64 * e[j * 32 + nu] - (nu + 1) as f64 * e[nu * 32 + j]).abs();
            worst = worst.max(d);
        }
    }
    if worst > SYMMETRY_TOL {
        failures.push(format!("symmetry defect {worst:.2e} (tol {SYMMETRY_TOL:.0e})"));
    }
    let mut prev = 0.0;
    for n in [32usize, 64, 128, 256] {
        let mat = build_matrix(n, MatrixKind::Closed, None, None).unwrap();
        let lam = principal_eigenvalue(&mat, EIG_TOL, EIG_MAX_ITER).unwrap().lambda;
        if !(lam < 1.0 && lam > prev) {
            failures.push(format!("lambda({n}) = {lam} breaks prev < lambda < 1"));
        }
        prev = lam;
    }
    verdict("criterion 5 (closed-operator structure)", &failures);
}

/// Criterion 6: Borel-identity oracle below 1e−8 for ν ≤ 4,
/// μ ∈ {1, 2}, ε ∈ {0.1, −1}, x ∈ {0.1, 0.3, 0.5, 0.9}, order 128.
#[test]
fn criterion_6_borel_identity() {
    let ctl = SeriesControl::default();
    let xs = [0.1, 0.3, 0.5, 0.9];
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for mu in [1.0, 2.0] {
        for eps in [0.1, -1.0] {
            let hole = HoleParams::new(mu, eps).unwrap();
            for nu in 0..=4usize {
                let rel = borel_identity_check(&hole, nu, &xs, &ctl, 128).unwrap();
                worst = worst.max(rel);
                if rel > BOREL_TOL {
                    failures.push(format!(
                        "mu={mu} eps={eps} nu={nu}: relative error {rel:.2e}"
                    ));
                }
            }
        }
    }
    println!("criterion 6 worst relative error: {worst:.2e} (tol {BOREL_TOL:.0e})");
    verdict("criterion 6 (Borel identity, order 128)", &failures);
}

/// Criterion 7 (soft): Laguerre (N = 128, with doubling check) vs Ulam
/// (2¹¹ bins, refinement check) within 10%, MC within 3σ of Ulam.
/// Disagreements are flagged and logged, not failed: the operators act
/// on different function spaces and no equivalence is proven.
#[test]
fn criterion_7_cross_method() {
    let ctl = SeriesControl::default();
    let hole = HoleParams::new(2.0, 0.1).unwrap();
    let mut flags = Vec::new();

    let curve = escape_curve(2.0, &[0.1], 128, &ctl, true).unwrap();
    let p = &curve.points[0];
    let gamma_lag = p.gamma;
    if p.doubling_stable != Some(true) {
        flags.push(format!(
            "laguerre gamma not doubling-stable (shift {:?})",
            p.doubling_shift
        ));
    }

    let ulam = |bins: usize| {
        ulam_eigenvalue(&UlamConfig { bins, hole_mode: HoleMode::Smooth(hole), samples_per_bin: 32 })
            .map(|r| -r.lambda.ln())
            .unwrap()
    };
    let gamma_ulam = ulam(2048);
    let gamma_ulam_coarse = ulam(1024);
    if (gamma_ulam - gamma_ulam_coarse).abs() / gamma_ulam > 0.02 {
        flags.push(format!(
            "ulam not refinement-stable: {gamma_ulam_coarse:.4} -> {gamma_ulam:.4}"
        ));
    }

    let cross = (gamma_lag - gamma_ulam).abs() / gamma_ulam;
    if cross > CROSS_TOL {
        flags.push(format!(
            "laguerre {gamma_lag:.4} vs ulam {gamma_ulam:.4}: {:.0}% apart (band {:.0}%)",
            cross * 100.0,
            CROSS_TOL * 100.0
        ));
    }

    let mc = mc_survival(MapKind::Farey, HoleMode::Smooth(hole), 24, 1_000_000, 1).unwrap();
    let sigma = (mc.gamma_hat - gamma_ulam).abs() / mc.stderr;
    if sigma > 3.0 {
        flags.push(format!(
            "mc {:.4} ± {:.4} vs ulam {gamma_ulam:.4}: {sigma:.1}σ",
            mc.gamma_hat, mc.stderr
        ));
    }

    if flags.is_empty() {
        println!("ACCEPTANCE criterion 7 (cross-method, soft): PASS");
    } else {
        println!(
            "ACCEPTANCE criterion 7 (cross-method, soft): PASS with flags — {}",
            flags.join("; ")
        );
    }
}

/// Criterion 8: byte-identical re-runs and 128-bit vs 256-bit open
/// entries agreeing to 1e−20 absolute for j, ν < 32 across the box.
#[test]
fn criterion_8_determinism_and_precision() {
    let ctl = SeriesControl::default();
    let mut failures = Vec::new();

    let csv_a = escape_curve(2.0, &[0.1, -1.0], 12, &ctl, false).unwrap().to_csv();
    let csv_b = escape_curve(2.0, &[0.1, -1.0], 12, &ctl, false).unwrap().to_csv();
    if csv_a != csv_b {
        failures.push("curve CSV not byte-identical across re-runs".into());
    }

    let boxes = [(1.0, 0.1), (3.5, 0.1), (2.0, -1.0), (1.0, -100.0), (3.5, -100.0)];
    let mut worst = 0.0f64;
    for (mu, eps) in boxes {
        let hole = HoleParams::new(mu, eps).unwrap();
        let lo = SeriesControl { precision: Precision::bits(128).unwrap(), ..ctl };
        let hi = SeriesControl { precision: Precision::bits(256).unwrap(), ..ctl };
        let asm_lo = OpenAssembler::new(hole, lo, 32).unwrap();
        let asm_hi = OpenAssembler::new(hole, hi, 32).unwrap();
        for j in 0..32 {
            for nu in 0..32 {
                // compare at full precision; f64 rounding would mask 1e−20
                let d = (asm_lo.entry_mp(j, nu) - asm_hi.entry_mp(j, nu)).abs().to_f64();
                worst = worst.max(d);
            }
        }
    }
    if worst > PRECISION_TOL {
        failures.push(format!(
            "128 vs 256-bit entries differ by {worst:.2e} (tol {PRECISION_TOL:.0e})"
        ));
    }
    verdict("criterion 8 (determinism and precision)", &failures);
}
