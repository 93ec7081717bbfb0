//! Function-space check of the hole-perturbed multiplication operator:
//! in the transform B[φ](x) = x⁻² ∫₀^∞ t e^{−t/x} φ(t) dt
//! (= ∫₀^∞ u e^{−u} φ(ux) du after u = t/x), the perturbed operator
//! must act as multiplication by (1 − ξ_μ(x, a)) on the transformed
//! side:
//!
//!   B[˜M_μ e_ν](x) = (1 − ξ_μ(x,a)) · B[M e_ν](x).
//!
//! The left side only sees the matrix entries (the coefficient vector
//! of ˜M_μ e_ν in the Laguerre basis), the right side only sees the
//! hole profile and a quadrature of M e_ν, so agreement validates the
//! entire entry formula end to end.

use super::OracleError;
use crate::holes::HoleParams;
use crate::operator::{OpenAssembler, SeriesControl};
use crate::quadrature::GaussLaguerreMp;
use crate::specialfn::mp;
use rug::Float;

/// Laguerre-coefficient tail kept in the expansion of ˜M_μ e_ν; the
/// coefficients decay geometrically so this leaves the check far below
/// its 1e−8 target.
const COEFF_COUNT: usize = 64;

/// B[φ](x) for φ given by Laguerre coefficients, at the rule's
/// precision: Σ_i w_i φ(u_i x).
pub fn borel_transform_mp(coeffs: &[Float], x: f64, rule: &GaussLaguerreMp) -> Float {
    let prec = rule.nodes[0].prec();
    rule.integrate(|u| {
        let t = Float::with_val(prec, u * x);
        laguerre_series(coeffs, &t)
    })
}

/// Σ_j c_j e_j(t) by the forward three-term recurrence
/// (n+1) e_{n+1} = (2n+2−t) e_n − (n+1) e_{n−1}.
fn laguerre_series(coeffs: &[Float], t: &Float) -> Float {
    let prec = t.prec();
    let mut sum = Float::new(prec);
    if coeffs.is_empty() {
        return sum;
    }
    let mut prev = Float::with_val(prec, 1); // e_0
    sum += Float::with_val(prec, &coeffs[0] * &prev);
    if coeffs.len() == 1 {
        return sum;
    }
    let mut cur = Float::with_val(prec, 2) - t; // e_1
    sum += Float::with_val(prec, &coeffs[1] * &cur);
    for (j, c) in coeffs.iter().enumerate().skip(2) {
        let n = (j - 1) as u32;
        let mut next = Float::with_val(prec, 2 * n + 2) - t;
        next *= &cur;
        next -= Float::with_val(prec, n + 1) * &prev;
        next /= n + 1;
        prev = cur;
        cur = next;
        sum += Float::with_val(prec, c * &cur);
    }
    sum
}

/// Max relative discrepancy of the identity over the sample points.
pub fn borel_identity_check(
    hole: &HoleParams,
    nu: usize,
    x_samples: &[f64],
    ctl: &SeriesControl,
    order: usize,
) -> Result<f64, OracleError> {
    if x_samples.iter().any(|&x| !(0.05..1.0).contains(&x)) {
        return Err(OracleError::Config(
            "sample points must lie in [0.05, 1)".into(),
        ));
    }
    let prec = ctl.precision.bit_width().max(128);
    let rule = GaussLaguerreMp::new(order, prec)?;
    let asm = OpenAssembler::new(*hole, *ctl, COEFF_COUNT)?;
    let coeffs: Vec<Float> = (0..COEFF_COUNT).map(|j| asm.m_part_mp(j, nu)).collect();
    let a = mp::hole_shift(prec, hole.epsilon());
    let mu = Float::with_val(prec, hole.mu());

    let mut worst: f64 = 0.0;
    for &x in x_samples {
        let lhs = borel_transform_mp(&coeffs, x, &rule);
        // B[M e_ν](x) = ∫ u e^{−u} e^{−ux} e_ν(ux) du
        let me = rule.integrate(|u| {
            let t = Float::with_val(prec, u * x);
            mp::laguerre_e(nu, &t) * (-t.clone()).exp()
        });
        // 1 − ξ = 1/2 + Erf(μ(x − a))/2
        let mut arg = Float::with_val(prec, x);
        arg -= &a;
        arg *= &mu;
        let survive = (Float::with_val(prec, 1) + mp::erf(&arg)) / 2u32;
        let rhs = survive * me;
        let denom = rhs.clone().abs().max(&Float::with_val(prec, 1e-300));
        let rel = (Float::with_val(prec, &lhs - &rhs).abs() / denom).to_f64();
        worst = worst.max(rel);
    }
    Ok(worst)
}
