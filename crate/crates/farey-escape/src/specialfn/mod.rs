//! Special functions needed by the matrix assembly and the oracles:
//! error function, binomials and Pochhammer symbols, Laguerre
//! polynomials, confluent hypergeometric series, and the terminating
//! Gauss hypergeometric values at argument −1.
//!
//! Hardware-float versions are generic over [`Real`]; the `mp`
//! submodule holds the arbitrary-precision counterparts used by the
//! open-operator series.

pub mod mp;

use crate::real::Real;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest `n` for which `binomial(n, k)` is evaluated by exact integer
/// arithmetic; beyond this the log-gamma route takes over (C(62, 31)
/// still fits in 63 bits, C(63, 31) does not).
pub const EXACT_BINOMIAL_MAX_N: u64 = 62;

#[derive(Debug, Error)]
pub enum SpecialFnError {
    #[error("non-finite input {0}")]
    NonFinite(f64),
    #[error("overflow evaluating Laguerre e_{nu}({t})")]
    LaguerreOverflow { nu: usize, t: f64 },
    #[error("working precision must be at least 53 bits, got {0}")]
    PrecisionTooLow(u32),
}

/// Working mantissa width for the multiprecision code paths.
///
/// `Precision::HARDWARE` marks values that are computed in native
/// floats; everything else carries an explicit bit count (>= 53).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PrecisionRepr", into = "PrecisionRepr")]
pub struct Precision {
    bits: u32,
    hardware: bool,
}

impl Precision {
    pub const HARDWARE: Precision = Precision { bits: 53, hardware: true };

    pub fn bits(bits: u32) -> Result<Self, SpecialFnError> {
        if bits < 53 {
            return Err(SpecialFnError::PrecisionTooLow(bits));
        }
        Ok(Precision { bits, hardware: false })
    }

    pub fn bit_width(self) -> u32 {
        self.bits
    }

    pub fn is_hardware(self) -> bool {
        self.hardware
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::bits(256).unwrap()
    }
}

#[derive(Serialize, Deserialize)]
struct PrecisionRepr {
    bits: u32,
    hardware: bool,
}

impl TryFrom<PrecisionRepr> for Precision {
    type Error = String;
    fn try_from(r: PrecisionRepr) -> Result<Self, String> {
        if r.hardware {
            Ok(Precision::HARDWARE)
        } else {
            Precision::bits(r.bits).map_err(|e| e.to_string())
        }
    }
}

impl From<Precision> for PrecisionRepr {
    fn from(p: Precision) -> Self {
        PrecisionRepr { bits: p.bits, hardware: p.hardware }
    }
}

/// Error function, accurate over the whole double range (|x| up to 50
/// and far beyond). Maclaurin series on |x| <= 1, Laplace continued
/// fraction for the complementary function elsewhere.
pub fn erf<R: Real>(x: R) -> Result<R, SpecialFnError> {
    if !x.is_finite() {
        return Err(SpecialFnError::NonFinite(x.to_f64().unwrap_or(f64::NAN)));
    }
    let ax = x.abs();
    if ax <= R::one() {
        Ok(erf_series(x))
    } else {
        let tail = erfc_cf(ax);
        let e = R::one() - tail;
        Ok(if x < R::zero() { -e } else { e })
    }
}

/// Complementary error function with full relative accuracy for x >= 1.
pub fn erfc<R: Real>(x: R) -> Result<R, SpecialFnError> {
    if !x.is_finite() {
        return Err(SpecialFnError::NonFinite(x.to_f64().unwrap_or(f64::NAN)));
    }
    let one = R::one();
    if x >= one {
        Ok(erfc_cf(x))
    } else if x <= -one {
        Ok((one + one) - erfc_cf(-x))
    } else {
        Ok(one - erf_series(x))
    }
}

/// Maclaurin series of erf; the terms are bounded by e^{x^2} so this is
/// only used for |x| <= 1.
fn erf_series<R: Real>(x: R) -> R {
    let x2 = x * x;
    let mut term = x; // x^{2n+1} / n!
    let mut sum = x;
    let mut n = 0usize;
    loop {
        n += 1;
        term = -term * x2 / R::of_usize(n);
        let contrib = term / R::of_usize(2 * n + 1);
        let next = sum + contrib;
        if next == sum || n > 200 {
            break;
        }
        sum = next;
    }
    sum * (R::one() + R::one()) / R::sqrt_pi()
}

/// Laplace continued fraction for erfc, evaluated by the modified Lentz
/// algorithm. Converges for x >= 1.
fn erfc_cf<R: Real>(x: R) -> R {
    let prefactor = (-x * x).exp() / R::sqrt_pi();
    if prefactor == R::zero() {
        return R::zero();
    }
    let tiny = R::of(1e-300);
    let half = R::of(0.5);
    let mut f = x;
    let mut c = f;
    let mut d = R::zero();
    for i in 1..500usize {
        let a = R::of_usize(i) * half;
        d = x + a * d;
        if d == R::zero() {
            d = tiny;
        }
        c = x + a / c;
        if c == R::zero() {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f = f * delta;
        if (delta - R::one()).abs() < R::epsilon() {
            break;
        }
    }
    prefactor / f
}

/// Laguerre polynomial `e_nu(t) = L_nu^{(1)}(t)`, the orthogonal basis
/// of L^2(t e^{-t} dt), by the stable three-term recurrence
/// `(n+1) e_{n+1} = (2n+2-t) e_n - (n+1) e_{n-1}`.
pub fn laguerre_e<R: Real>(nu: usize, t: R) -> Result<R, SpecialFnError> {
    if !t.is_finite() {
        return Err(SpecialFnError::NonFinite(t.to_f64().unwrap_or(f64::NAN)));
    }
    let overflow = |v: R| SpecialFnError::LaguerreOverflow { nu, t: t.to_f64().unwrap_or(v.to_f64().unwrap_or(f64::NAN)) };
    let mut prev = R::one();
    if nu == 0 {
        return Ok(prev);
    }
    let two = R::one() + R::one();
    let mut cur = two - t;
    for n in 1..nu {
        let np1 = R::of_usize(n + 1);
        let next = ((two * R::of_usize(n) + two - t) * cur - np1 * prev) / np1;
        if !next.is_finite() {
            return Err(overflow(next));
        }
        prev = cur;
        cur = next;
    }
    if !cur.is_finite() {
        return Err(overflow(cur));
    }
    Ok(cur)
}

/// Defining alternating sum of `e_nu`; cancels badly for t beyond ~20,
/// kept only as an independent cross-check of the recurrence.
#[doc(hidden)]
pub fn laguerre_e_sum<R: Real>(nu: usize, t: R) -> R {
    let mut sum = R::zero();
    for m in 0..=nu {
        let mut term: R = binomial((nu + 1) as u64, (nu - m) as u64);
        for i in 1..=m {
            term = term * (-t) / R::of_usize(i);
        }
        sum = sum + term;
    }
    sum
}

/// Binomial coefficient as a float: exact integer arithmetic up to
/// n = [`EXACT_BINOMIAL_MAX_N`], log-gamma beyond. `k > n` yields 0.
pub fn binomial<R: Real>(n: u64, k: u64) -> R {
    if k > n {
        return R::zero();
    }
    let k = k.min(n - k);
    if n <= EXACT_BINOMIAL_MAX_N {
        let mut acc: u128 = 1;
        for i in 1..=k as u128 {
            acc = acc * ((n as u128) - (k as u128) + i) / i;
        }
        R::of(acc as f64)
    } else {
        let n = R::of(n as f64);
        let k = R::of(k as f64);
        (ln_gamma(n + R::one()) - ln_gamma(k + R::one()) - ln_gamma(n - k + R::one())).exp()
    }
}

/// Rising factorial (x)_s = x (x+1) ... (x+s-1), with ()_0 = 1.
pub fn pochhammer<R: Real>(x: R, s: usize) -> R {
    let mut acc = R::one();
    for i in 0..s {
        acc = acc * (x + R::of_usize(i));
    }
    acc
}

/// Log-gamma for x > 0 by the Lanczos approximation (g = 7, 9 terms);
/// relative accuracy around 1e-13, plenty for binomials past the exact
/// integer range.
pub fn ln_gamma<R: Real>(x: R) -> R {
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    debug_assert!(x > R::zero());
    let z = x - R::one();
    let mut acc = R::of(COEF[0]);
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc = acc + R::of(c) / (z + R::of_usize(i));
    }
    let g = R::of(7.5);
    let t = z + g;
    let half = R::of(0.5);
    let sqrt_two_pi = (R::PI() + R::PI()).sqrt();
    (z + half) * t.ln() - t + (sqrt_two_pi * acc).ln()
}

/// Terminating Gauss hypergeometric value `2F1(nu+2, k+m+2; k+2; -1)`
/// via the Pfaff transform: since c - b = -m, the transformed series is
/// a finite sum, `2^{-(nu+2)} sum_{s=0}^{m} (nu+2)_s (-m)_s / ((k+2)_s s!) (1/2)^s`.
pub fn hyp2f1_at_minus1<R: Real>(nu: usize, k: usize, m: usize) -> R {
    let half = R::of(0.5);
    let mut term = R::one();
    let mut sum = R::one();
    for s in 0..m {
        let num = R::of_usize(nu + 2 + s) * (R::of_usize(s) - R::of_usize(m));
        let den = R::of_usize(k + 2 + s) * R::of_usize(s + 1);
        term = term * num / den * half;
        sum = sum + term;
    }
    sum * half.powi((nu + 2) as i32)
}

/// Result of a confluent hypergeometric evaluation; `precision_loss`
/// reports cancellation past half the working digits.
#[derive(Clone, Copy, Debug)]
pub struct Hyp1F1<R> {
    pub value: R,
    pub precision_loss: bool,
}

/// Confluent hypergeometric `1F1(a, b, x)` by the defining series;
/// terminating when `a` is a nonpositive integer. Oracle use only.
pub fn hyp1f1<R: Real>(a: i64, b: u64, x: R) -> Hyp1F1<R> {
    assert!(b > 0, "1F1 requires b > 0");
    let mut term = R::one();
    let mut sum = R::one();
    let mut max_abs = R::one();
    let mut n: i64 = 0;
    loop {
        let an = R::of((a + n) as f64);
        let bn = R::of(b as f64) + R::of(n as f64);
        term = term * an / bn * x / R::of((n + 1) as f64);
        if term == R::zero() {
            break;
        }
        sum = sum + term;
        max_abs = max_abs.max(sum.abs()).max(term.abs());
        n += 1;
        if a <= 0 && n > -a {
            break; // terminated polynomially
        }
        if term.abs() < sum.abs() * R::epsilon() || n > 10_000 {
            break;
        }
    }
    let loss_threshold = R::epsilon().sqrt().recip();
    let precision_loss = sum == R::zero() || max_abs / sum.abs() > loss_threshold;
    Hyp1F1 { value: sum, precision_loss }
}
