//! Arbitrary-precision (MPFR-backed) counterparts of the special
//! functions, used by the open-operator series where alternating terms
//! grow like mu^{2n+1} before the factorial wins.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

pub fn float(prec: u32, x: f64) -> Float {
    Float::with_val(prec, x)
}

pub fn sqrt_pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi).sqrt()
}

pub fn erf(x: &Float) -> Float {
    x.clone().erf()
}

pub fn erfc(x: &Float) -> Float {
    x.clone().erfc()
}

pub fn binomial(n: u64, k: u64) -> Integer {
    if k > n {
        return Integer::ZERO;
    }
    Integer::from(n).binomial(k as u32)
}

pub fn factorial(n: u32) -> Integer {
    Integer::factorial(n).into()
}

/// `a = eps / (1 - eps)` at working precision, from the exact binary
/// value of the `f64` input.
pub fn hole_shift(prec: u32, epsilon: f64) -> Float {
    let e = Rational::from_f64(epsilon).expect("finite epsilon");
    let denom = Rational::from(1) - e.clone();
    Float::with_val(prec, e / denom)
}

/// Laguerre basis polynomial `e_nu(t) = L_nu^{(1)}(t)` by the three-term
/// recurrence, at the precision of `t`.
pub fn laguerre_e(nu: usize, t: &Float) -> Float {
    let prec = t.prec();
    let mut prev = Float::with_val(prec, 1);
    if nu == 0 {
        return prev;
    }
    let mut cur = Float::with_val(prec, 2) - t;
    for n in 1..nu {
        let mut next = Float::with_val(prec, 2 * (n as u32 + 1)) - t;
        next *= &cur;
        next -= Float::with_val(prec, n as u32 + 1) * &prev;
        next /= n as u32 + 1;
        prev = cur;
        cur = next;
    }
    cur
}

/// Exact rational value of the terminating Pfaff sum for
/// `2F1(nu+2, k+m+2; k+2; -1)`; see `specialfn::hyp2f1_at_minus1`.
pub fn hyp2f1_at_minus1_exact(nu: usize, k: usize, m: usize) -> Rational {
    let mut term = Rational::from(1);
    let mut sum = Rational::from(1);
    for s in 0..m {
        let num = (nu + 2 + s) as i64 * ((s as i64) - (m as i64));
        let den = (k + 2 + s) as i64 * (s as i64 + 1) * 2;
        term *= Rational::from((num, den));
        sum += &term;
    }
    sum / (Integer::from(1) << (nu as u32 + 2))
}

/// `2F1(nu+2, k+m+2; k+2; -1)` rounded to `prec` bits.
pub fn hyp2f1_at_minus1(nu: usize, k: usize, m: usize, prec: u32) -> Float {
    Float::with_val(prec, hyp2f1_at_minus1_exact(nu, k, m))
}

/// `1F1(a, b, x)` by the defining series at the precision of `x`.
/// Oracle use; for nonpositive integer `a` the series terminates.
pub fn hyp1f1(a: i64, b: u64, x: &Float) -> Float {
    assert!(b > 0);
    let prec = x.prec();
    let mut term = Float::with_val(prec, 1);
    let mut sum = Float::with_val(prec, 1);
    let mut n: i64 = 0;
    loop {
        term *= Float::with_val(prec, a + n);
        term /= Float::with_val(prec, b as i64 + n);
        term *= x;
        term /= Float::with_val(prec, n + 1);
        if term.is_zero() {
            break;
        }
        sum += &term;
        n += 1;
        if term.clone().abs() * Float::with_val(prec, 2u32).pow(prec) < sum.clone().abs() || n > 100_000 {
            break;
        }
    }
    sum
}
