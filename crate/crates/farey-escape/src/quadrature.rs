//! Quadrature rules used by the oracles: generalized Gauss–Laguerre for
//! integrals against the measure dm = t e⁻ᵗ dt on (0, ∞), and adaptive
//! Simpson for finite-interval cross-checks.

use crate::real::Real;
use rug::Float;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error("Newton iteration for node {index} of the {order}-point rule did not converge")]
    NodeNotConverged { order: usize, index: usize },
    #[error("adaptive Simpson exceeded {0} subdivision levels")]
    TooDeep(usize),
}

/// Generalized Laguerre polynomial L_n^{(α)}(x) by the three-term
/// recurrence `(n+1) L_{n+1} = (2n+α+1−x) L_n − (n+α) L_{n−1}`.
fn laguerre_general(n: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + alpha + 1.0 - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Gauss–Laguerre rule for the weight t e⁻ᵗ on (0, ∞): the nodes are
/// the roots of e_n = L_n^{(1)} and the weights are
/// w_i = x_i / ((n+1) e_{n+1}(x_i)²), so that
/// ∫₀^∞ f(t) t e⁻ᵗ dt ≈ Σ w_i f(x_i), exact for polynomials of degree
/// ≤ 2n−1.
#[derive(Clone, Debug)]
pub struct GaussLaguerre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn new(n: usize) -> Result<Self, QuadratureError> {
        assert!(n >= 2, "rule order must be at least 2");
        let alpha = 1.0;
        let nf = n as f64;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut z = 0.0;
        for i in 0..n {
            // Stroud–Secrest style initial guesses, then Newton.
            if i == 0 {
                z = (1.0 + alpha) * (3.0 + 0.92 * alpha) / (1.0 + 2.4 * nf + 1.8 * alpha);
            } else if i == 1 {
                z += (15.0 + 6.25 * alpha) / (1.0 + 0.9 * alpha + 2.5 * nf);
            } else {
                let ai = (i - 1) as f64;
                z += ((1.0 + 2.55 * ai) / (1.9 * ai)
                    + 1.26 * ai * alpha / (1.0 + 3.5 * ai))
                    * (z - nodes[i - 2])
                    / (1.0 + 0.3 * alpha);
            }
            let mut converged = false;
            let mut prev_dz = f64::INFINITY;
            for _ in 0..100 {
                let p = laguerre_general(n, alpha, z);
                // d/dx L_n^{(α)} = −L_{n−1}^{(α+1)}
                let dp = -laguerre_general(n - 1, alpha + 1.0, z);
                let dz = p / dp;
                z -= dz;
                if dz.abs() <= 1e-15 * z.abs()
                    // Newton has hit the f64 roundoff floor: the step is
                    // already tiny and no longer shrinking
                    || (dz.abs() >= prev_dz && prev_dz <= 1e-12 * z.abs())
                {
                    converged = true;
                    break;
                }
                prev_dz = dz.abs();
            }
            if !converged {
                return Err(QuadratureError::NodeNotConverged { order: n, index: i });
            }
            let e_next = laguerre_general(n + 1, alpha, z);
            nodes.push(z);
            weights.push(z / ((nf + 1.0) * e_next * e_next));
        }
        Ok(GaussLaguerre { nodes, weights })
    }

    /// ∫₀^∞ f(t) t e⁻ᵗ dt.
    pub fn integrate<R: Real>(&self, mut f: impl FnMut(R) -> R) -> R {
        let mut sum = R::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            sum = sum + R::of(w) * f(R::of(x));
        }
        sum
    }
}

/// Gauss–Laguerre rule for the weight t e⁻ᵗ at `prec` bits: hardware
/// nodes polished by a few multiprecision Newton steps.
#[derive(Clone, Debug)]
pub struct GaussLaguerreMp {
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
}

impl GaussLaguerreMp {
    pub fn new(n: usize, prec: u32) -> Result<Self, QuadratureError> {
        let seed = GaussLaguerre::new(n)?;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        // the recurrence evaluates with a relative roundoff floor of
        // roughly n·2^{−prec}, so Newton steps cannot be expected to
        // shrink below that
        let floor_shift = prec.saturating_sub(8 + n.ilog2()).max(8);
        for (i, &z0) in seed.nodes.iter().enumerate() {
            let mut z = Float::with_val(prec, z0);
            let mut converged = false;
            let mut prev_dz = Float::with_val(prec, f64::INFINITY);
            for _ in 0..60 {
                let p = laguerre_general_mp(n, 1, &z);
                let dp = -laguerre_general_mp(n - 1, 2, &z);
                let dz = p / dp;
                z -= &dz;
                let dz = dz.abs();
                let za = z.clone().abs();
                if dz <= za.clone() >> floor_shift
                    || (dz >= prev_dz && prev_dz <= za >> (prec / 2))
                {
                    converged = true;
                    break;
                }
                prev_dz = dz;
            }
            if !converged {
                return Err(QuadratureError::NodeNotConverged { order: n, index: i });
            }
            let e_next = laguerre_general_mp(n + 1, 1, &z);
            let w = z.clone() / (Float::with_val(prec, n as u32 + 1) * e_next.square());
            nodes.push(z);
            weights.push(w);
        }
        Ok(GaussLaguerreMp { nodes, weights })
    }

    pub fn integrate(&self, mut f: impl FnMut(&Float) -> Float) -> Float {
        let prec = self.nodes[0].prec();
        let mut sum = Float::with_val(prec, 0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(x);
        }
        sum
    }
}

fn laguerre_general_mp(n: usize, alpha: u32, x: &Float) -> Float {
    let prec = x.prec();
    let mut prev = Float::with_val(prec, 1);
    if n == 0 {
        return prev;
    }
    let mut cur = Float::with_val(prec, 1 + alpha) - x;
    for k in 1..n {
        let k = k as u32;
        let mut next = Float::with_val(prec, 2 * k + alpha + 1) - x;
        next *= &cur;
        next -= Float::with_val(prec, k + alpha) * &prev;
        next /= k + 1;
        prev = cur;
        cur = next;
    }
    cur
}

/// Adaptive Simpson on [a, b] with absolute tolerance `tol`.
pub fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, QuadratureError> {
    const MAX_DEPTH: usize = 60;
    fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), fm)
    }
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> Result<f64, QuadratureError> {
        if depth > MAX_DEPTH {
            return Err(QuadratureError::TooDeep(MAX_DEPTH));
        }
        let m = 0.5 * (a + b);
        let (left, flm) = simpson(f, a, fa, m, fm);
        let (right, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            Ok(left + right + delta / 15.0)
        } else {
            let half = 0.5 * tol;
            Ok(recurse(f, a, fa, m, fm, flm, left, half, depth + 1)?
                + recurse(f, m, fm, b, fb, frm, right, half, depth + 1)?)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, fm, whole, tol, 0)
}
