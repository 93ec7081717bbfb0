//! The analytic hole family ξ_μ(x, a) = 1/2 − (1/2)Erf(μ(x − a)),
//! the reparametrization a = ε/(1−ε), and the closed-form hole measure
//! M_μ(ε) = ∫₀^∞ ξ_μ(x, a) dx over the whole positive half-line.

use crate::real::Real;
use crate::specialfn::erfc;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HoleError {
    #[error("steepness mu must be positive and finite, got {0}")]
    BadMu(f64),
    #[error("hole endpoint epsilon must be finite and < 1/2, got {0}")]
    BadEpsilon(f64),
}

/// Parameters of one approximated hole: nominal endpoint ε (negative
/// values are first-class — shrinking the hole means sending ε to −∞),
/// steepness μ, and the derived shift a = ε/(1−ε) ∈ (−1, 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HoleParamsRepr", into = "HoleParamsRepr")]
pub struct HoleParams {
    epsilon: f64,
    mu: f64,
}

#[derive(Serialize, Deserialize)]
struct HoleParamsRepr {
    epsilon: f64,
    mu: f64,
}

impl TryFrom<HoleParamsRepr> for HoleParams {
    type Error = String;
    fn try_from(r: HoleParamsRepr) -> Result<Self, String> {
        HoleParams::new(r.mu, r.epsilon).map_err(|e| e.to_string())
    }
}

impl From<HoleParams> for HoleParamsRepr {
    fn from(h: HoleParams) -> Self {
        HoleParamsRepr { epsilon: h.epsilon, mu: h.mu }
    }
}

impl HoleParams {
    pub fn new(mu: f64, epsilon: f64) -> Result<Self, HoleError> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(HoleError::BadMu(mu));
        }
        if !(epsilon.is_finite() && epsilon < 0.5) {
            return Err(HoleError::BadEpsilon(epsilon));
        }
        Ok(HoleParams { epsilon, mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The shift a = ε/(1−ε), always recomputed; lies in (−1, 1) for
    /// ε ∈ (−∞, 1/2).
    pub fn a(&self) -> f64 {
        self.epsilon / (1.0 - self.epsilon)
    }

    /// ξ_μ(x, a) = 1/2 − (1/2)Erf(μ(x − a)); smooth, strictly
    /// decreasing in x, values in (0, 1). Evaluated as erfc/2, which
    /// keeps full relative accuracy deep in the right tail.
    pub fn xi<R: Real>(&self, x: R) -> R {
        let arg = R::of(self.mu) * (x - R::of(self.a()));
        R::of(0.5) * erfc(arg).expect("finite xi argument")
    }

    /// Closed-form hole measure
    /// M = a − (a/2)·erfc(μa) + e^{−μ²a²}/(2μ√π),
    /// the primitive of erfc/2 evaluated across (0, ∞).
    pub fn measure<R: Real>(&self) -> HoleMeasure<R> {
        let a = R::of(self.a());
        let mu = R::of(self.mu);
        let half = R::of(0.5);
        let ma = mu * a;
        let value = a - a * half * erfc(ma).expect("finite measure argument")
            + (-ma * ma).exp() / ((mu + mu) * R::sqrt_pi());
        HoleMeasure { value }
    }
}

/// ∫₀^∞ ξ_μ(x, a) dx.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoleMeasure<R = crate::real::Scalar> {
    pub value: R,
}

/// Hole measure in the fully withdrawn limit ε → −∞ (a = −1):
/// M = e^{−μ²}/(2μ√π) − erfc(μ)/2, the floor value a curve at fixed μ
/// can never go below.
pub fn limit_measure<R: Real>(mu: f64) -> R {
    let mu = R::of(mu);
    (-mu * mu).exp() / ((mu + mu) * R::sqrt_pi())
        - R::of(0.5) * erfc(mu).expect("finite mu")
}

/// Convenience wrapper matching the library surface naming.
pub fn hole_measure(hole: &HoleParams) -> HoleMeasure {
    hole.measure()
}

#[cfg(test)]
mod tests;
