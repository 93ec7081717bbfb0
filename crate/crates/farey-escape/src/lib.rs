//! Escape rates for the Farey map with real-analytic approximated holes.
//!
//! The closed Farey transfer operator is conjugated to `M + N` on the
//! weighted space `L²(t e⁻ᵗ dt)` and matricized in the Laguerre basis
//! `e_ν`. Replacing the indicator of a hole `[0, ε)` by the error-function
//! family `ξ_μ` yields an open operator whose matrix entries are an
//! Erf-damped multiplication term plus a triple series with terminating
//! Gauss hypergeometric factors. This crate assembles those matrices at
//! arbitrary working precision, extracts principal eigenvalues of
//! north-west corner truncations, forms normalized escape rates
//! `γ_μ(ε) = −log(λ_μ(ε)/λ_∞)`, and cross-checks every stage against
//! independent oracles: direct quadrature, an Ulam discretization on
//! `[0,1]`, seeded Monte Carlo survival runs, and the exact piecewise
//! linear Markov model.

pub mod holes;
pub mod operator;
pub mod oracles;
pub mod quadrature;
pub mod real;
pub mod specialfn;
pub mod spectral;

pub use holes::{HoleMeasure, HoleParams};
pub use operator::{MatrixKind, OperatorMatrix, Precision, SeriesControl};
pub use real::{Real, Scalar};
pub use spectral::{EscapeCurve, SpectralResult};
