//! Independent cross-checks for the Laguerre pipeline: the maps
//! themselves, the exact piecewise-linear Markov model, Monte Carlo
//! survival runs, an Ulam discretization on [0,1], and the
//! Borel-transform identity in function space.

mod borel;
mod km;
mod mc;
mod ulam;

pub use borel::{borel_identity_check, borel_transform_mp};
pub use km::{km_map, km_open_eigenvalue};
pub use mc::{mc_survival, HoleMode, MapKind, SurvivalEstimate};
pub use ulam::{ulam_eigenvalue, ulam_matrix, UlamConfig};

use crate::operator::OperatorError;
use crate::quadrature::QuadratureError;
use crate::spectral::SpectralError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("argument {0} outside the map domain")]
    Domain(f64),
    #[error("all samples dead at step {0}, before the fit window")]
    AllDead(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// The Farey map: x/(1−x) on [0,1/2], (1−x)/x on [1/2,1]. Indifferent
/// fixed point at 0.
pub fn farey(x: f64) -> Result<f64, OracleError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(OracleError::Domain(x));
    }
    Ok(if x <= 0.5 { x / (1.0 - x) } else { (1.0 - x) / x })
}
