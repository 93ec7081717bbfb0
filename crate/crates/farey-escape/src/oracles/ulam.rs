//! Ulam discretization of the open Farey transfer operator on a
//! uniform partition of [0,1]: per-bin stratified sampling pushes mass
//! forward through the map with the survival factor (1 − ξ) or
//! (1 − χ_{[0,ε)}) applied at the source, giving a sparse
//! column-stochastic (before killing) matrix whose dominant eigenvalue
//! approximates λ of the open system in x-space.

use super::mc::HoleMode;
use super::{farey, OracleError};
use crate::spectral::{power_iteration, SpectralResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct UlamConfig {
    /// Uniform bins over [0,1].
    pub bins: usize,
    pub hole_mode: HoleMode,
    /// Stratified sample points per source bin.
    pub samples_per_bin: usize,
}

impl UlamConfig {
    pub fn validate(&self) -> Result<(), OracleError> {
        if self.bins < 16 {
            return Err(OracleError::Config(format!("need at least 16 bins, got {}", self.bins)));
        }
        if self.samples_per_bin == 0 {
            return Err(OracleError::Config("samples_per_bin must be positive".into()));
        }
        if let HoleMode::Indicator(eps) = self.hole_mode {
            if eps >= 0.5 {
                return Err(OracleError::Config(format!(
                    "indicator hole needs eps < 1/2, got {eps}"
                )));
            }
        }
        Ok(())
    }
}

/// Per-source-bin transition lists (target bin, weight); weights per
/// source sum to the surviving fraction of that bin's mass.
pub fn ulam_matrix(cfg: &UlamConfig) -> Result<Vec<Vec<(usize, f64)>>, OracleError> {
    cfg.validate()?;
    let bins = cfg.bins;
    let s = cfg.samples_per_bin;
    let cols: Vec<Vec<(usize, f64)>> = (0..bins)
        .into_par_iter()
        .map(|i| {
            let mut acc: Vec<(usize, f64)> = Vec::new();
            for q in 0..s {
                let x = (i as f64 + (q as f64 + 0.5) / s as f64) / bins as f64;
                let weight = match &cfg.hole_mode {
                    HoleMode::Indicator(eps) => {
                        if x < *eps {
                            0.0
                        } else {
                            1.0
                        }
                    }
                    HoleMode::Smooth(h) => 1.0 - h.xi::<f64>(x),
                };
                if weight == 0.0 {
                    continue;
                }
                let fx = farey(x).expect("sample in [0,1]");
                let target = ((fx * bins as f64) as usize).min(bins - 1);
                match acc.iter_mut().find(|(t, _)| *t == target) {
                    Some((_, w)) => *w += weight / s as f64,
                    None => acc.push((target, weight / s as f64)),
                }
            }
            acc
        })
        .collect();
    Ok(cols)
}

/// Dominant eigenvalue of the Ulam matrix.
pub fn ulam_eigenvalue(cfg: &UlamConfig) -> Result<SpectralResult, OracleError> {
    let cols = ulam_matrix(cfg)?;
    let bins = cfg.bins;
    let (result, _) = power_iteration(
        bins,
        |v, dst| {
            dst.iter_mut().for_each(|d| *d = 0.0);
            for (src, col) in cols.iter().enumerate() {
                let vs = v[src];
                if vs != 0.0 {
                    for &(target, w) in col {
                        dst[target] += w * vs;
                    }
                }
            }
        },
        1e-11,
        500_000,
    )?;
    Ok(result)
}
