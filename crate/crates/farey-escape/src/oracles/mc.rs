//! Seeded Monte Carlo survival runs: Lebesgue-distributed initial
//! conditions, killed on entering the hole (indicator mode) or with
//! probability ξ_μ(x) per step (smooth mode), then iterated. The decay
//! rate comes from a log-linear fit over the tail of the survival
//! fractions.

use super::{farey, km_map, OracleError};
use crate::holes::HoleParams;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Farey,
    Km,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HoleMode {
    /// Sharp hole [0, ε); ε = 0 means no hole at all.
    Indicator(f64),
    /// Per-step killing probability ξ_μ(x, a).
    Smooth(HoleParams),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurvivalEstimate {
    pub n_steps: usize,
    pub samples: usize,
    /// Survival fraction after each step, nonincreasing.
    pub p_n: Vec<f64>,
    /// Tail-window log-linear decay rate of p_n.
    pub gamma_hat: f64,
    /// Standard error of the fitted rate from binomial counts.
    pub stderr: f64,
}

const CHUNK: usize = 1 << 14;

/// Survivor counts per step for one seeded stream of `count` samples.
fn run_chunk(
    map: MapKind,
    hole: &HoleMode,
    n_steps: usize,
    count: usize,
    rng: &mut impl RngCore,
) -> Vec<u64> {
    let mut survivors = vec![0u64; n_steps];
    for _ in 0..count {
        let mut x: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        for slot in survivors.iter_mut() {
            let killed = match hole {
                HoleMode::Indicator(eps) => x < *eps,
                HoleMode::Smooth(h) => rng.gen_range(0.0..1.0) < h.xi(x),
            };
            if killed {
                break;
            }
            *slot += 1;
            x = match map {
                MapKind::Farey => farey(x).expect("iterate stays in [0,1]"),
                MapKind::Km => km_map(x).expect("iterate stays in (0,1]"),
            };
            // the top branches can land exactly on 0; park such orbits
            // at the fixed point rather than leaving the domain
            if x <= 0.0 {
                x = f64::MIN_POSITIVE;
            }
        }
    }
    survivors
}

/// Survival fractions p_1..p_n and a fitted decay rate; deterministic
/// for a given seed (chunked ChaCha streams, order-independent integer
/// reduction).
pub fn mc_survival(
    map: MapKind,
    hole: HoleMode,
    n_steps: usize,
    samples: usize,
    seed: u64,
) -> Result<SurvivalEstimate, OracleError> {
    if n_steps < 2 || samples == 0 {
        return Err(OracleError::Config(format!(
            "need n_steps >= 2 and samples > 0, got {n_steps}, {samples}"
        )));
    }
    if let HoleMode::Indicator(eps) = hole {
        if eps >= 0.5 {
            return Err(OracleError::Config(format!("indicator hole needs eps < 1/2, got {eps}")));
        }
    }
    let n_chunks = samples.div_ceil(CHUNK);
    let counts: Vec<u64> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64 + 1);
            let count = CHUNK.min(samples - c * CHUNK);
            run_chunk(map, &hole, n_steps, count, &mut rng)
        })
        .reduce(
            || vec![0u64; n_steps],
            |mut acc, part| {
                for (a, p) in acc.iter_mut().zip(&part) {
                    *a += p;
                }
                acc
            },
        );
    let p_n: Vec<f64> = counts.iter().map(|&c| c as f64 / samples as f64).collect();

    // fit window: the last half of the steps
    let window_start = n_steps / 2;
    if let Some(dead) = p_n.iter().position(|&p| p == 0.0) {
        if dead <= window_start {
            return Err(OracleError::AllDead(dead + 1));
        }
    }
    let window: Vec<(f64, f64, f64)> = p_n
        .iter()
        .enumerate()
        .skip(window_start)
        .filter(|(_, &p)| p > 0.0)
        .map(|(i, &p)| {
            let var_logp = (1.0 - p) / (p * samples as f64); // delta method
            ((i + 1) as f64, p.ln(), var_logp)
        })
        .collect();
    let (gamma_hat, stderr) = if window.len() < 2 {
        (0.0, 0.0)
    } else {
        let n = window.len() as f64;
        let mean_x: f64 = window.iter().map(|w| w.0).sum::<f64>() / n;
        let sxx: f64 = window.iter().map(|w| (w.0 - mean_x).powi(2)).sum();
        let mean_y: f64 = window.iter().map(|w| w.1).sum::<f64>() / n;
        let slope: f64 =
            window.iter().map(|w| (w.0 - mean_x) * (w.1 - mean_y)).sum::<f64>() / sxx;
        let var_slope: f64 = window
            .iter()
            .map(|w| ((w.0 - mean_x) / sxx).powi(2) * w.2)
            .sum();
        (-slope, var_slope.sqrt())
    };
    Ok(SurvivalEstimate { n_steps, samples, p_n, gamma_hat, stderr })
}
