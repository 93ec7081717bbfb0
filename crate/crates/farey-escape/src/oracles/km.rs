//! The piecewise-linear Markov model of the Farey map: the top branch
//! is 2 − 2x on [1/2, 1]; on [1/(n+1), 1/n] (n ≥ 2) the map is the
//! affine bijection (n+1)/(n−1)·x − 1/(n(n−1)) onto [1/n, 1/(n−1)].
//! With the hole [0, 1/n) the surviving partition cells form an exact
//! finite Markov chain, so the open transfer operator restricted to
//! piecewise-constant densities is a small matrix whose dominant
//! eigenvalue is exact up to the eigensolve.

use super::OracleError;
use crate::spectral::power_iteration;

pub fn km_map(x: f64) -> Result<f64, OracleError> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(OracleError::Domain(x));
    }
    if x >= 0.5 {
        return Ok(2.0 - 2.0 * x);
    }
    // cell index n ≥ 2 with 1/(n+1) < x <= 1/n
    let n = (1.0 / x).floor();
    Ok((n + 1.0) / (n - 1.0) * x - 1.0 / (n * (n - 1.0)))
}

/// Dominant eigenvalue of the open transfer operator with hole
/// H = [0, 1/n_hole), on piecewise-constant functions over the
/// surviving cells {(1/2,1)} ∪ {(1/(k+1),1/k)}_{2 ≤ k < n_hole}.
///
/// Cell 1 is (1/2, 1); cell k is (1/(k+1), 1/k). Every point has its
/// top-branch preimage in cell 1 (weight 1/2), and points in cell j
/// have a second preimage in cell j+1 through the branch of slope
/// (j+2)/j (weight j/(j+2)), giving
/// (Lv)_j = v_1/2 + (j/(j+2))·v_{j+1}.
pub fn km_open_eigenvalue(n_hole: usize) -> Result<f64, OracleError> {
    if n_hole < 2 {
        return Err(OracleError::Config(format!(
            "hole index must be at least 2, got {n_hole}"
        )));
    }
    let n = n_hole - 1; // surviving cells 1..=n
    if n == 1 {
        // single 1×1 case: L = [1/2]
        return Ok(0.5);
    }
    let (result, _) = power_iteration(
        n,
        |v, dst| {
            for j in 1..=n {
                let mut acc = v[0] / 2.0;
                if j + 1 <= n {
                    acc += (j as f64) / (j as f64 + 2.0) * v[j];
                }
                dst[j - 1] = acc;
            }
        },
        1e-14,
        100_000,
    )?;
    Ok(result.lambda)
}
