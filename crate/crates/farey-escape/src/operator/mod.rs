//! Matrix assembly for the closed operator M + N and the open operator
//! A_μ in the Laguerre basis.
//!
//! Closed entries are exact dyadic rationals, evaluated with integer
//! arithmetic and rounded once. Open entries add an Erf-damped copy of
//! the multiplication part and a triple series whose terms grow like
//! μ^{2n+1}(1+|a|)^{2n+1}/n! before factorial decay sets in; they are
//! summed at an elevated internal precision (requested bits plus a
//! cancellation guard) and rounded back, so that the returned values
//! are accurate at the requested precision regardless of intermediate
//! cancellation.

mod open;

pub use crate::specialfn::Precision;
pub use open::{open_entry, open_entry_mp, OpenAssembler};

use crate::holes::HoleParams;
use crate::specialfn::ln_gamma;
use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("series for entry ({j},{nu}) hit the cap of {n_cap} terms; partial sum {partial}, last term magnitude {last_term}")]
    NonConvergent { j: usize, nu: usize, n_cap: usize, partial: f64, last_term: f64 },
    #[error("open matrix requested without hole parameters")]
    MissingHole,
    #[error("truncation size must be at least 2, got {0}")]
    Size(usize),
    #[error("invalid series control: {0}")]
    Control(String),
}

/// Truncation and precision policy for the open-entry series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    /// Hard cap on the outer series index n.
    pub n_cap: usize,
    /// Relative magnitude below which terms count as negligible.
    pub rel_tol: f64,
    /// Number of consecutive negligible terms required to stop.
    pub consecutive_small: usize,
    /// Requested precision of the returned entries.
    pub precision: Precision,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            n_cap: 2000,
            rel_tol: 1e-30,
            consecutive_small: 3,
            precision: Precision::default(),
        }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<(), OperatorError> {
        if self.n_cap < 1 {
            return Err(OperatorError::Control("n_cap must be >= 1".into()));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(OperatorError::Control(format!(
                "rel_tol must lie in (0,1), got {}",
                self.rel_tol
            )));
        }
        if self.consecutive_small < 1 {
            return Err(OperatorError::Control("consecutive_small must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Closed,
    Open,
}

/// Dense north-west corner truncation with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct OperatorMatrix {
    pub size: usize,
    pub kind: MatrixKind,
    pub hole: Option<HoleParams>,
    pub series: Option<SeriesControl>,
    entries: Vec<f64>,
}

impl OperatorMatrix {
    /// Wrap raw row-major entries; for oracles and tests that need a
    /// matrix not produced by [`build_matrix`].
    pub fn from_raw(size: usize, kind: MatrixKind, entries: Vec<f64>) -> Self {
        assert_eq!(entries.len(), size * size);
        OperatorMatrix { size, kind, hole: None, series: None, entries }
    }

    pub fn get(&self, j: usize, nu: usize) -> f64 {
        self.entries[j * self.size + nu]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Leading n×n block, inheriting the metadata.
    pub fn corner(&self, n: usize) -> OperatorMatrix {
        assert!(n <= self.size);
        let mut entries = Vec::with_capacity(n * n);
        for j in 0..n {
            entries.extend_from_slice(&self.entries[j * self.size..j * self.size + n]);
        }
        OperatorMatrix { size: n, entries, ..self.clone() }
    }

    /// Plain comma-separated grid, one matrix row per line, entries in
    /// shortest round-trip decimal form.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for j in 0..self.size {
            let row: Vec<String> =
                (0..self.size).map(|nu| format!("{}", self.get(j, nu))).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serialization")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// JSON shape: entries as decimal strings (shortest round-trip form),
/// so the file reproduces the doubles bit-exactly.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    size: usize,
    kind: MatrixKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    hole: Option<HoleParams>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    series: Option<SeriesControl>,
    entries: Vec<String>,
}

impl TryFrom<MatrixRepr> for OperatorMatrix {
    type Error = String;
    fn try_from(r: MatrixRepr) -> Result<Self, String> {
        if r.entries.len() != r.size * r.size {
            return Err(format!(
                "entry count {} does not match size {}",
                r.entries.len(),
                r.size
            ));
        }
        let entries = r
            .entries
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| format!("bad entry {s:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        if entries.iter().any(|x| !x.is_finite()) {
            return Err("non-finite entry".into());
        }
        Ok(OperatorMatrix { size: r.size, kind: r.kind, hole: r.hole, series: r.series, entries })
    }
}

impl From<OperatorMatrix> for MatrixRepr {
    fn from(m: OperatorMatrix) -> Self {
        MatrixRepr {
            size: m.size,
            kind: m.kind,
            hole: m.hole,
            series: m.series,
            entries: m.entries.iter().map(|x| format!("{x}")).collect(),
        }
    }
}

/// Exact value of the multiplication-part entry,
/// (M e_ν, e_j)/(j+1) = C(ν+j+1, ν) / 2^{ν+j+2}.
pub(crate) fn closed_m_rational(j: usize, nu: usize) -> Rational {
    let b = Integer::from((nu + j + 1) as u64).binomial(nu as u32);
    Rational::from((b, Integer::from(1) << (nu + j + 2) as u32))
}

/// Exact value of the convolution-part entry,
/// Σ_{ℓ=0}^{ν} (−1)^ℓ C(ν+1, ν−ℓ) C(ℓ+j+1, ℓ) / 2^{ℓ+j+2}.
/// The alternating sum cancels by many orders of magnitude for large
/// indices, hence integer arithmetic rather than floats.
pub(crate) fn closed_n_rational(j: usize, nu: usize) -> Rational {
    // Common denominator 2^{ν+j+2}: term ℓ contributes
    // (−1)^ℓ C(ν+1, ν−ℓ) C(ℓ+j+1, ℓ) 2^{ν−ℓ}.
    let mut num = Integer::ZERO;
    for l in 0..=nu {
        let mut t = Integer::from((nu + 1) as u64).binomial((nu - l) as u32);
        t *= Integer::from((l + j + 1) as u64).binomial(l as u32);
        t <<= (nu - l) as u32;
        if l % 2 == 0 {
            num += t;
        } else {
            num -= t;
        }
    }
    Rational::from((num, Integer::from(1) << (nu + j + 2) as u32))
}

pub fn closed_m_entry(j: usize, nu: usize) -> f64 {
    closed_m_rational(j, nu).to_f64()
}

pub fn closed_n_entry(j: usize, nu: usize) -> f64 {
    closed_n_rational(j, nu).to_f64()
}

/// μ → 0⁺ limit of the open entry: the series vanishes with μ and the
/// Erf factor tends to 1, leaving half the multiplication part plus the
/// untouched convolution part.
pub fn open_entry_mu_limit(j: usize, nu: usize) -> f64 {
    let half = Rational::from((1, 2));
    (closed_m_rational(j, nu) * half + closed_n_rational(j, nu)).to_f64()
}

/// Constant of the convergence-bound diagnostic: c = 16μ/|a| when
/// |a| ≤ 1, else 16μ|a|.
pub fn appendix_constant(hole: &HoleParams) -> f64 {
    let a = hole.a().abs();
    assert!(a != 0.0, "bound constant undefined at a = 0");
    if a <= 1.0 {
        16.0 * hole.mu() / a
    } else {
        16.0 * hole.mu() * a
    }
}

/// Natural log of the bound term (2n+1) c^{2n+1} / n!; the terms
/// overflow doubles long before the factorial wins, so diagnostics
/// work in log space.
pub fn appendix_bound_ln(hole: &HoleParams, n: usize) -> f64 {
    let c = appendix_constant(hole);
    let np = (2 * n + 1) as f64;
    np.ln() + np * c.ln() - ln_gamma(n as f64 + 1.0)
}

/// The bound term itself; +∞ where it exceeds the double range (see
/// [`appendix_bound_ln`]). Diagnostic only — never a stopping rule.
pub fn appendix_bound_diagnostic(hole: &HoleParams, n: usize) -> f64 {
    appendix_bound_ln(hole, n).exp()
}

/// Supported parameter box; construction outside it only warns, since
/// the series machinery degrades gracefully rather than failing hard.
fn warn_outside_box(size: usize, hole: Option<&HoleParams>) {
    if size > 512 {
        log::warn!("truncation size {size} exceeds the supported box (N <= 512)");
    }
    if let Some(h) = hole {
        if h.mu() > 3.5 {
            log::warn!("mu = {} exceeds the supported box (mu <= 3.5)", h.mu());
        }
        if h.epsilon() < -1e4 {
            log::warn!("epsilon = {} below the supported box (epsilon >= -1e4)", h.epsilon());
        }
    }
}

/// Dense N×N truncation of the requested operator.
pub fn build_matrix(
    size: usize,
    kind: MatrixKind,
    hole: Option<HoleParams>,
    ctl: Option<SeriesControl>,
) -> Result<OperatorMatrix, OperatorError> {
    if size < 2 {
        return Err(OperatorError::Size(size));
    }
    warn_outside_box(size, hole.as_ref());
    match kind {
        MatrixKind::Closed => {
            let mut entries = Vec::with_capacity(size * size);
            for j in 0..size {
                for nu in 0..size {
                    entries.push(
                        (closed_m_rational(j, nu) + closed_n_rational(j, nu)).to_f64(),
                    );
                }
            }
            Ok(OperatorMatrix { size, kind, hole: None, series: None, entries })
        }
        MatrixKind::Open => {
            let hole = hole.ok_or(OperatorError::MissingHole)?;
            let ctl = ctl.unwrap_or_default();
            ctl.validate()?;
            let assembler = OpenAssembler::new(hole, ctl, size)?;
            let entries = assembler.matrix_f64();
            Ok(OperatorMatrix { size, kind, hole: Some(hole), series: Some(ctl), entries })
        }
    }
}

/// Test hook: run the open-entry code path with the hole contribution
/// switched off; the result must coincide with the closed matrix.
#[doc(hidden)]
pub fn build_matrix_hole_zeroed(
    size: usize,
    hole: HoleParams,
    ctl: SeriesControl,
) -> Result<OperatorMatrix, OperatorError> {
    if size < 2 {
        return Err(OperatorError::Size(size));
    }
    ctl.validate()?;
    let assembler = OpenAssembler::new_hole_zeroed(hole, ctl, size)?;
    let entries = assembler.matrix_f64();
    Ok(OperatorMatrix {
        size,
        kind: MatrixKind::Open,
        hole: Some(hole),
        series: Some(ctl),
        entries,
    })
}
