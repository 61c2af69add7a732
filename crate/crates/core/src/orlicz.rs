//! ψ_α Orlicz norms, `‖X‖_ψα = inf{C > 0 : E exp((|X|/C)^α) − 1 ≤ 1}`.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-6;
const MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormSource {
    Analytic,
    /// Closed-form upper bound rather than the norm itself.
    AnalyticBound,
    Empirical,
    /// ‖XY‖_ψ1 ≤ ‖X‖_ψ2 ‖Y‖_ψ2
    ProductBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrliczNorm {
    pub alpha: f64,
    pub value: f64,
    pub source: NormSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_count: Option<usize>,
}

impl OrliczNorm {
    pub fn analytic(alpha: f64, value: f64) -> Self {
        Self { alpha, value, source: NormSource::Analytic, sample_count: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// X ≡ c.
    Constant { c: f64 },
    /// X = ±c with equal probability.
    SymmetricSign { c: f64 },
    /// X ~ N(0, σ²).
    Gaussian { sigma: f64 },
    /// |X| ≤ b almost surely.
    Bounded { b: f64 },
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must be a positive finite number, got {alpha}")))
    }
}

/// ψ_α(x) = exp(x^α) − 1.
#[inline]
pub fn psi(alpha: f64, x: f64) -> f64 {
    x.powf(alpha).exp_m1()
}

pub fn psi_norm_analytic(family: Family, alpha: f64) -> Result<OrliczNorm> {
    check_alpha(alpha)?;
    let ln2 = std::f64::consts::LN_2;
    match family {
        Family::Constant { c } | Family::SymmetricSign { c } => {
            if !c.is_finite() {
                return Err(Error::Domain(format!("magnitude must be finite, got {c}")));
            }
            Ok(OrliczNorm::analytic(alpha, c.abs() / ln2.powf(1.0 / alpha)))
        }
        Family::Bounded { b } => {
            if !(b >= 0.0) || !b.is_finite() {
                return Err(Error::Domain(format!("bound must be finite and nonnegative, got {b}")));
            }
            Ok(OrliczNorm {
                source: NormSource::AnalyticBound,
                ..OrliczNorm::analytic(alpha, b / ln2.powf(1.0 / alpha))
            })
        }
        Family::Gaussian { sigma } => {
            if !(sigma >= 0.0) || !sigma.is_finite() {
                return Err(Error::Domain(format!("sigma must be finite and nonnegative, got {sigma}")));
            }
            if alpha != 2.0 {
                return Err(Error::Unsupported(format!(
                    "closed-form Gaussian norm is only available for alpha = 2, got {alpha}"
                )));
            }
            // (1 − 2σ²/C²)^{-1/2} = 2
            Ok(OrliczNorm::analytic(alpha, sigma * (8.0f64 / 3.0).sqrt()))
        }
    }
}

/// Log-scale bisection for the root of `mean(C) = 1` inside `[lo, hi]`,
/// where `mean` is decreasing; returns the upper end of the final bracket.
fn bisect_norm(mut lo: f64, mut hi: f64, tol: f64, mean: impl Fn(f64) -> f64) -> Result<f64> {
    for _ in 0..MAX_ITER {
        if hi <= lo * (1.0 + tol) {
            return Ok(hi);
        }
        let mid = (lo * hi).sqrt();
        if mean(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::Convergence(format!(
        "bisection bracket [{lo}, {hi}] did not reach relative tolerance {tol} in {MAX_ITER} steps"
    )))
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("tolerance must be positive, got {tol}")))
    }
}

/// Empirical ψ_α norm of `samples` (absolute values are used).
///
/// The bracket `[max/(ln(n+1))^{1/α}, max/(ln 2)^{1/α}]` always contains the
/// norm: at the left end the largest sample alone makes the mean at least 1,
/// at the right end every term is at most 1. Bisection runs on a log scale
/// and returns the upper end once the bracket is within `tol`.
pub fn psi_norm_empirical(samples: &[f64], alpha: f64, tol: f64) -> Result<OrliczNorm> {
    check_alpha(alpha)?;
    check_tol(tol)?;
    if samples.is_empty() {
        return Err(Error::Domain("empty sample".into()));
    }
    if let Some(x) = samples.iter().find(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("non-finite sample {x}")));
    }
    let abs: Vec<f64> = samples.iter().map(|x| x.abs()).collect();
    let n = abs.len();
    let max = abs.iter().copied().fold(0.0, f64::max);
    let done = |value| OrliczNorm { alpha, value, source: NormSource::Empirical, sample_count: Some(n) };
    if max == 0.0 {
        return Ok(done(0.0));
    }
    let lo = max / ((n as f64 + 1.0).ln()).powf(1.0 / alpha);
    let hi = max / std::f64::consts::LN_2.powf(1.0 / alpha);
    let mean = |c: f64| abs.iter().map(|&x| psi(alpha, x / c)).sum::<f64>() / n as f64;
    Ok(done(bisect_norm(lo, hi, tol, mean)?))
}

/// Exact ψ_α norm of a finitely supported law given as `(value, probability)` atoms.
pub fn psi_norm_atoms(atoms: &[(f64, f64)], alpha: f64, tol: f64) -> Result<OrliczNorm> {
    check_alpha(alpha)?;
    check_tol(tol)?;
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    if atoms.iter().any(|&(x, q)| !x.is_finite() || !(q >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("atoms must be finite with probabilities summing to 1 (sum {total})")));
    }
    let done = |value| OrliczNorm::analytic(alpha, value);
    let Some((top, q)) = atoms.iter().filter(|a| a.1 > 0.0).map(|&(x, q)| (x.abs(), q)).max_by(|a, b| a.0.total_cmp(&b.0))
    else {
        return Err(Error::Domain("no atom has positive probability".into()));
    };
    if top == 0.0 {
        return Ok(done(0.0));
    }
    // the top atom alone reaches 1 at the left end
    let lo = top / (1.0 + 1.0 / q).ln().powf(1.0 / alpha);
    let hi = top / std::f64::consts::LN_2.powf(1.0 / alpha);
    let mean = |c: f64| atoms.iter().map(|&(x, q)| q * psi(alpha, x.abs() / c)).sum::<f64>();
    Ok(done(bisect_norm(lo, hi, tol, mean)?))
}

/// Complex samples are reduced to their moduli.
pub fn psi_norm_empirical_complex(samples: &[Complex<f64>], alpha: f64, tol: f64) -> Result<OrliczNorm> {
    let moduli: Vec<f64> = samples.iter().map(|z| z.norm()).collect();
    psi_norm_empirical(&moduli, alpha, tol)
}

/// ‖XY‖_ψ1 ≤ ‖X‖_ψ2 ‖Y‖_ψ2.
pub fn psi_product_bound(x: &OrliczNorm, y: &OrliczNorm) -> Result<OrliczNorm> {
    if x.alpha != 2.0 || y.alpha != 2.0 {
        return Err(Error::Domain(format!(
            "product bound needs two ψ2 norms, got alpha = {} and {}",
            x.alpha, y.alpha
        )));
    }
    Ok(OrliczNorm { alpha: 1.0, value: x.value * y.value, source: NormSource::ProductBound, sample_count: None })
}

/// P(|X| ≥ u) ≤ 2 exp(−(u/‖X‖_ψα)^α), clipped to [0, 1].
pub fn psi_tail_envelope(norm: &OrliczNorm, u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::Domain(format!("threshold must be nonnegative, got {u}")));
    }
    if norm.value == 0.0 {
        return Ok(if u > 0.0 { 0.0 } else { 1.0 });
    }
    Ok((2.0 * (-(u / norm.value).powf(norm.alpha)).exp()).min(1.0))
}

/// Whitespace- or newline-separated decimal numbers.
pub fn read_samples_text(text: &str) -> Result<Vec<f64>> {
    text.split_whitespace()
        .enumerate()
        .map(|(i, tok)| tok.parse::<f64>().map_err(|e| Error::Domain(format!("sample {i} ({tok:?}): {e}"))))
        .collect()
}

/// Packed little-endian f64 values.
pub fn read_samples_f64_le(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.len() % 8 != 0 {
        return Err(Error::Domain(format!("{} bytes is not a whole number of f64 values", bytes.len())));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}
