use std::f64::consts::{E, PI};

use super::{nonneg, order, positive, used, ConstantRegistry, ConstantsUsed, Envelope, MomentBound, TailBound, Threshold, KEY_UNION};
use crate::error::{Error, Result};
use crate::metric::{level_capacity, truncation_level};

/// Moments `(E|X|^p)^{1/p} ≤ a p^{1/α} + b` for all p ≥ 1 give
/// `P(|X| ≥ e^{1/α}(a u + b)) ≤ exp(−u^α/α)` for u ≥ 1.
pub fn moments_to_tails(a: f64, b: f64, alpha: f64) -> Result<TailBound> {
    positive("a", a)?;
    nonneg("b", b)?;
    positive("alpha", alpha)?;
    Ok(TailBound::new(
        "moments-to-tails",
        Threshold { leading: (1.0 / alpha).exp(), a0: b, a_half: 0.0, a1: a },
        Envelope::Stretched { prefactor: 1.0, rate: 1.0 / alpha, power: alpha },
        1.0,
        ConstantsUsed::new(),
    ))
}

/// Moments `≤ a1 p + a2 √p + a3` give `P(|X| ≥ e(a1 u + a2 √u + a3)) ≤ e^{−u}` for u ≥ 1.
pub fn moments_to_tails_mixed(a1: f64, a2: f64, a3: f64) -> Result<TailBound> {
    nonneg("a1", a1)?;
    nonneg("a2", a2)?;
    nonneg("a3", a3)?;
    Ok(TailBound::new(
        "moments-to-tails-mixed",
        Threshold { leading: E, a0: a3, a_half: a2, a1 },
        Envelope::Stretched { prefactor: 1.0, rate: 1.0, power: 1.0 },
        1.0,
        ConstantsUsed::new(),
    ))
}

/// Tail `P(|X| ≥ e^{1/α} a u) ≤ b e^{−u^α/α}` (u ≥ 0) gives
/// `(E|X|^p)^{1/p} ≤ e^{1/(2e)} a (√(2π/α) e^{α/12} b)^{1/p} p^{1/α}`.
pub fn tails_to_moments(a: f64, b: f64, alpha: f64, p: f64) -> Result<MomentBound> {
    nonneg("a", a)?;
    nonneg("b", b)?;
    positive("alpha", alpha)?;
    order(p)?;
    let value = (1.0 / (2.0 * E)).exp()
        * a
        * ((2.0 * PI / alpha).sqrt() * (alpha / 12.0).exp() * b).powf(1.0 / p)
        * p.powf(1.0 / alpha);
    Ok(MomentBound::new("tails-to-moments", p, vec![("tail", value)], ConstantsUsed::new()))
}

/// Tail `P(|X| ≥ a1 u + a2 √u) ≤ e^{−u}` (u ≥ 0) gives the two-term moment bound.
pub fn tails_to_moments_mixed(a1: f64, a2: f64, p: f64) -> Result<MomentBound> {
    nonneg("a1", a1)?;
    nonneg("a2", a2)?;
    order(p)?;
    let k = (1.0 / (2.0 * E)).exp();
    let linear = a1 * 2.0 * k * ((2.0 * PI).sqrt() * (1.0 / (12.0 * p)).exp()).powf(1.0 / p) * p / E;
    let sqrt = a2 * 2.0 / (2.0 * E).sqrt() * k * (PI.sqrt() * (1.0 / (6.0 * p)).exp()).powf(1.0 / p) * p.sqrt();
    Ok(MomentBound::new("tails-to-moments-mixed", p, vec![("linear", linear), ("sqrt", sqrt)], ConstantsUsed::new()))
}

/// `(E sup_t |X_t|^p)^{1/p} ≤ 2 sup_t (E|X_t|^p)^{1/p}` when |T| ≤ 2^{2^l}.
pub fn small_set_moment_bound(individual: &[f64], p: f64, set_size: usize) -> Result<MomentBound> {
    let l = truncation_level(p)?;
    let cap = level_capacity(l);
    if set_size == 0 || set_size > cap {
        return Err(Error::Domain(format!(
            "set size {set_size} must lie in 1..={cap} (2^(2^{l}) for p = {p})"
        )));
    }
    let mut max: f64 = 0.0;
    for &b in individual {
        max = max.max(nonneg("individual moment bound", b)?);
    }
    Ok(MomentBound::new("small-set", p, vec![("max-individual", 2.0 * max)], ConstantsUsed::new()))
}

/// `2 Σ_{n≥0} exp(2^n (2(ln 2 − 1) + 1/2))`, summed until the terms underflow.
pub fn union_bound_constant() -> f64 {
    let rate = 2.0 * (std::f64::consts::LN_2 - 1.0) + 0.5;
    let mut sum = 0.0;
    for n in 0..64 {
        let term = (2f64.powi(n) * rate).exp();
        if term == 0.0 {
            break;
        }
        sum += term;
    }
    2.0 * sum
}

/// `c exp(−p u^α / 4)` for u ≥ 2^{1/α}, with c from the registry. Not clipped.
pub fn union_bound_probability(alpha: f64, u: f64, p: f64, registry: &ConstantRegistry) -> Result<f64> {
    positive("alpha", alpha)?;
    order(p)?;
    let onset = 2f64.powf(1.0 / alpha);
    if !(u >= onset * (1.0 - 1e-12)) {
        return Err(Error::Domain(format!("union bound needs u >= 2^(1/alpha) = {onset}, got {u}")));
    }
    Ok(registry.get(KEY_UNION)?.value * (-p * u.powf(alpha) / 4.0).exp())
}

/// `(√(2π)/2) 2^{p/α} (2/α)^{p/α + 1/2} p^{1/2}`, the closed-form bound on
/// `∫_0^∞ p v^{p−1} exp(−p v^α/4) dv`.
///
/// The derivation bounds `E|g|^q ≤ q^{q/2}` with `q = 2p/α − 1`, which fails
/// for `0 < q < 0.434` and is undefined for `q < 0`; such (α, p) are refused.
pub fn lp_tail_integral_bound(alpha: f64, p: f64) -> Result<f64> {
    positive("alpha", alpha)?;
    order(p)?;
    let q = 2.0 * p / alpha - 1.0;
    if q.abs() > 1e-12 && q < 0.5 {
        return Err(Error::Domain(format!(
            "closed form needs 2p/alpha - 1 = 0 or >= 0.5 (alpha = {alpha}, p = {p})"
        )));
    }
    let r = p / alpha;
    Ok((2.0 * PI).sqrt() / 2.0 * 2f64.powf(r) * (2.0 / alpha).powf(r + 0.5) * p.sqrt())
}

/// c̃ = J^{1/p} with J from [`lp_tail_integral_bound`].
pub fn lp_constant(alpha: f64, p: f64) -> Result<f64> {
    Ok(lp_tail_integral_bound(alpha, p)?.powf(1.0 / p))
}

/// `P(ξ > γ u) ≤ c exp(−p u^α/4)` for u ≥ u* gives
/// `E ξ^p ≤ γ^p (c J + u*^p)`, hence `(E ξ^p)^{1/p} ≤ γ((cJ)^{1/p} + u*)`.
pub fn lp_from_tail(gamma: f64, c: f64, u_star: f64, alpha: f64, p: f64) -> Result<MomentBound> {
    nonneg("gamma", gamma)?;
    positive("c", c)?;
    positive("u_star", u_star)?;
    let j = lp_tail_integral_bound(alpha, p)?;
    Ok(MomentBound::new(
        "lp-from-tail",
        p,
        vec![("tail", gamma * (c * j).powf(1.0 / p)), ("onset", gamma * u_star)],
        ConstantsUsed::new(),
    ))
}

/// Bound on `(E sup |X_t − X_{π_l(t)}|^p)^{1/p}` from the chaining argument:
/// the union bound with constant c feeds [`lp_from_tail`] with
/// `γ = (1 + 2^{1/α}) γ_{α,p}` and `u* = 2^{1/α}`.
pub fn chaining_lp_bound(gamma_p: f64, alpha: f64, p: f64, registry: &ConstantRegistry) -> Result<MomentBound> {
    let c = registry.get(KEY_UNION)?;
    let scale = (1.0 + 2f64.powf(1.0 / alpha)) * nonneg("gamma", gamma_p)?;
    let mut b = lp_from_tail(scale, c.value, 2f64.powf(1.0 / alpha), alpha, p)?;
    b.name = "chaining-lp".into();
    b.constants_used = used([(KEY_UNION, c)]);
    b.fitted = c.fitted;
    Ok(b)
}
