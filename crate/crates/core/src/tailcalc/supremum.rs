use serde::{Deserialize, Serialize};

use super::{nonneg, order, positive, used, ConstantRegistry, ConstantsUsed, Envelope, MomentBound, TailBound, Threshold, KEY_C2, KEY_D2};
use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernsteinParams {
    pub sigma: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(default)]
    pub nu: f64,
    #[serde(default)]
    pub kappa: f64,
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BernsteinForm {
    /// Moment condition with (σ, K).
    MomentCondition,
    /// ψ₁ summands with (ν, κ).
    Psi1,
}

/// `P(|mean| ≥ (s/√m)√(2u) + (k/m) u) ≤ 2e^{−u}` with (s, k) = (σ, K) or (ν, κ).
pub fn bernstein_tail(params: &BernsteinParams, form: BernsteinForm) -> Result<TailBound> {
    if params.m == 0 {
        return Err(Error::Domain("sample count m must be at least 1".into()));
    }
    let (s, k) = match form {
        BernsteinForm::MomentCondition => (params.sigma, params.k),
        BernsteinForm::Psi1 => (params.nu, params.kappa),
    };
    nonneg("scale", s)?;
    nonneg("scale", k)?;
    let m = params.m as f64;
    Ok(TailBound::new(
        "bernstein",
        Threshold { leading: 1.0, a0: 0.0, a_half: s * 2f64.sqrt() / m.sqrt(), a1: k / m },
        Envelope::Stretched { prefactor: 2.0, rate: 1.0, power: 1.0 },
        0.0,
        ConstantsUsed::new(),
    ))
}

/// Moment form for ψ_α processes: `C_α γ_{α,p} + 2 sup_t (E|X_t − X_{t0}|^p)^{1/p}`.
pub fn psi_alpha_moment_bound(
    gamma_p: f64,
    sup_individual: f64,
    alpha: f64,
    p: f64,
    registry: &ConstantRegistry,
) -> Result<MomentBound> {
    order(p)?;
    let (c, _) = registry.chaining(alpha)?;
    let key = super::chaining_key('C', alpha);
    Ok(MomentBound::new(
        "psi-alpha-moment",
        p,
        vec![("gamma", c.value * nonneg("gamma", gamma_p)?), ("individual", 2.0 * nonneg("sup term", sup_individual)?)],
        used([(key.as_str(), c)]),
    ))
}

/// `D_α Δ p^{1/α}`, the individual-moment term implied by the increment condition.
pub fn psi_alpha_individual_term(diam: f64, alpha: f64, p: f64, registry: &ConstantRegistry) -> Result<f64> {
    order(p)?;
    let (_, d) = registry.chaining(alpha)?;
    Ok(d.value * nonneg("diameter", diam)? * p.powf(1.0 / alpha))
}

/// `P(sup |X_t − X_{t0}| ≥ e^{1/α}(C_α γ_α + u D_α Δ)) ≤ exp(−u^α/α)`, u ≥ 1.
pub fn psi_alpha_tail_bound(gamma: f64, diam: f64, alpha: f64, registry: &ConstantRegistry) -> Result<TailBound> {
    positive("alpha", alpha)?;
    let (c, d) = registry.chaining(alpha)?;
    Ok(TailBound::new(
        "psi-alpha-supremum",
        Threshold {
            leading: (1.0 / alpha).exp(),
            a0: c.value * nonneg("gamma", gamma)?,
            a_half: 0.0,
            a1: d.value * nonneg("diameter", diam)?,
        },
        Envelope::Stretched { prefactor: 1.0, rate: 1.0 / alpha, power: alpha },
        1.0,
        used([(super::chaining_key('C', alpha).as_str(), c), (super::chaining_key('D', alpha).as_str(), d)]),
    ))
}

/// Centered Gaussian process with weak variance σ²:
/// `P(sup |X_t| ≥ √e(C γ₂ + u D σ)) ≤ e^{−u²/2}`, u ≥ 1.
pub fn gaussian_tail_bound(gamma2: f64, sigma: f64, registry: &ConstantRegistry) -> Result<TailBound> {
    let mut b = psi_alpha_tail_bound(gamma2, sigma, 2.0, registry)?;
    b.name = "gaussian-supremum".into();
    Ok(b)
}

/// `(E sup |X_t|^p)^{1/p} ≤ C γ_{2,p} + D σ √p`.
pub fn gaussian_moment_bound(gamma2p: f64, sigma: f64, p: f64, registry: &ConstantRegistry) -> Result<MomentBound> {
    order(p)?;
    let (c, d) = (registry.get(KEY_C2)?, registry.get(KEY_D2)?);
    Ok(MomentBound::new(
        "gaussian-moment",
        p,
        vec![("gamma", c.value * nonneg("gamma", gamma2p)?), ("sigma", d.value * nonneg("sigma", sigma)? * p.sqrt())],
        used([(KEY_C2, c), (KEY_D2, d)]),
    ))
}

/// Uniform Azuma-Hoeffding: `P(sup |X_{t,n} − X_{t,0}| ≥ √e(C₂γ₂ + D₂Δu)) ≤ e^{−u²/2}`, u ≥ 1.
pub fn azuma_uniform_bound(gamma2: f64, diam: f64, registry: &ConstantRegistry) -> Result<TailBound> {
    let mut b = psi_alpha_tail_bound(gamma2, diam, 2.0, registry)?;
    b.name = "azuma-uniform".into();
    Ok(b)
}

/// Pair of metrics for a process with mixed subgaussian/subexponential increments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedTailMetrics {
    pub d1: FiniteMetricSpace,
    pub d2: FiniteMetricSpace,
}

impl MixedTailMetrics {
    pub fn new(d1: FiniteMetricSpace, d2: FiniteMetricSpace) -> Result<Self> {
        if d1.labels() != d2.labels() {
            return Err(Error::InvalidMetric("d1 and d2 must be defined on the same labels".into()));
        }
        Ok(Self { d1, d2 })
    }

    /// (Δ_{d1}, Δ_{d2}).
    pub fn diameters(&self) -> (f64, f64) {
        (self.d1.diameter(), self.d2.diameter())
    }
}

/// `P(sup ‖X_t − X_{t0}‖ ≥ C(γ₂(d₂) + γ₁(d₁)) + c(√u Δ₂ + u Δ₁)) ≤ e^{−u}`, u ≥ 1.
pub fn mixed_tail_bound(
    gamma2_d2: f64,
    gamma1_d1: f64,
    diam_d2: f64,
    diam_d1: f64,
    registry: &ConstantRegistry,
) -> Result<TailBound> {
    let (big, small) = (registry.get("mixed.C")?, registry.get("mixed.c")?);
    Ok(TailBound::new(
        "mixed-tail-supremum",
        Threshold {
            leading: 1.0,
            a0: big.value * (nonneg("gamma2", gamma2_d2)? + nonneg("gamma1", gamma1_d1)?),
            a_half: small.value * nonneg("diameter d2", diam_d2)?,
            a1: small.value * nonneg("diameter d1", diam_d1)?,
        },
        Envelope::Stretched { prefactor: 1.0, rate: 1.0, power: 1.0 },
        1.0,
        used([("mixed.C", big), ("mixed.c", small)]),
    ))
}

/// `C(γ₂(d₂) + γ₁(d₁)) + 2 sup_t (E‖X_t − X_{t0}‖^p)^{1/p}`.
pub fn mixed_tail_moment_bound(
    gamma2_d2: f64,
    gamma1_d1: f64,
    sup_individual: f64,
    p: f64,
    registry: &ConstantRegistry,
) -> Result<MomentBound> {
    order(p)?;
    let big = registry.get("mixed.C")?;
    Ok(MomentBound::new(
        "mixed-tail-moment",
        p,
        vec![
            ("gamma", big.value * (nonneg("gamma2", gamma2_d2)? + nonneg("gamma1", gamma1_d1)?)),
            ("individual", 2.0 * nonneg("sup term", sup_individual)?),
        ],
        used([("mixed.C", big)]),
    ))
}

/// Empirical process tail:
/// `P(sup |E_t| ≥ C(γ₂/√m + γ₁/m) + c(σ√u/√m + K u/m)) ≤ e^{−u}`, u ≥ 1.
pub fn empirical_process_bound(
    gamma2_d2: f64,
    gamma1_d1: f64,
    sigma: f64,
    k: f64,
    m: usize,
    registry: &ConstantRegistry,
) -> Result<TailBound> {
    if m == 0 {
        return Err(Error::Domain("sample count m must be at least 1".into()));
    }
    let m = m as f64;
    let (big, small) = (registry.get("empirical.C")?, registry.get("empirical.c")?);
    Ok(TailBound::new(
        "empirical-process",
        Threshold {
            leading: 1.0,
            a0: big.value * (nonneg("gamma2", gamma2_d2)? / m.sqrt() + nonneg("gamma1", gamma1_d1)? / m),
            a_half: small.value * nonneg("sigma", sigma)? / m.sqrt(),
            a1: small.value * nonneg("K", k)? / m,
        },
        Envelope::Stretched { prefactor: 1.0, rate: 1.0, power: 1.0 },
        1.0,
        used([("empirical.C", big), ("empirical.c", small)]),
    ))
}

/// Moment form of the empirical-process bound.
pub fn empirical_process_moment_bound(
    gamma2_d2: f64,
    gamma1_d1: f64,
    sigma: f64,
    k: f64,
    m: usize,
    p: f64,
    registry: &ConstantRegistry,
) -> Result<MomentBound> {
    order(p)?;
    if m == 0 {
        return Err(Error::Domain("sample count m must be at least 1".into()));
    }
    let m = m as f64;
    let (big, small) = (registry.get("empirical.C")?, registry.get("empirical.c")?);
    Ok(MomentBound::new(
        "empirical-process-moment",
        p,
        vec![
            ("gamma2", big.value * nonneg("gamma2", gamma2_d2)? / m.sqrt()),
            ("gamma1", big.value * nonneg("gamma1", gamma1_d1)? / m),
            ("sigma", small.value * p.sqrt() * nonneg("sigma", sigma)? / m.sqrt()),
            ("K", small.value * p * nonneg("K", k)? / m),
        ],
        used([("empirical.C", big), ("empirical.c", small)]),
    ))
}

/// Averages of squares:
/// `C(γ²_{2,p}/m + Δ° γ_{2,p}/√m + √p σ/√m + p K/m)`.
pub fn squares_moment_bound(
    gamma2p: f64,
    radius: f64,
    m: usize,
    sigma: f64,
    k: f64,
    p: f64,
    registry: &ConstantRegistry,
) -> Result<MomentBound> {
    order(p)?;
    if m == 0 {
        return Err(Error::Domain("sample count m must be at least 1".into()));
    }
    let c = registry.get("squares.C")?;
    let (g, m) = (nonneg("gamma", gamma2p)?, m as f64);
    Ok(MomentBound::new(
        "squares-moment",
        p,
        vec![
            ("gamma-squared", c.value * g * g / m),
            ("radius-gamma", c.value * nonneg("radius", radius)? * g / m.sqrt()),
            ("sigma", c.value * p.sqrt() * nonneg("sigma", sigma)? / m.sqrt()),
            ("K", c.value * p * nonneg("K", k)? / m),
        ],
        used([("squares.C", c)]),
    ))
}

/// `P(sup |A_t| ≥ C(γ₂²/m + Δ° γ₂/√m) + c(√u σ/√m + u K/m)) ≤ e^{−u}`, u ≥ 1.
pub fn squares_tail_bound(
    gamma2: f64,
    radius: f64,
    m: usize,
    sigma: f64,
    k: f64,
    registry: &ConstantRegistry,
) -> Result<TailBound> {
    if m == 0 {
        return Err(Error::Domain("sample count m must be at least 1".into()));
    }
    let (big, small) = (registry.get("squares.C")?, registry.get("squares.c")?);
    let (g, m) = (nonneg("gamma", gamma2)?, m as f64);
    Ok(TailBound::new(
        "squares-supremum",
        Threshold {
            leading: 1.0,
            a0: big.value * (g * g / m + nonneg("radius", radius)? * g / m.sqrt()),
            a_half: small.value * nonneg("sigma", sigma)? / m.sqrt(),
            a1: small.value * nonneg("K", k)? / m,
        },
        Envelope::Stretched { prefactor: 1.0, rate: 1.0, power: 1.0 },
        1.0,
        used([("squares.C", big), ("squares.c", small)]),
    ))
}

/// Default (σ, K) from ψ₂ norms `norms[t][i] = ‖X_{t_i}‖_ψ2`:
/// σ = sup_t (mean_i ‖X_{t_i}‖⁴)^{1/2}, K = sup_t max_i ‖X_{t_i}‖².
pub fn squares_default_params(norms: &[Vec<f64>]) -> Result<(f64, f64)> {
    let mut sigma: f64 = 0.0;
    let mut k: f64 = 0.0;
    for row in norms {
        if row.is_empty() {
            return Err(Error::Domain("every index point needs at least one summand".into()));
        }
        let mean4 = row.iter().map(|x| x.powi(4)).sum::<f64>() / row.len() as f64;
        sigma = sigma.max(mean4.sqrt());
        k = k.max(row.iter().map(|x| x * x).fold(0.0, f64::max));
    }
    Ok((sigma, k))
}

/// Explicit-constant tail of ‖X_t − X_s‖_{L²(μ_m)}:
/// `P(‖X_t − X_s‖ ≥ 2(1+√2) u d_ψ2(s,t)) ≤ 2 e^{−m u²}`, u ≥ 1.
pub fn l2_increment_tail(d_psi2: f64, m: usize) -> Result<TailBound> {
    if m == 0 {
        return Err(Error::Domain("sample count m must be at least 1".into()));
    }
    Ok(TailBound::new(
        "l2-increment",
        Threshold { leading: 1.0, a0: 0.0, a_half: 0.0, a1: 2.0 * (1.0 + 2f64.sqrt()) * nonneg("distance", d_psi2)? },
        Envelope::Stretched { prefactor: 2.0, rate: m as f64, power: 2.0 },
        1.0,
        ConstantsUsed::new(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    fn fitted() -> ConstantRegistry {
        ConstantRegistry::with_overrides([
            ("mixed.C", 1.0),
            ("mixed.c", 1.0),
            ("empirical.C", 1.0),
            ("empirical.c", 1.0),
            ("squares.C", 1.0),
            ("squares.c", 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn bernstein_example() {
        let p = BernsteinParams { sigma: 1.0, k: 1.0, nu: 0.0, kappa: 0.0, m: 100 };
        let b = bernstein_tail(&p, BernsteinForm::MomentCondition).unwrap();
        let pt = b.at(1.0).unwrap();
        assert_relative_eq!(pt.threshold, 0.151421356, epsilon = 1e-8);
        assert_relative_eq!(pt.envelope, 2.0 * (-1f64).exp());
        let z = b.at(0.0).unwrap();
        assert_eq!((z.threshold, z.envelope), (0.0, 1.0));
    }

    #[test]
    fn literature_constants() {
        let reg = ConstantRegistry::default();
        let t = psi_alpha_tail_bound(1.0, 1.0, 2.0, &reg).unwrap();
        assert_relative_eq!(t.at(1.0).unwrap().threshold, E.sqrt() * 95.0, epsilon = 1e-10);
        assert!(!t.fitted);
        let a = azuma_uniform_bound(1.0, 1.0, &reg).unwrap();
        assert_relative_eq!(a.at(2.0).unwrap().threshold, E.sqrt() * 104.0, epsilon = 1e-10);
        assert_eq!(azuma_uniform_bound(0.0, 0.0, &reg).unwrap().at(3.0).unwrap().threshold, 0.0);
        assert!(psi_alpha_tail_bound(1.0, 1.0, 1.0, &reg).is_err());
    }

    #[test]
    fn moment_decomposition_sums() {
        let reg = ConstantRegistry::default();
        let m = psi_alpha_moment_bound(0.5, 0.25, 2.0, 4.0, &reg).unwrap();
        assert_eq!(m.value, 86.0 * 0.5 + 0.5);
        assert_eq!(m.value, m.decomposition.iter().map(|(_, v)| v).sum::<f64>());
    }

    #[test]
    fn mixed_and_empirical_examples() {
        let reg = fitted();
        let b = mixed_tail_bound(1.0, 1.0, 1.0, 1.0, &reg).unwrap();
        let pt = b.at(1.0).unwrap();
        assert_eq!(pt.threshold, 4.0);
        assert_relative_eq!(pt.envelope, (-1f64).exp());
        assert!(b.fitted);
        assert_eq!(mixed_tail_bound(0.0, 0.0, 0.0, 0.0, &reg).unwrap().at(2.0).unwrap().threshold, 0.0);
        let e = empirical_process_bound(0.0, 0.0, 1.0, 1.0, 1, &reg).unwrap();
        assert_eq!(e.at(1.0).unwrap().threshold, 2.0);
        assert!(matches!(
            mixed_tail_bound(1.0, 1.0, 1.0, 1.0, &ConstantRegistry::default()),
            Err(Error::MissingConstant(_))
        ));
    }

    #[test]
    fn squares() {
        let reg = fitted();
        assert_eq!(squares_moment_bound(0.0, 1.0, 4, 0.0, 0.0, 2.0, &reg).unwrap().value, 0.0);
        let (s, k) = squares_default_params(&[vec![1.0, 2.0], vec![0.5, 0.5]]).unwrap();
        assert_relative_eq!(s, (8.5f64).sqrt());
        assert_eq!(k, 4.0);
        let b = squares_moment_bound(1.0, 1.0, 4, 1.0, 1.0, 4.0, &reg).unwrap();
        assert_relative_eq!(b.value, 0.25 + 0.5 + 1.0 + 1.0);
    }

    #[test]
    fn l2_increment() {
        let b = l2_increment_tail(1.0, 4).unwrap();
        let pt = b.at(1.5).unwrap();
        assert_relative_eq!(pt.threshold, 3.0 * (1.0 + 2f64.sqrt()));
        assert_relative_eq!(pt.envelope, 2.0 * (-9f64).exp());
    }
}
