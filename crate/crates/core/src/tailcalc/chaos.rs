use serde::Serialize;

use super::{nonneg, order, positive, used, ConstantRegistry, Envelope, MomentBound, TailBound, Threshold};
use crate::error::{Error, Result};
use crate::linalg::{schatten_norm, CMatrix};
use crate::metric::{gamma_exact, gamma_greedy, FiniteMetricSpace, GammaMode};

/// Radii Δ°_q = sup_A ‖A‖_{S^q} of a matrix family and γ₂(𝒜, d_∞).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchattenRadii {
    pub delta_2: f64,
    pub delta_4: f64,
    pub delta_inf: f64,
    pub gamma2_dinf: f64,
    pub gamma_mode: GammaMode,
}

impl SchattenRadii {
    /// Δ°∞ ≤ Δ°₄ ≤ Δ°₂ and Δ°₄² ≤ Δ°₂ Δ°∞ up to rounding.
    pub fn check(&self) -> Result<()> {
        let tol = 1e-9 * self.delta_2.max(1.0);
        if self.delta_inf > self.delta_4 + tol || self.delta_4 > self.delta_2 + tol {
            return Err(Error::Domain(format!(
                "radii out of order: inf {} / 4 {} / 2 {}",
                self.delta_inf, self.delta_4, self.delta_2
            )));
        }
        Ok(())
    }
}

fn check_shapes(matrices: &[CMatrix]) -> Result<()> {
    let first = matrices.first().ok_or_else(|| Error::Shape("empty matrix family".into()))?;
    if let Some((k, m)) = matrices.iter().enumerate().find(|(_, m)| m.shape() != first.shape()) {
        return Err(Error::Shape(format!("matrix {k} is {:?}, expected {:?}", m.shape(), first.shape())));
    }
    Ok(())
}

/// The family as a metric space under the operator-norm distance.
pub fn operator_metric(matrices: &[CMatrix]) -> Result<FiniteMetricSpace> {
    check_shapes(matrices)?;
    let n = matrices.len();
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = schatten_norm(&(&matrices[i] - &matrices[j]), f64::INFINITY);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    FiniteMetricSpace::new(dist, None)
}

/// Schatten radii and γ₂(𝒜, d_∞). Exact γ is used when requested and the
/// family has at most `cap` members; otherwise the greedy value.
pub fn schatten_radii(matrices: &[CMatrix], mode: GammaMode, cap: usize) -> Result<SchattenRadii> {
    let space = operator_metric(matrices)?;
    let mut radii = SchattenRadii { delta_2: 0.0, delta_4: 0.0, delta_inf: 0.0, gamma2_dinf: 0.0, gamma_mode: mode };
    for m in matrices {
        radii.delta_2 = radii.delta_2.max(schatten_norm(m, 2.0));
        radii.delta_4 = radii.delta_4.max(schatten_norm(m, 4.0));
        radii.delta_inf = radii.delta_inf.max(schatten_norm(m, f64::INFINITY));
    }
    let g = match mode {
        GammaMode::Exact if matrices.len() <= cap => gamma_exact(&space, 2.0, 1.0, cap)?,
        _ => gamma_greedy(&space, 2.0, 1.0)?,
    };
    radii.gamma2_dinf = g.value;
    radii.gamma_mode = g.mode;
    Ok(radii)
}

/// `P(|ξᵀBξ − E ξᵀBξ| ≥ u) ≤ 2 exp(−c min(u²/‖B‖²_{S²}, u/‖B‖_{S∞}))` with a
/// fitted c (components with ‖ξ_i‖_ψ2 ≤ 1).
pub fn hanson_wright_tail(b: &CMatrix, c_fit: f64) -> Result<TailBound> {
    positive("c", c_fit)?;
    if b.nrows() != b.ncols() {
        return Err(Error::Shape(format!("B must be square, got {:?}", b.shape())));
    }
    let constants = used([("hanson_wright.c", super::ConstantValue { value: c_fit, fitted: true })]);
    Ok(TailBound::new(
        "hanson-wright",
        Threshold { leading: 1.0, a0: 0.0, a_half: 0.0, a1: 1.0 },
        Envelope::HansonWright { c: c_fit, s2: schatten_norm(b, 2.0), s_inf: schatten_norm(b, f64::INFINITY) },
        0.0,
        constants,
    ))
}

/// `‖ξ‖²_ψ2 · C (γ²_{2,p} + Δ°₂ γ_{2,p} + √p Δ°₄² + p Δ°∞²)`.
pub fn chaos_moment_bound(
    radii: &SchattenRadii,
    gamma2p: f64,
    xi_psi2: f64,
    p: f64,
    registry: &ConstantRegistry,
) -> Result<MomentBound> {
    radii.check()?;
    order(p)?;
    let c = registry.get("chaos.C")?;
    let w = c.value * nonneg("xi psi2 norm", xi_psi2)?.powi(2);
    let g = nonneg("gamma", gamma2p)?;
    Ok(MomentBound::new(
        "chaos-moment",
        p,
        vec![
            ("gamma-squared", w * g * g),
            ("radius-gamma", w * radii.delta_2 * g),
            ("schatten-4", w * p.sqrt() * radii.delta_4.powi(2)),
            ("operator", w * p * radii.delta_inf.powi(2)),
        ],
        used([("chaos.C", c)]),
    ))
}

/// `P(sup |‖Aξ‖² − E‖Aξ‖²| ≥ ‖ξ‖²(C(γ₂² + Δ°₂γ₂) + c(√u Δ°₄² + u Δ°∞²))) ≤ e^{−u}`, u ≥ 1.
pub fn chaos_tail_bound(radii: &SchattenRadii, xi_psi2: f64, registry: &ConstantRegistry) -> Result<TailBound> {
    radii.check()?;
    let (big, small) = (registry.get("chaos.C")?, registry.get("chaos.c")?);
    let g = radii.gamma2_dinf;
    Ok(TailBound::new(
        "chaos-supremum",
        Threshold {
            leading: nonneg("xi psi2 norm", xi_psi2)?.powi(2),
            a0: big.value * (g * g + radii.delta_2 * g),
            a_half: small.value * radii.delta_4.powi(2),
            a1: small.value * radii.delta_inf.powi(2),
        },
        Envelope::Stretched { prefactor: 1.0, rate: 1.0, power: 1.0 },
        1.0,
        used([("chaos.C", big), ("chaos.c", small)]),
    ))
}

/// Parameters of the earlier chaos deviation inequality, for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KmrParams {
    pub e: f64,
    pub v: f64,
    pub u: f64,
}

/// E = γ₂² + Δ°₂γ₂, V = Δ°∞(Δ°₂ + γ₂), U = Δ°∞².
pub fn kmr_parameters(radii: &SchattenRadii) -> KmrParams {
    let g = radii.gamma2_dinf;
    KmrParams {
        e: g * g + radii.delta_2 * g,
        v: radii.delta_inf * (radii.delta_2 + g),
        u: radii.delta_inf.powi(2),
    }
}
