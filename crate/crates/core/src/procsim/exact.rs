use serde::Serialize;

use super::simulate::{empirical_sup, martingale_sup, squares_sup, ChaosKernel};
use super::{merge_atoms, ChaosModel, Distribution, LinearModel, MartingaleModel, SupremumSample};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::ripkit::restricted_spectral_radius;
use crate::stats::binomial_two_sided_p;

/// Sign or atom patterns allowed in one exhaustive enumeration.
pub const PATTERN_CAP: usize = 1 << 20;

/// A finitely supported law on [0, ∞), atoms sorted by value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteLaw {
    pub atoms: Vec<(f64, f64)>,
}

impl DiscreteLaw {
    pub fn from_atoms(mut atoms: Vec<(f64, f64)>) -> Self {
        atoms.retain(|a| a.1 > 0.0);
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { atoms: merge_atoms(atoms) }
    }

    /// P(V ≥ x).
    pub fn tail(&self, x: f64) -> f64 {
        self.atoms.iter().filter(|a| a.0 >= x).map(|a| a.1).sum::<f64>().min(1.0)
    }

    /// (E V^p)^{1/p}.
    pub fn moment(&self, p: f64) -> f64 {
        self.atoms.iter().map(|&(v, q)| q * v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|&(v, q)| q * v).sum()
    }
}

/// Runs `f` on every pattern of independent draws from `laws` and collects
/// the value distribution.
fn enumerate<F: FnMut(&[f64]) -> f64>(laws: &[Distribution], mut f: F) -> Result<DiscreteLaw> {
    let atoms: Vec<Vec<(f64, f64)>> = laws
        .iter()
        .map(|d| d.atoms().ok_or_else(|| Error::Unsupported(format!("exhaustive enumeration needs finite support, got {d:?}"))))
        .collect::<Result<_>>()?;
    let mut total: usize = 1;
    for a in &atoms {
        total = total.saturating_mul(a.len());
        if total > PATTERN_CAP {
            return Err(Error::Capacity { what: "enumeration patterns", size: total, cap: PATTERN_CAP });
        }
    }
    let mut digits = vec![0usize; atoms.len()];
    let mut point: Vec<f64> = atoms.iter().map(|a| a[0].0).collect();
    let mut out = Vec::with_capacity(total);
    for _ in 0..total {
        let prob: f64 = digits.iter().zip(&atoms).map(|(&k, a)| a[k].1).product();
        if prob > 0.0 {
            out.push((f(&point), prob));
        }
        for (j, a) in atoms.iter().enumerate() {
            digits[j] += 1;
            if digits[j] < a.len() {
                point[j] = a[digits[j]].0;
                break;
            }
            digits[j] = 0;
            point[j] = a[0].0;
        }
    }
    Ok(DiscreteLaw::from_atoms(out))
}

/// Exact law of `sup_t |X_{t,n} − X_{t,0}|`.
pub fn enumerate_martingale_family(model: &MartingaleModel) -> Result<DiscreteLaw> {
    model.validate()?;
    enumerate(&vec![model.driver.clone(); model.steps()], |eps| martingale_sup(&model.coefficients, eps))
}

fn row_laws(model: &LinearModel, m: usize) -> Result<Vec<Distribution>> {
    model.validate()?;
    if m == 0 {
        return Err(Error::Domain("sample count m must be at least 1".into()));
    }
    Ok((0..m).flat_map(|_| model.components.iter().cloned()).collect())
}

fn split_rows(flat: &[f64], d: usize) -> Vec<Vec<f64>> {
    flat.chunks(d).map(<[f64]>::to_vec).collect()
}

/// Exact law of `sup_t |E_t|` over all m·d component patterns.
pub fn enumerate_empirical(model: &LinearModel, m: usize) -> Result<DiscreteLaw> {
    let laws = row_laws(model, m)?;
    let (mu, d) = (model.means(), model.components.len());
    enumerate(&laws, |flat| empirical_sup(model, &mu, &split_rows(flat, d)))
}

/// Exact law of `sup_t |A_t|`.
pub fn enumerate_squares(model: &LinearModel, m: usize) -> Result<DiscreteLaw> {
    let laws = row_laws(model, m)?;
    let second: Vec<f64> = model.moments().into_iter().map(|x| x.1).collect();
    let d = model.components.len();
    enumerate(&laws, |flat| squares_sup(model, &second, &split_rows(flat, d)).0)
}

/// Exact law of the chaos supremum (or its decoupled version).
pub fn enumerate_chaos(model: &ChaosModel, decoupled: bool) -> Result<DiscreteLaw> {
    let kernel = ChaosKernel::new(model)?;
    let n = model.dim();
    if decoupled {
        enumerate(&vec![model.xi.clone(); 2 * n], |x| kernel.decoupled(&x[..n], &x[n..]))
    } else {
        enumerate(&vec![model.xi.clone(); n], |x| kernel.centered(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementPoint {
    pub threshold: f64,
    pub exact: f64,
    pub exceedances: u64,
    pub empirical: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agreement {
    pub points: Vec<AgreementPoint>,
    /// Family level; each point is tested at `level / points`.
    pub level: f64,
    pub agrees: bool,
}

/// Two-sided exact binomial tests of `P(V ≥ x)` at up to `max_points` atoms
/// with nondegenerate tails, Bonferroni-adjusted to family level `level`.
pub fn compare_with_exact(law: &DiscreteLaw, sample: &SupremumSample, level: f64, max_points: usize) -> Result<Agreement> {
    let n = sample.values.len() as u64;
    if n == 0 {
        return Err(Error::Domain("empty sample".into()));
    }
    let candidates: Vec<f64> = law.atoms.iter().map(|a| a.0).filter(|&x| {
        let t = law.tail(x);
        t > 1e-12 && t < 1.0 - 1e-12
    }).collect();
    let stride = candidates.len().div_ceil(max_points.max(1)).max(1);
    let chosen: Vec<f64> = candidates.into_iter().step_by(stride).collect();
    let per_test = level / chosen.len().max(1) as f64;
    let points: Vec<AgreementPoint> = chosen
        .into_iter()
        .map(|x| {
            // atoms are compared with a relative slack so rounding in the
            // simulation does not move a value across its own atom
            let cut = x - 1e-9 * x.abs().max(1.0);
            let k = sample.values.iter().filter(|&&v| v >= cut).count() as u64;
            let exact = law.tail(x);
            AgreementPoint { threshold: x, exact, exceedances: k, empirical: k as f64 / n as f64, p_value: binomial_two_sided_p(k, n, exact) }
        })
        .collect();
    let agrees = points.iter().all(|p| p.p_value >= per_test);
    Ok(Agreement { points, level, agrees })
}

/// One side-by-side comparison `lhs ≤ factor · rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub name: String,
    pub p: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub factor: f64,
    pub holds: bool,
}

fn compare(name: &str, p: f64, lhs: f64, rhs: f64, factor: f64) -> Comparison {
    Comparison { name: name.into(), p, lhs, rhs, factor, holds: lhs <= factor * rhs * (1.0 + 1e-12) + 1e-14 }
}

/// `(E sup_B |Σ_{i≠j} ξ_iξ_j B_ij|^p)^{1/p} ≤ 4 (E E' sup_B |ξ* B ξ'|^p)^{1/p}`
/// with `B = A*A`, both sides computed over every atom pattern.
pub fn check_decoupling(model: &ChaosModel, p_list: &[f64]) -> Result<Vec<Comparison>> {
    let kernel = ChaosKernel::new(model)?;
    let n = model.dim();
    let lhs = enumerate(&vec![model.xi.clone(); n], |x| kernel.off_diagonal(x))?;
    let rhs = enumerate_chaos(model, true)?;
    p_list.iter().map(|&p| Ok(compare("decoupling", check_order(p)?, lhs.moment(p), rhs.moment(p), 4.0))).collect()
}

fn check_order(p: f64) -> Result<f64> {
    if p >= 1.0 && p.is_finite() {
        Ok(p)
    } else {
        Err(Error::Domain(format!("moment order must be a finite p >= 1, got {p}")))
    }
}

/// Largest N for which selector and sign patterns are enumerated.
pub const SYMMETRIZATION_MAX_N: usize = 10;

/// `(E δ_s^p)^{1/p} ≤ 2 (E E_ε sup_x |Σ_i ε_i f_x²(θ_i)|^p)^{1/p}` for
/// Bernoulli(m/N) selectors θ and `f_x(θ_i) = θ_i ⟨√N U_i, x⟩/√m`, exact over
/// all 2^N selector and 2^N sign patterns.
pub fn check_selector_symmetrization(u: &CMatrix, m: f64, s: usize, p_list: &[f64]) -> Result<Vec<Comparison>> {
    let n = u.nrows();
    if n > SYMMETRIZATION_MAX_N {
        return Err(Error::Capacity { what: "symmetrization dimension", size: n, cap: SYMMETRIZATION_MAX_N });
    }
    if !(m > 0.0 && m <= n as f64) {
        return Err(Error::Domain(format!("need 0 < m <= N, got m = {m}")));
    }
    let q = m / n as f64;
    let scale = n as f64 / m;
    // rank-one pieces (N/m) U_i* U_i
    let pieces: Vec<CMatrix> = (0..n)
        .map(|i| {
            let row = u.row(i);
            row.adjoint() * row * C64::new(scale, 0.0)
        })
        .collect();
    let mut lhs_terms = Vec::new();
    let mut rhs_terms = Vec::new();
    for theta in 0u32..(1 << n) {
        let k = theta.count_ones() as i32;
        let prob = q.powi(k) * (1.0 - q).powi(n as i32 - k);
        if prob == 0.0 {
            continue;
        }
        let mut gram = -CMatrix::identity(n, n);
        for i in (0..n).filter(|i| theta >> i & 1 == 1) {
            gram += &pieces[i];
        }
        lhs_terms.push((restricted_spectral_radius(&gram, s)?, prob));
        for eps in 0u32..(1 << n) {
            let mut h = CMatrix::zeros(n, n);
            for i in (0..n).filter(|i| theta >> i & 1 == 1) {
                if eps >> i & 1 == 1 {
                    h += &pieces[i];
                } else {
                    h -= &pieces[i];
                }
            }
            rhs_terms.push((restricted_spectral_radius(&h, s)?, prob / (1u64 << n) as f64));
        }
    }
    let lhs = DiscreteLaw::from_atoms(lhs_terms);
    let rhs = DiscreteLaw::from_atoms(rhs_terms);
    p_list.iter().map(|&p| Ok(compare("symmetrization", check_order(p)?, lhs.moment(p), rhs.moment(p), 2.0))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub decoupling: Vec<Comparison>,
    pub symmetrization: Vec<Comparison>,
    pub holds: bool,
}

/// Exhaustive decoupling check for a chaos model and, when a unitary is
/// given, the selector symmetrization check at `(m, s)`.
pub fn check_symmetrization_decoupling(
    model: &ChaosModel,
    selector: Option<(&CMatrix, f64, usize)>,
    p_list: &[f64],
) -> Result<SymmetryReport> {
    let decoupling = check_decoupling(model, p_list)?;
    let symmetrization = match selector {
        Some((u, m, s)) => check_selector_symmetrization(u, m, s, p_list)?,
        None => Vec::new(),
    };
    let holds = decoupling.iter().chain(&symmetrization).all(|c| c.holds);
    Ok(SymmetryReport { decoupling, symmetrization, holds })
}

/// Largest c with `P(|Z| ≥ u) ≤ 2 exp(−c min(u²/s2², u/s_inf))` for every
/// u > 0, where Z has the exact law `law` (values are |Z|). The tail is a
/// left-continuous step function, so only atoms need checking.
pub fn max_hanson_wright_constant(law: &DiscreteLaw, s2: f64, s_inf: f64) -> f64 {
    let mut best = f64::INFINITY;
    for &(a, _) in &law.atoms {
        if a <= 0.0 {
            continue;
        }
        if s_inf == 0.0 {
            return 0.0;
        }
        let h = (a * a / (s2 * s2)).min(a / s_inf);
        best = best.min((2.0 / law.tail(a)).ln() / h);
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HansonWrightFit {
    /// Scale applied to B so that the components have ψ₂ norm 1.
    pub scale: f64,
    pub s2: f64,
    pub s_inf: f64,
    pub c_max: f64,
}

/// Exact fitted Hanson-Wright constant for `ξ* B ξ` with i.i.d. finitely
/// supported ξ, after normalizing the components to ψ₂ norm 1.
pub fn fit_hanson_wright(b: &CMatrix, xi: &Distribution) -> Result<HansonWrightFit> {
    if b.nrows() != b.ncols() {
        return Err(Error::Shape(format!("B must be square, got {:?}", b.shape())));
    }
    let atoms = xi.atoms().ok_or_else(|| Error::Unsupported("exact Hanson-Wright fit needs a finitely supported ξ".into()))?;
    let psi2 = crate::orlicz::psi_norm_atoms(&atoms, 2.0, 1e-12)?.value;
    if psi2 == 0.0 {
        return Err(Error::Domain("ξ is identically zero".into()));
    }
    let scale = 1.0 / (psi2 * psi2);
    let scaled = b * C64::new(scale, 0.0);
    let n = b.nrows();
    let var = xi.variance();
    let mean: C64 = (0..n).map(|i| scaled[(i, i)] * var).sum();
    let law = enumerate(&vec![xi.clone(); n], |x| {
        let v: C64 = (0..n).map(|i| (0..n).map(|j| scaled[(i, j)] * (x[i] * x[j])).sum::<C64>()).sum();
        (v - mean).norm()
    })?;
    let s2 = crate::linalg::schatten_norm(&scaled, 2.0);
    let s_inf = crate::linalg::schatten_norm(&scaled, f64::INFINITY);
    Ok(HansonWrightFit { scale, s2, s_inf, c_max: max_hanson_wright_constant(&law, s2, s_inf) })
}
