//! Seeded Monte Carlo and exact enumeration for suprema of Gaussian,
//! martingale, empirical, squares and chaos processes, plus validation of
//! tail and moment bounds against the resulting samples.
//!
//! Replication r always draws from stream r of a ChaCha8 generator seeded
//! with the experiment seed, so results do not depend on thread count.

mod exact;
mod simulate;
mod validate;

pub use exact::*;
pub use simulate::*;
pub use validate::*;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::linalg::{matrix_list, CMatrix};
use crate::metric::FiniteMetricSpace;
use crate::orlicz::psi_norm_atoms;
use crate::tailcalc::{operator_metric, squares_default_params};

/// Atoms allowed when a linear form of discrete components is expanded exactly.
pub const ATOM_CAP: usize = 1 << 16;
pub const PSD_TOL: f64 = 1e-10;

/// Law of a single real component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "kebab-case")]
pub enum Distribution {
    /// ±1 with probability 1/2 each.
    Rademacher,
    Gaussian {
        #[serde(default)]
        mean: f64,
        #[serde(default = "one")]
        sd: f64,
    },
    Uniform { lo: f64, hi: f64 },
    Constant { c: f64 },
    /// 1 with probability p, else 0.
    Bernoulli { p: f64 },
    Table { values: Vec<f64>, probs: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

impl Default for Distribution {
    fn default() -> Self {
        Distribution::Rademacher
    }
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Model(msg));
        match self {
            Distribution::Rademacher => Ok(()),
            Distribution::Gaussian { mean, sd } if !mean.is_finite() || !(*sd >= 0.0) || !sd.is_finite() => {
                bad(format!("gaussian needs finite mean and sd >= 0, got ({mean}, {sd})"))
            }
            Distribution::Uniform { lo, hi } if !(lo < hi) || !lo.is_finite() || !hi.is_finite() => {
                bad(format!("uniform needs finite lo < hi, got [{lo}, {hi}]"))
            }
            Distribution::Constant { c } if !c.is_finite() => bad(format!("constant {c} is not finite")),
            Distribution::Bernoulli { p } if !(0.0..=1.0).contains(p) => bad(format!("bernoulli p = {p} outside [0, 1]")),
            Distribution::Table { values, probs } => {
                let total: f64 = probs.iter().sum();
                if values.is_empty()
                    || values.len() != probs.len()
                    || values.iter().any(|v| !v.is_finite())
                    || probs.iter().any(|&q| !(q >= 0.0))
                    || (total - 1.0).abs() > 1e-12
                {
                    bad("table needs matching finite values and probabilities summing to 1".into())
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Distribution::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Distribution::Gaussian { mean, sd } => mean + sd * rng.sample::<f64, _>(StandardNormal),
            Distribution::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Distribution::Constant { c } => *c,
            Distribution::Bernoulli { p } => (rng.random::<f64>() < *p) as u8 as f64,
            Distribution::Table { values, probs } => {
                let mut v = rng.random::<f64>();
                for (x, &q) in values.iter().zip(probs) {
                    if v < q {
                        return *x;
                    }
                    v -= q;
                }
                values[values.len() - 1]
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Distribution::Rademacher => 0.0,
            Distribution::Gaussian { mean, .. } => *mean,
            Distribution::Uniform { lo, hi } => 0.5 * (lo + hi),
            Distribution::Constant { c } => *c,
            Distribution::Bernoulli { p } => *p,
            Distribution::Table { values, probs } => values.iter().zip(probs).map(|(x, q)| x * q).sum(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Distribution::Rademacher => 1.0,
            Distribution::Gaussian { sd, .. } => sd * sd,
            Distribution::Uniform { lo, hi } => (hi - lo) * (hi - lo) / 12.0,
            Distribution::Constant { .. } => 0.0,
            Distribution::Bernoulli { p } => p * (1.0 - p),
            Distribution::Table { values, probs } => {
                let mu = self.mean();
                values.iter().zip(probs).map(|(x, q)| q * (x - mu) * (x - mu)).sum()
            }
        }
    }

    /// `(value, probability)` atoms for finitely supported laws.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            Distribution::Rademacher => Some(vec![(-1.0, 0.5), (1.0, 0.5)]),
            Distribution::Constant { c } => Some(vec![(*c, 1.0)]),
            Distribution::Bernoulli { p } => Some(vec![(0.0, 1.0 - p), (1.0, *p)]),
            Distribution::Table { values, probs } => Some(values.iter().copied().zip(probs.iter().copied()).collect()),
            Distribution::Gaussian { sd, mean } if *sd == 0.0 => Some(vec![(*mean, 1.0)]),
            _ => None,
        }
    }

    /// ess sup |X − E X|, if finite.
    pub fn centered_bound(&self) -> Option<f64> {
        let mu = self.mean();
        match self {
            Distribution::Uniform { lo, hi } => Some(0.5 * (hi - lo)),
            _ => self.atoms().map(|a| a.iter().filter(|x| x.1 > 0.0).map(|x| (x.0 - mu).abs()).fold(0.0, f64::max)),
        }
    }

    /// ess sup |X|, if finite.
    pub fn abs_bound(&self) -> Option<f64> {
        match self {
            Distribution::Uniform { lo, hi } => Some(lo.abs().max(hi.abs())),
            _ => self.atoms().map(|a| a.iter().filter(|x| x.1 > 0.0).map(|x| x.0.abs()).fold(0.0, f64::max)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianModel {
    pub covariance: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

/// `X_{t,k} = Σ_{j≤k} t_j ε_j` with a shared mean-zero bounded driver ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleModel {
    pub coefficients: Vec<Vec<f64>>,
    #[serde(default)]
    pub driver: Distribution,
    /// Declared `‖Δ_k(X_t)‖_∞` bounds, checked against the coefficients.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_bounds: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

/// Rows `Z_1, …, Z_m` i.i.d. with independent components; `X_{t_i} = ⟨w_t, Z_i⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<Vec<f64>>,
    pub components: Vec<Distribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

/// Matrix family 𝒜 and an i.i.d. mean-zero component law for ξ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosModel {
    #[serde(with = "matrix_list")]
    pub matrices: Vec<CMatrix>,
    #[serde(default)]
    pub xi: Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProcessModel {
    Gaussian(GaussianModel),
    MartingaleFamily(MartingaleModel),
    Empirical(LinearModel),
    Squares(LinearModel),
    Chaos(ChaosModel),
}

impl GaussianModel {
    /// L with `L Lᵀ = Σ`, from the symmetric eigendecomposition with
    /// eigenvalues in `[−10⁻¹⁰, 0)` clipped to zero.
    pub fn factor(&self) -> Result<DMatrix<f64>> {
        let n = self.covariance.len();
        if n == 0 || self.covariance.iter().any(|r| r.len() != n) {
            return Err(Error::Model("covariance must be a nonempty square matrix".into()));
        }
        let cov = DMatrix::from_fn(n, n, |i, j| self.covariance[i][j]);
        let scale = cov.iter().fold(1.0f64, |a, x| a.max(x.abs()));
        for i in 0..n {
            for j in 0..i {
                if (cov[(i, j)] - cov[(j, i)]).abs() > 1e-12 * scale || !cov[(i, j)].is_finite() {
                    return Err(Error::Model(format!("covariance is not symmetric at ({i}, {j})")));
                }
            }
        }
        let eig = SymmetricEigen::new(cov);
        if let Some(&bad) = eig.eigenvalues.iter().find(|&&l| l < -PSD_TOL) {
            return Err(Error::Model(format!("covariance is not positive semidefinite: eigenvalue {bad:e}")));
        }
        let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots))
    }

    pub fn len(&self) -> usize {
        self.covariance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.covariance.is_empty()
    }

    /// `d(s,t) = (Σ_ss + Σ_tt − 2Σ_st)^{1/2}`.
    pub fn metric(&self) -> Result<FiniteMetricSpace> {
        self.factor()?;
        let c = &self.covariance;
        let n = c.len();
        let dist = (0..n).map(|s| (0..n).map(|t| (c[s][s] + c[t][t] - 2.0 * c[s][t]).max(0.0).sqrt()).collect()).collect();
        FiniteMetricSpace::new(dist, self.labels.clone())
    }

    /// σ = sup_t Σ_tt^{1/2}.
    pub fn weak_sigma(&self) -> f64 {
        (0..self.len()).map(|t| self.covariance[t][t].max(0.0).sqrt()).fold(0.0, f64::max)
    }
}

impl MartingaleModel {
    pub fn steps(&self) -> usize {
        self.coefficients.first().map(Vec::len).unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.steps();
        if self.coefficients.is_empty() || self.coefficients.iter().any(|c| c.len() != n || c.iter().any(|x| !x.is_finite())) {
            return Err(Error::Model("coefficient vectors must be nonempty, finite and of equal length".into()));
        }
        self.driver.validate()?;
        if self.driver.mean().abs() > 1e-12 {
            return Err(Error::Model(format!("driver must be mean-zero, has mean {}", self.driver.mean())));
        }
        let b = self.driver_bound()?;
        if let Some(bounds) = &self.step_bounds {
            if bounds.len() != self.coefficients.len() || bounds.iter().any(|r| r.len() != n) {
                return Err(Error::Model("step_bounds must match the coefficient shape".into()));
            }
            for (t, (c, bd)) in self.coefficients.iter().zip(bounds).enumerate() {
                for k in 0..n {
                    if c[k].abs() * b > bd[k] * (1.0 + 1e-12) {
                        return Err(Error::Model(format!(
                            "increment {k} of index {t} has sup-norm {} above its declared bound {}",
                            c[k].abs() * b,
                            bd[k]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn driver_bound(&self) -> Result<f64> {
        self.driver.abs_bound().ok_or_else(|| Error::Model("martingale driver must be bounded".into()))
    }

    /// `d(s,t) = (Σ_k ‖Δ_k(X_t − X_s)‖²_∞)^{1/2}`.
    pub fn metric(&self) -> Result<FiniteMetricSpace> {
        self.validate()?;
        let b = self.driver_bound()?;
        let c = &self.coefficients;
        let dist = c
            .iter()
            .map(|s| c.iter().map(|t| b * s.iter().zip(t).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()).collect())
            .collect();
        FiniteMetricSpace::new(dist, self.labels.clone())
    }
}

/// Root of `e^{a²/2} Φ(a) = 1`, so that `‖N(0, σ²)‖_ψ1 = σ/a`.
fn gaussian_psi1_root() -> f64 {
    let phi = Normal::standard();
    let (mut lo, mut hi) = (0.0f64, 2.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (0.5 * mid * mid).exp() * phi.cdf(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Atoms of `Σ_j v_j Z_j`, merging values closer than 10⁻¹² relative.
pub fn linear_form_atoms(v: &[f64], components: &[Distribution], cap: usize) -> Result<Vec<(f64, f64)>> {
    let mut law = vec![(0.0, 1.0)];
    for (&w, d) in v.iter().zip(components) {
        if w == 0.0 {
            continue;
        }
        let atoms = d.atoms().ok_or_else(|| Error::Unsupported(format!("component {d:?} is not finitely supported")))?;
        if law.len() * atoms.len() > cap {
            return Err(Error::Capacity { what: "linear-form atoms", size: law.len() * atoms.len(), cap });
        }
        let mut next: Vec<(f64, f64)> =
            law.iter().flat_map(|&(x, q)| atoms.iter().map(move |&(y, r)| (x + w * y, q * r))).filter(|a| a.1 > 0.0).collect();
        next.sort_by(|a, b| a.0.total_cmp(&b.0));
        law = merge_atoms(next);
    }
    Ok(law)
}

pub(crate) fn merge_atoms(sorted: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
    for (x, q) in sorted {
        match out.last_mut() {
            Some(last) if (x - last.0).abs() <= 1e-12 * x.abs().max(1.0) => last.1 += q,
            _ => out.push((x, q)),
        }
    }
    out
}

/// ψ_α norm of `Σ_j v_j Z_j`: closed form for centered Gaussian components
/// (α ∈ {1, 2}), exact atom expansion for finitely supported ones.
pub fn linear_form_psi_norm(v: &[f64], components: &[Distribution], alpha: f64) -> Result<f64> {
    if v.len() != components.len() {
        return Err(Error::Shape(format!("{} weights for {} components", v.len(), components.len())));
    }
    let active: Vec<(f64, &Distribution)> =
        v.iter().copied().zip(components).filter(|(w, d)| *w != 0.0 && **d != Distribution::Constant { c: 0.0 }).collect();
    if active.is_empty() {
        return Ok(0.0);
    }
    let gaussian = active.iter().all(|(_, d)| matches!(d, Distribution::Gaussian { mean, .. } if *mean == 0.0));
    if gaussian {
        let sd = active
            .iter()
            .map(|(w, d)| match d {
                Distribution::Gaussian { sd, .. } => w * w * sd * sd,
                _ => unreachable!(),
            })
            .sum::<f64>()
            .sqrt();
        return match alpha {
            a if a == 2.0 => Ok(sd * (8.0f64 / 3.0).sqrt()),
            a if a == 1.0 => Ok(sd / gaussian_psi1_root()),
            _ => Err(Error::Unsupported(format!("gaussian linear forms support alpha in {{1, 2}}, got {alpha}"))),
        };
    }
    let atoms = linear_form_atoms(v, components, ATOM_CAP)?;
    Ok(psi_norm_atoms(&atoms, alpha, 1e-12)?.value)
}

impl LinearModel {
    pub fn validate(&self) -> Result<()> {
        let d = self.components.len();
        if d == 0 || self.weights.is_empty() || self.weights.iter().any(|w| w.len() != d || w.iter().any(|x| !x.is_finite())) {
            return Err(Error::Model("weights must be nonempty finite vectors, one entry per component".into()));
        }
        if let Some(l) = &self.labels {
            if l.len() != self.weights.len() {
                return Err(Error::Model("one label per weight vector".into()));
            }
        }
        self.components.iter().try_for_each(Distribution::validate)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn means(&self) -> Vec<f64> {
        self.components.iter().map(Distribution::mean).collect()
    }

    /// `E ⟨w_t, Z⟩` and `E ⟨w_t, Z⟩²` for every t.
    pub fn moments(&self) -> Vec<(f64, f64)> {
        let mu = self.means();
        self.weights
            .iter()
            .map(|w| {
                let mean: f64 = w.iter().zip(&mu).map(|(a, b)| a * b).sum();
                let var: f64 = w.iter().zip(&self.components).map(|(a, d)| a * a * d.variance()).sum();
                (mean, var + mean * mean)
            })
            .collect()
    }

    fn pairwise(&self, alpha: f64) -> Result<FiniteMetricSpace> {
        self.validate()?;
        let n = self.len();
        let mut dist = vec![vec![0.0; n]; n];
        for s in 0..n {
            for t in s + 1..n {
                let diff: Vec<f64> = self.weights[t].iter().zip(&self.weights[s]).map(|(a, b)| a - b).collect();
                let d = linear_form_psi_norm(&diff, &self.components, alpha)?;
                dist[s][t] = d;
                dist[t][s] = d;
            }
        }
        FiniteMetricSpace::new(dist, self.labels.clone())
    }

    /// `d_ψ2(s,t) = ‖X_{t_i} − X_{s_i}‖_ψ2` (rows are identically distributed).
    pub fn psi2_metric(&self) -> Result<FiniteMetricSpace> {
        self.pairwise(2.0)
    }

    /// `d₁ = d₂ = ‖X_{t_i} − X_{s_i}‖_ψ1` (rows are identically distributed).
    pub fn psi1_metric(&self) -> Result<FiniteMetricSpace> {
        self.pairwise(1.0)
    }
}

/// Inputs of the empirical-process bound for a linear model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalParams {
    /// ψ₁ increment metric; serves as both d₁ and d₂.
    pub metric: FiniteMetricSpace,
    /// sup_t (Var X_t)^{1/2}.
    pub sigma: f64,
    /// sup_t ess sup |X_t − E X_t|, which satisfies the Bernstein moment condition.
    #[serde(rename = "K")]
    pub k: f64,
}

pub fn empirical_parameters(model: &LinearModel) -> Result<EmpiricalParams> {
    let metric = model.psi1_metric()?;
    let bounds: Vec<f64> = model
        .components
        .iter()
        .map(|d| d.centered_bound().ok_or_else(|| Error::Unsupported(format!("component {d:?} is unbounded; K needs bounded summands"))))
        .collect::<Result<_>>()?;
    let mut sigma: f64 = 0.0;
    let mut k: f64 = 0.0;
    for (w, (mean, second)) in model.weights.iter().zip(model.moments()) {
        sigma = sigma.max((second - mean * mean).max(0.0).sqrt());
        k = k.max(w.iter().zip(&bounds).map(|(a, b)| a.abs() * b).sum());
    }
    Ok(EmpiricalParams { metric, sigma, k })
}

/// Inputs of the averages-of-squares bound for a linear model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquaresParams {
    pub metric: FiniteMetricSpace,
    /// Δ°_ψ2 = sup_t ‖X_{t_i}‖_ψ2.
    pub radius: f64,
    pub sigma: f64,
    #[serde(rename = "K")]
    pub k: f64,
}

pub fn squares_parameters(model: &LinearModel) -> Result<SquaresParams> {
    let metric = model.psi2_metric()?;
    let norms: Vec<Vec<f64>> =
        model.weights.iter().map(|w| Ok(vec![linear_form_psi_norm(w, &model.components, 2.0)?])).collect::<Result<_>>()?;
    let radius = norms.iter().map(|r| r[0]).fold(0.0, f64::max);
    let (sigma, k) = squares_default_params(&norms)?;
    Ok(SquaresParams { metric, radius, sigma, k })
}

impl ChaosModel {
    pub fn validate(&self) -> Result<()> {
        let first = self.matrices.first().ok_or_else(|| Error::Model("empty matrix family".into()))?;
        if self.matrices.iter().any(|m| m.shape() != first.shape()) {
            return Err(Error::Shape("all matrices must share one shape".into()));
        }
        self.xi.validate()?;
        if self.xi.mean().abs() > 1e-12 {
            return Err(Error::Model(format!("chaos components must be mean-zero, got mean {}", self.xi.mean())));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.matrices.first().map(|m| m.ncols()).unwrap_or(0)
    }
}

/// Canonical metric of a model: Gaussian L² increments, the martingale
/// sum-of-sup-squares metric, d_ψ2 for squares and d_∞ for chaos.
pub fn canonical_metric(model: &ProcessModel) -> Result<FiniteMetricSpace> {
    match model {
        ProcessModel::Gaussian(g) => g.metric(),
        ProcessModel::MartingaleFamily(m) => m.metric(),
        ProcessModel::Squares(l) => l.psi2_metric(),
        ProcessModel::Chaos(c) => {
            c.validate()?;
            operator_metric(&c.matrices)
        }
        ProcessModel::Empirical(_) => Err(Error::Unsupported(
            "empirical processes carry the metric pair of empirical_parameters rather than one canonical metric".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(c: Vec<Vec<f64>>) -> GaussianModel {
        GaussianModel { covariance: c, labels: None }
    }

    #[test]
    fn gaussian_metric_examples() {
        let m = gauss(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).metric().unwrap();
        assert!((m.dist(0, 1) - 2f64.sqrt()).abs() < 1e-15);
        let m = gauss(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).metric().unwrap();
        assert_eq!(m.dist(0, 1), 0.0);
        assert!(gauss(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).factor().is_err());
        assert!(gauss(vec![vec![1.0, 0.5], vec![0.4, 1.0]]).factor().is_err());
    }

    #[test]
    fn martingale_metric_example() {
        let m = MartingaleModel { coefficients: vec![vec![1.0, 1.0], vec![0.0, 0.0]], driver: Distribution::Rademacher, step_bounds: None, labels: None };
        assert!((m.metric().unwrap().dist(0, 1) - 2f64.sqrt()).abs() < 1e-15);
        let bad = MartingaleModel { step_bounds: Some(vec![vec![0.5, 1.0], vec![0.0, 0.0]]), ..m };
        assert!(matches!(bad.validate(), Err(Error::Model(_))));
    }

    #[test]
    fn psi_norms_of_linear_forms() {
        let rad = [Distribution::Rademacher];
        let n = linear_form_psi_norm(&[1.0], &rad, 2.0).unwrap();
        assert!((n - 1.0 / std::f64::consts::LN_2.sqrt()).abs() < 1e-10);
        let g = [Distribution::Gaussian { mean: 0.0, sd: 1.0 }, Distribution::Gaussian { mean: 0.0, sd: 1.0 }];
        let n = linear_form_psi_norm(&[3.0, 4.0], &g, 2.0).unwrap();
        assert!((n - 5.0 * (8.0f64 / 3.0).sqrt()).abs() < 1e-12);
        // e^{a²/2} Φ(a) = 1 at the returned root
        let a = gaussian_psi1_root();
        assert!(((0.5 * a * a).exp() * Normal::standard().cdf(a) - 1.0).abs() < 1e-12);
        assert!(linear_form_psi_norm(&[1.0], &[Distribution::Uniform { lo: -1.0, hi: 1.0 }], 2.0).is_err());
    }

    #[test]
    fn atoms_of_sums() {
        let rad = vec![Distribution::Rademacher; 3];
        let law = linear_form_atoms(&[1.0, 1.0, 1.0], &rad, ATOM_CAP).unwrap();
        let want = [(-3.0, 0.125), (-1.0, 0.375), (1.0, 0.375), (3.0, 0.125)];
        assert_eq!(law.len(), 4);
        for (a, b) in law.iter().zip(want) {
            assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-15);
        }
    }

    #[test]
    fn chaos_needs_mean_zero() {
        let c = ChaosModel { matrices: vec![CMatrix::identity(2, 2)], xi: Distribution::Bernoulli { p: 0.5 } };
        assert!(c.validate().is_err());
    }

    #[test]
    fn model_json_round_trip() {
        let text = r#"{"kind": "chaos", "matrices": [[[1, 0], [0, [0, 1]]]], "xi": {"dist": "rademacher"}}"#;
        let m: ProcessModel = serde_json::from_str(text).unwrap();
        let back: ProcessModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(m, back);
    }
}
