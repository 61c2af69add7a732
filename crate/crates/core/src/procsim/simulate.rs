use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ChaosModel, GaussianModel, LinearModel, MartingaleModel, ProcessModel};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::stats::stream_rng;

/// Reference point of the supremum: `sup |X_t − X_{t0}|` or `sup |X_t|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Base {
    Point(usize),
    Origin,
}

impl Default for Base {
    fn default() -> Self {
        Base::Point(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupremumSample {
    pub replications: usize,
    pub seed: u64,
    pub values: Vec<f64>,
    /// t₀ for increment suprema; absent when the supremum is of |X_t| itself.
    pub base_point: Option<usize>,
    /// Per-replication `sup_t ‖X_t‖_{L²(μ_m)}` for the squares process.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l2_sup: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub reps: usize,
    pub seed: u64,
    /// Rows per replication for empirical and squares models.
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub base: Base,
    #[serde(default)]
    pub decoupled: bool,
}

fn replicate<T, F>(reps: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync + Send,
{
    if reps == 0 {
        return Err(Error::Domain("need at least one replication".into()));
    }
    Ok((0..reps).into_par_iter().map(|r| f(&mut stream_rng(seed, r as u64))).collect())
}

fn sample(reps: usize, seed: u64, values: Vec<f64>, base_point: Option<usize>) -> SupremumSample {
    SupremumSample { replications: reps, seed, values, base_point, l2_sup: None }
}

fn check_rows(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::Domain("sample count m must be at least 1".into()));
    }
    Ok(())
}

/// `X = L g` with `L Lᵀ = Σ`.
pub fn simulate_gaussian(model: &GaussianModel, base: Base, reps: usize, seed: u64) -> Result<SupremumSample> {
    let l: DMatrix<f64> = model.factor()?;
    let n = model.len();
    let b = match base {
        Base::Point(t) if t >= n => return Err(Error::Domain(format!("base point {t} out of range for {n} points"))),
        Base::Point(t) => Some(t),
        Base::Origin => None,
    };
    let values = replicate(reps, seed, |rng| {
        let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let x: Vec<f64> = (0..n).map(|t| (0..n).map(|k| l[(t, k)] * g[k]).sum()).collect();
        let shift = b.map_or(0.0, |t| x[t]);
        x.iter().map(|v| (v - shift).abs()).fold(0.0, f64::max)
    })?;
    Ok(sample(reps, seed, values, b))
}

/// `sup_t |X_{t,n} − X_{t,0}| = sup_t |Σ_k t_k ε_k|`.
pub fn simulate_martingale_family(model: &MartingaleModel, reps: usize, seed: u64) -> Result<SupremumSample> {
    model.validate()?;
    let n = model.steps();
    let values = replicate(reps, seed, |rng| {
        let eps: Vec<f64> = (0..n).map(|_| model.driver.sample(rng)).collect();
        martingale_sup(&model.coefficients, &eps)
    })?;
    Ok(sample(reps, seed, values, None))
}

pub(crate) fn martingale_sup(coefficients: &[Vec<f64>], eps: &[f64]) -> f64 {
    coefficients.iter().map(|c| c.iter().zip(eps).map(|(a, e)| a * e).sum::<f64>().abs()).fold(0.0, f64::max)
}

fn draw_rows<R: Rng>(model: &LinearModel, m: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..m).map(|_| model.components.iter().map(|d| d.sample(rng)).collect()).collect()
}

/// `sup_t |E_t|` with `E_t = (1/m) Σ_i ⟨w_t, Z_i⟩ − E⟨w_t, Z_i⟩`.
pub fn simulate_empirical(model: &LinearModel, m: usize, reps: usize, seed: u64) -> Result<SupremumSample> {
    model.validate()?;
    check_rows(m)?;
    let mu = model.means();
    let values = replicate(reps, seed, |rng| empirical_sup(model, &mu, &draw_rows(model, m, rng)))?;
    Ok(sample(reps, seed, values, None))
}

pub(crate) fn empirical_sup(model: &LinearModel, mu: &[f64], rows: &[Vec<f64>]) -> f64 {
    let m = rows.len() as f64;
    let centered: Vec<f64> =
        (0..mu.len()).map(|j| rows.iter().map(|z| z[j]).sum::<f64>() / m - mu[j]).collect();
    model.weights.iter().map(|w| w.iter().zip(&centered).map(|(a, b)| a * b).sum::<f64>().abs()).fold(0.0, f64::max)
}

/// `sup_t |A_t|` with `A_t = (1/m) Σ_i ⟨w_t, Z_i⟩² − E⟨w_t, Z_i⟩²`; also records
/// `sup_t ‖X_t‖_{L²(μ_m)}`.
pub fn simulate_squares(model: &LinearModel, m: usize, reps: usize, seed: u64) -> Result<SupremumSample> {
    model.validate()?;
    check_rows(m)?;
    let second: Vec<f64> = model.moments().into_iter().map(|x| x.1).collect();
    let pairs = replicate(reps, seed, |rng| squares_sup(model, &second, &draw_rows(model, m, rng)))?;
    let (values, l2): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok(SupremumSample { l2_sup: Some(l2), ..sample(reps, seed, values, None) })
}

pub(crate) fn squares_sup(model: &LinearModel, second: &[f64], rows: &[Vec<f64>]) -> (f64, f64) {
    let m = rows.len() as f64;
    let mut sup_a: f64 = 0.0;
    let mut sup_l2: f64 = 0.0;
    for (w, e2) in model.weights.iter().zip(second) {
        let mean_sq = rows.iter().map(|z| w.iter().zip(z).map(|(a, b)| a * b).sum::<f64>().powi(2)).sum::<f64>() / m;
        sup_a = sup_a.max((mean_sq - e2).abs());
        sup_l2 = sup_l2.max(mean_sq.sqrt());
    }
    (sup_a, sup_l2)
}

/// `‖X_t − X_s‖_{L²(μ_m)}` per replication.
pub fn simulate_l2_increment(model: &LinearModel, s: usize, t: usize, m: usize, reps: usize, seed: u64) -> Result<SupremumSample> {
    model.validate()?;
    check_rows(m)?;
    if s >= model.len() || t >= model.len() {
        return Err(Error::Domain(format!("index pair ({s}, {t}) out of range for {} points", model.len())));
    }
    let diff: Vec<f64> = model.weights[t].iter().zip(&model.weights[s]).map(|(a, b)| a - b).collect();
    let values = replicate(reps, seed, |rng| {
        let rows = draw_rows(model, m, rng);
        (rows.iter().map(|z| diff.iter().zip(z).map(|(a, b)| a * b).sum::<f64>().powi(2)).sum::<f64>() / m as f64).sqrt()
    })?;
    Ok(sample(reps, seed, values, Some(s)))
}

/// Precomputed pieces for chaos evaluation.
pub(crate) struct ChaosKernel {
    matrices: Vec<CMatrix>,
    grams: Vec<CMatrix>,
    means: Vec<f64>,
}

impl ChaosKernel {
    pub(crate) fn new(model: &ChaosModel) -> Result<Self> {
        model.validate()?;
        let var = model.xi.variance();
        Ok(Self {
            matrices: model.matrices.clone(),
            grams: model.matrices.iter().map(|a| a.adjoint() * a).collect(),
            means: model.matrices.iter().map(|a| var * a.norm_squared()).collect(),
        })
    }

    /// `sup_A |‖Aξ‖² − E‖Aξ‖²|`.
    pub(crate) fn centered(&self, xi: &[f64]) -> f64 {
        self.matrices
            .iter()
            .zip(&self.means)
            .map(|(a, mean)| {
                let norm: f64 = (0..a.nrows())
                    .map(|r| (0..a.ncols()).map(|c| a[(r, c)] * xi[c]).sum::<C64>().norm_sqr())
                    .sum();
                (norm - mean).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `sup_A |ξ* B ξ'|` with `B = A*A`.
    pub(crate) fn decoupled(&self, xi: &[f64], xi2: &[f64]) -> f64 {
        self.grams.iter().map(|b| bilinear(b, xi, xi2).norm()).fold(0.0, f64::max)
    }

    /// `sup_A |Σ_{i≠j} ξ_i ξ_j B_ij|`.
    pub(crate) fn off_diagonal(&self, xi: &[f64]) -> f64 {
        self.grams
            .iter()
            .map(|b| {
                let diag: C64 = (0..b.nrows()).map(|i| b[(i, i)] * xi[i] * xi[i]).sum();
                (bilinear(b, xi, xi) - diag).norm()
            })
            .fold(0.0, f64::max)
    }
}

fn bilinear(b: &CMatrix, x: &[f64], y: &[f64]) -> C64 {
    (0..b.nrows()).map(|i| (0..b.ncols()).map(|j| b[(i, j)] * (x[i] * y[j])).sum::<C64>()).sum()
}

/// `sup_A |‖Aξ‖² − E‖Aξ‖²|`, or `sup_A |ξ* A*A ξ'|` with an independent copy ξ'
/// when `decoupled` is set.
pub fn simulate_chaos(model: &ChaosModel, reps: usize, seed: u64, decoupled: bool) -> Result<SupremumSample> {
    let kernel = ChaosKernel::new(model)?;
    let n = model.dim();
    let values = replicate(reps, seed, |rng| {
        let xi: Vec<f64> = (0..n).map(|_| model.xi.sample(rng)).collect();
        if decoupled {
            let xi2: Vec<f64> = (0..n).map(|_| model.xi.sample(rng)).collect();
            kernel.decoupled(&xi, &xi2)
        } else {
            kernel.centered(&xi)
        }
    })?;
    Ok(sample(reps, seed, values, None))
}

pub fn simulate(model: &ProcessModel, opts: &SimOptions) -> Result<SupremumSample> {
    let rows = || opts.m.ok_or_else(|| Error::Domain("empirical and squares models need m".into()));
    match model {
        ProcessModel::Gaussian(g) => simulate_gaussian(g, opts.base, opts.reps, opts.seed),
        ProcessModel::MartingaleFamily(f) => simulate_martingale_family(f, opts.reps, opts.seed),
        ProcessModel::Empirical(l) => simulate_empirical(l, rows()?, opts.reps, opts.seed),
        ProcessModel::Squares(l) => simulate_squares(l, rows()?, opts.reps, opts.seed),
        ProcessModel::Chaos(c) => simulate_chaos(c, opts.reps, opts.seed, opts.decoupled),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procsim::Distribution;

    #[test]
    fn trivial_gaussians() {
        let one = GaussianModel { covariance: vec![vec![2.0]], labels: None };
        assert!(simulate_gaussian(&one, Base::Point(0), 50, 1).unwrap().values.iter().all(|&v| v == 0.0));
        let tied = GaussianModel { covariance: vec![vec![1.0, 1.0], vec![1.0, 1.0]], labels: None };
        assert!(simulate_gaussian(&tied, Base::Point(0), 50, 1).unwrap().values.iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn deterministic() {
        let g = GaussianModel { covariance: vec![vec![1.0, 0.3], vec![0.3, 1.0]], labels: None };
        let a = simulate_gaussian(&g, Base::Origin, 300, 9).unwrap();
        let b = simulate_gaussian(&g, Base::Origin, 300, 9).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_ne!(a.values, simulate_gaussian(&g, Base::Origin, 300, 10).unwrap().values);
    }

    #[test]
    fn trivial_martingales() {
        let zero = MartingaleModel { coefficients: vec![vec![0.0; 3]], driver: Distribution::Rademacher, step_bounds: None, labels: None };
        assert!(simulate_martingale_family(&zero, 20, 0).unwrap().values.iter().all(|&v| v == 0.0));
        let unit = MartingaleModel { coefficients: vec![vec![1.0]], ..zero };
        assert!(simulate_martingale_family(&unit, 20, 0).unwrap().values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn constants_give_zero() {
        let model = LinearModel { weights: vec![vec![1.0, 2.0]], components: vec![Distribution::Constant { c: 3.0 }; 2], labels: None };
        assert!(simulate_empirical(&model, 4, 10, 0).unwrap().values.iter().all(|&v| v.abs() < 1e-12));
        assert!(simulate_squares(&model, 4, 10, 0).unwrap().values.iter().all(|&v| v.abs() < 1e-9));
    }

    #[test]
    fn chaos_trivial() {
        let zero = ChaosModel { matrices: vec![CMatrix::zeros(3, 3)], xi: Distribution::Rademacher };
        assert!(simulate_chaos(&zero, 20, 0, false).unwrap().values.iter().all(|&v| v == 0.0));
        let id = ChaosModel { matrices: vec![CMatrix::identity(4, 4)], xi: Distribution::Rademacher };
        assert!(simulate_chaos(&id, 20, 0, false).unwrap().values.iter().all(|&v| v.abs() < 1e-12));
    }
}
