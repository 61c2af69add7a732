//! Subsampled unitary matrices and bounded orthonormal systems: selector
//! sampling, exact restricted isometry constants by support enumeration,
//! the sample-complexity condition and Monte Carlo failure curves.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix, C64};
use crate::metric::next_combination;
use crate::stats::{clopper_pearson, stream_rng};

pub const DEFAULT_SUPPORT_CAP: u64 = 1_000_000;
pub const UNITARY_TOL: f64 = 1e-10;
const COMPLEXITY_CAP: u64 = 1 << 60;

/// `U_kl = N^{-1/2} exp(2πi kl/N)` with zero-based k, l.
pub fn build_dft(n: usize) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let scale = 1.0 / (n as f64).sqrt();
    Ok(CMatrix::from_fn(n, n, |k, l| {
        // reduce kl mod N first so large products keep full phase precision
        let phase = 2.0 * std::f64::consts::PI * ((k * l) % n) as f64 / n as f64;
        C64::from_polar(scale, phase)
    }))
}

/// max |(U*U − I)_{kl}|.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let g = u.adjoint() * u;
    let n = g.nrows();
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for l in 0..n {
            let target = if k == l { 1.0 } else { 0.0 };
            worst = worst.max((g[(k, l)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// `√N max |U_kl|`.
pub fn boundedness_constant(u: &CMatrix) -> f64 {
    (u.nrows() as f64).sqrt() * u.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Independent Bernoulli(m/N) selectors; returns the selected row indices.
pub fn sample_selectors(n: usize, m: f64, seed: u64) -> Result<Vec<usize>> {
    check_budget(n, m)?;
    Ok(selectors_with(n, m, &mut ChaCha8Rng::seed_from_u64(seed)))
}

fn check_budget(n: usize, m: f64) -> Result<()> {
    if n == 0 || !(0.0..=n as f64).contains(&m) {
        return Err(Error::Domain(format!("need N >= 1 and 0 <= m <= N, got N = {n}, m = {m}")));
    }
    Ok(())
}

fn selectors_with<R: Rng>(n: usize, m: f64, rng: &mut R) -> Vec<usize> {
    let q = m / n as f64;
    (0..n).filter(|_| rng.random::<f64>() < q).collect()
}

/// `U_I = √(N/m) R_I U`. An empty I gives a 0×N matrix.
pub fn subsample(u: &CMatrix, selected: &[usize], m: f64) -> Result<CMatrix> {
    let n = u.nrows();
    if !(m > 0.0) {
        return Err(Error::Domain(format!("row budget m must be positive, got {m}")));
    }
    if let Some(&i) = selected.iter().find(|&&i| i >= n) {
        return Err(Error::Domain(format!("row index {i} out of range for N = {n}")));
    }
    let scale = C64::new((n as f64 / m).sqrt(), 0.0);
    Ok(CMatrix::from_fn(selected.len(), u.ncols(), |r, c| u[(selected[r], c)] * scale))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RipReport {
    pub s: usize,
    pub delta_s: f64,
    pub witness_support: Vec<usize>,
    /// Unit vector in C^N supported on the witness support.
    pub witness_direction: Vec<C64>,
    pub supports_checked: u64,
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

fn supports(n: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut c: Vec<usize> = (0..s).collect();
    loop {
        out.push(c.clone());
        if !next_combination(&mut c, n) {
            return out;
        }
    }
}

fn principal(h: &CMatrix, support: &[usize]) -> CMatrix {
    CMatrix::from_fn(support.len(), support.len(), |a, b| h[(support[a], support[b])])
}

/// Extreme eigenvalues of a Hermitian matrix; closed form up to size 2.
fn extreme_eigenvalues(h: &CMatrix) -> (f64, f64) {
    match h.nrows() {
        1 => (h[(0, 0)].re, h[(0, 0)].re),
        2 => {
            let (a, d) = (h[(0, 0)].re, h[(1, 1)].re);
            let r = (0.25 * (a - d) * (a - d) + h[(0, 1)].norm_sqr()).sqrt();
            (0.5 * (a + d) - r, 0.5 * (a + d) + r)
        }
        _ => {
            let (values, _) = hermitian_eigen(h);
            (values[0], values[values.len() - 1])
        }
    }
}

fn check_sparsity(n: usize, s: usize, cap: u64) -> Result<()> {
    if s == 0 || s > n {
        return Err(Error::Domain(format!("sparsity must satisfy 1 <= s <= N = {n}, got {s}")));
    }
    let count = binomial(n, s);
    if count > cap {
        return Err(Error::Capacity { what: "supports (use Monte Carlo selector curves instead)", size: count as usize, cap: cap as usize });
    }
    Ok(())
}

/// `max_{|S| = s} max |λ(H_S)|` for Hermitian H, i.e. `sup |x*Hx|` over s-sparse unit x.
pub fn restricted_spectral_radius(h: &CMatrix, s: usize) -> Result<f64> {
    check_sparsity(h.nrows(), s, DEFAULT_SUPPORT_CAP)?;
    Ok(supports(h.nrows(), s)
        .iter()
        .map(|sup| {
            let (lo, hi) = extreme_eigenvalues(&principal(h, sup));
            lo.abs().max(hi.abs())
        })
        .fold(0.0, f64::max))
}

/// δ_s(A) = max over size-s supports S of max(λ_max − 1, 1 − λ_min) of `A_S* A_S`.
/// Ties keep the lexicographically first support.
pub fn restricted_isometry_constant(a: &CMatrix, s: usize, cap: u64) -> Result<RipReport> {
    let n = a.ncols();
    check_sparsity(n, s, cap)?;
    let gram = a.adjoint() * a;
    let all = supports(n, s);
    let (best, delta) = all
        .par_iter()
        .enumerate()
        .map(|(k, sup)| {
            let (lo, hi) = extreme_eigenvalues(&principal(&gram, sup));
            (k, (hi - 1.0).max(1.0 - lo).max(0.0))
        })
        .reduce(|| (usize::MAX, -1.0), |x, y| if y.1 > x.1 || (y.1 == x.1 && y.0 < x.0) { y } else { x });
    let support = all[best].clone();
    let (values, vectors) = hermitian_eigen(&principal(&gram, &support));
    let col = if values[values.len() - 1] - 1.0 >= 1.0 - values[0] { values.len() - 1 } else { 0 };
    let mut direction = vec![C64::new(0.0, 0.0); n];
    for (a, &j) in support.iter().enumerate() {
        direction[j] = vectors[(a, col)];
    }
    Ok(RipReport { s, delta_s: delta, witness_support: support, witness_direction: direction, supports_checked: all.len() as u64 })
}

/// `|‖Ax‖² − 1|`.
pub fn isometry_defect(a: &CMatrix, x: &[C64]) -> f64 {
    let y = a * DVector::from_column_slice(x);
    (y.norm_squared() - 1.0).abs()
}

/// A realized subsampled matrix together with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RipInstance {
    pub n: usize,
    pub m: f64,
    pub k: f64,
    pub selector_seed: u64,
    pub selected: Vec<usize>,
    #[serde(skip)]
    pub matrix: CMatrix,
}

impl RipInstance {
    pub fn from_unitary(u: &CMatrix, m: f64, seed: u64) -> Result<Self> {
        let n = u.nrows();
        if u.ncols() != n {
            return Err(Error::Shape(format!("U must be square, got {:?}", u.shape())));
        }
        let residual = unitarity_residual(u);
        if residual > UNITARY_TOL {
            return Err(Error::Domain(format!("U is not unitary: max |U*U − I| = {residual:e}")));
        }
        check_budget(n, m)?;
        let selected = sample_selectors(n, m, seed)?;
        let matrix = subsample(u, &selected, m)?;
        Ok(Self { n, m, k: boundedness_constant(u), selector_seed: seed, selected, matrix })
    }

    pub fn dft(n: usize, m: f64, seed: u64) -> Result<Self> {
        Self::from_unitary(&build_dft(n)?, m, seed)
    }
}

/// Inputs of the sample-complexity condition
/// `m ≥ s K² δ⁻² max{d₁ (ln s)² ln m ln N, d₂ ln(1/η)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityParams {
    pub s: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub delta: f64,
    pub eta: f64,
    pub d1: f64,
    pub d2: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Complexity {
    pub params: ComplexityParams,
    /// Smallest m from which the condition holds for every larger m.
    pub m_star: u64,
    pub log_base: &'static str,
    pub log_squared: &'static str,
    /// d₁ and d₂ are always user-fitted.
    pub fitted: bool,
}

impl ComplexityParams {
    fn check(&self) -> Result<()> {
        let ok = self.s >= 1
            && self.n >= 1
            && self.k > 0.0
            && self.k.is_finite()
            && self.delta > 0.0
            && self.delta <= 1.0
            && self.eta > 0.0
            && self.eta <= 1.0
            && self.d1 > 0.0
            && self.d2 > 0.0
            && self.d1.is_finite()
            && self.d2.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid sample-complexity parameters {self:?}")))
        }
    }

    fn prefactor(&self) -> f64 {
        self.s as f64 * self.k * self.k / (self.delta * self.delta)
    }

    /// Right-hand side at m.
    pub fn required(&self, m: u64) -> f64 {
        let ls = (self.s as f64).ln();
        let log_part = self.d1 * ls * ls * (m as f64).ln() * (self.n as f64).ln();
        self.prefactor() * log_part.max(self.d2 * (1.0 / self.eta).ln())
    }

    pub fn holds(&self, m: u64) -> bool {
        m as f64 >= self.required(m)
    }
}

/// The condition reads `m ≥ a ln m` and `m ≥ b`; `m − a ln m` increases for
/// m ≥ a, so bisection runs there and a short downward walk handles a ≤ 3.
pub fn sample_complexity(params: ComplexityParams) -> Result<Complexity> {
    params.check()?;
    let ls = (params.s as f64).ln();
    let a = params.prefactor() * params.d1 * ls * ls * (params.n as f64).ln();
    let floor = (a.ceil() as u64).max(1);
    if floor > COMPLEXITY_CAP {
        return Err(Error::Domain(format!("no solution below 2^60 for {params:?}")));
    }
    let mut hi = floor;
    while !params.holds(hi) {
        hi = hi.checked_mul(2).filter(|&h| h <= COMPLEXITY_CAP).ok_or_else(|| Error::Domain(format!("no solution below 2^60 for {params:?}")))?;
    }
    let mut lo = floor;
    if params.holds(lo) {
        hi = lo;
    } else {
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if params.holds(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let mut m_star = hi;
    if m_star == floor {
        while m_star > 1 && params.holds(m_star - 1) {
            m_star -= 1;
        }
    }
    Ok(Complexity { params, m_star, log_base: "natural", log_squared: "(ln s)^2", fitted: true })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureEstimate {
    pub n: usize,
    pub m: f64,
    pub s: usize,
    pub delta: f64,
    pub reps: usize,
    pub seed: u64,
    pub failures: u64,
    pub estimate: f64,
    /// Two-sided 95% Clopper-Pearson interval.
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub mean_selected: f64,
}

/// Fraction of Bernoulli selector draws for the N-point DFT with δ_s ≥ δ.
/// Draw r uses stream r of the seeded generator.
pub fn estimate_failure_probability(n: usize, m: f64, s: usize, delta: f64, reps: usize, seed: u64) -> Result<FailureEstimate> {
    if reps == 0 {
        return Err(Error::Domain("need at least one replication".into()));
    }
    check_budget(n, m)?;
    if !(m > 0.0) {
        return Err(Error::Domain("row budget m must be positive".into()));
    }
    check_sparsity(n, s, DEFAULT_SUPPORT_CAP)?;
    let u = build_dft(n)?;
    let draws: Vec<Result<(bool, usize)>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let selected = selectors_with(n, m, &mut stream_rng(seed, r as u64));
            let a = subsample(&u, &selected, m)?;
            let report = restricted_isometry_constant(&a, s, DEFAULT_SUPPORT_CAP)?;
            Ok((report.delta_s >= delta, selected.len()))
        })
        .collect();
    let mut failures = 0u64;
    let mut total = 0usize;
    for d in draws {
        let (fail, size) = d?;
        failures += fail as u64;
        total += size;
    }
    let (ci_lower, ci_upper) = clopper_pearson(failures, reps as u64, 0.95);
    Ok(FailureEstimate {
        n,
        m,
        s,
        delta,
        reps,
        seed,
        failures,
        estimate: failures as f64 / reps as f64,
        ci_lower,
        ci_upper,
        mean_selected: total as f64 / reps as f64,
    })
}

/// A finitely supported isotropic row distribution with `max ‖X‖_∞ ≤ K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BosSystem {
    pub rows: Vec<Vec<C64>>,
    pub probs: Vec<f64>,
    #[serde(rename = "K")]
    pub k: f64,
    pub isotropy_residual: f64,
    pub sup_norm: f64,
}

pub const ISOTROPY_TOL: f64 = 1e-8;

/// Checks `Σ_r p_r X_r X_r* = I` entrywise and `max_r ‖X_r‖_∞ ≤ K`.
/// Rows are uniform when `probs` is omitted.
pub fn check_bos(rows: Vec<Vec<C64>>, probs: Option<Vec<f64>>, k: f64) -> Result<BosSystem> {
    let n = rows.first().map(Vec::len).ok_or_else(|| Error::Domain("empty row system".into()))?;
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Shape("rows must be nonempty and of equal length".into()));
    }
    let probs = probs.unwrap_or_else(|| vec![1.0 / rows.len() as f64; rows.len()]);
    if probs.len() != rows.len() || probs.iter().any(|&p| !(p >= 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain("row probabilities must be nonnegative, one per row, and sum to 1".into()));
    }
    let mut cov = CMatrix::zeros(n, n);
    for (row, &p) in rows.iter().zip(&probs) {
        let x = DVector::from_column_slice(row);
        cov += (&x * x.adjoint()) * C64::new(p, 0.0);
    }
    cov -= CMatrix::identity(n, n);
    let isotropy_residual = cov.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if isotropy_residual > ISOTROPY_TOL {
        return Err(Error::Domain(format!("row system is not isotropic: max residual {isotropy_residual:e}")));
    }
    let sup_norm = rows.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if sup_norm > k * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("max |X_i| = {sup_norm} exceeds K = {k}")));
    }
    Ok(BosSystem { rows, probs, k, isotropy_residual, sup_norm })
}

impl BosSystem {
    /// The m×N matrix with rows `X_i/√m`, X_i drawn independently.
    pub fn sample_matrix(&self, m: usize, seed: u64) -> Result<CMatrix> {
        if m == 0 {
            return Err(Error::Domain("need at least one row".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.rows[0].len();
        let scale = C64::new(1.0 / (m as f64).sqrt(), 0.0);
        let mut out = CMatrix::zeros(m, n);
        for i in 0..m {
            let mut v = rng.random::<f64>();
            let mut r = self.rows.len() - 1;
            for (j, &p) in self.probs.iter().enumerate() {
                if v < p {
                    r = j;
                    break;
                }
                v -= p;
            }
            for c in 0..n {
                out[(i, c)] = self.rows[r][c] * scale;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dft_small() {
        assert!((build_dft(1).unwrap()[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        let u = build_dft(2).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((u[(1, 1)] - C64::new(-h, 0.0)).norm() < 1e-15);
        assert!(unitarity_residual(&build_dft(8).unwrap()) < 1e-12);
        assert!((boundedness_constant(&build_dft(8).unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn selectors_extremes() {
        assert_eq!(sample_selectors(6, 6.0, 3).unwrap(), (0..6).collect::<Vec<_>>());
        assert!(sample_selectors(6, 0.0, 3).unwrap().is_empty());
        assert!(sample_selectors(6, 7.0, 3).is_err());
    }

    #[test]
    fn full_unitary_is_isometry() {
        let u = build_dft(6).unwrap();
        let r = restricted_isometry_constant(&u, 3, DEFAULT_SUPPORT_CAP).unwrap();
        assert!(r.delta_s < 1e-10);
    }

    #[test]
    fn dft_two_rows() {
        let u = build_dft(4).unwrap();
        let a = subsample(&u, &[0, 1], 2.0).unwrap();
        let r = restricted_isometry_constant(&a, 1, DEFAULT_SUPPORT_CAP).unwrap();
        assert!(r.delta_s < 1e-12);
        let empty = subsample(&u, &[], 2.0).unwrap();
        assert_eq!(empty.shape(), (0, 4));
        assert!((restricted_isometry_constant(&empty, 2, DEFAULT_SUPPORT_CAP).unwrap().delta_s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn witness_reproduces_delta() {
        let u = build_dft(8).unwrap();
        let a = subsample(&u, &[0, 2, 3, 7], 4.0).unwrap();
        let r = restricted_isometry_constant(&a, 2, DEFAULT_SUPPORT_CAP).unwrap();
        assert!((isometry_defect(&a, &r.witness_direction) - r.delta_s).abs() < 1e-9);
    }

    #[test]
    fn capacity_error() {
        let a = CMatrix::zeros(2, 40);
        assert!(matches!(restricted_isometry_constant(&a, 20, DEFAULT_SUPPORT_CAP), Err(Error::Capacity { .. })));
    }

    #[test]
    fn complexity_examples() {
        let p = ComplexityParams { s: 2, k: 1.0, delta: 0.5, eta: 0.1, d1: 1.0, d2: 1.0, n: 16 };
        let c = sample_complexity(p).unwrap();
        assert_eq!(c.m_star, 40);
        assert!(p.holds(40) && !p.holds(39));
        let trivial = ComplexityParams { s: 1, k: 1.0, delta: 1.0, eta: 1.0, d1: 1.0, d2: 1.0, n: 16 };
        assert_eq!(sample_complexity(trivial).unwrap().m_star, 1);
    }

    #[test]
    fn bos_checks() {
        let n = 4;
        let u = build_dft(n).unwrap();
        let rows: Vec<Vec<C64>> = (0..n).map(|i| (0..n).map(|j| u[(i, j)] * (n as f64).sqrt()).collect()).collect();
        let sys = check_bos(rows.clone(), None, 1.0).unwrap();
        assert!(sys.isotropy_residual < 1e-12);
        let basis: Vec<Vec<C64>> = (0..n)
            .map(|i| (0..n).map(|j| C64::new(if i == j { 2.0 } else { 0.0 }, 0.0)).collect())
            .collect();
        assert!(check_bos(basis.clone(), None, 2.0).is_ok());
        assert!(check_bos(basis, None, 1.0).is_err());
        let mut repeated = rows;
        repeated[1] = repeated[0].clone();
        assert!(check_bos(repeated, None, 1.0).is_err());
    }
}
