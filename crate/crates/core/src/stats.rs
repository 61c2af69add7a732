//! Binomial confidence bounds, exact binomial tests and percentile bootstrap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, Discrete};
use statrs::function::beta::beta_reg;

/// Per-replication generator: stream `rep` of the ChaCha8 generator seeded with `seed`.
pub fn stream_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// One-sided Clopper-Pearson upper bound at confidence `level`.
pub fn clopper_pearson_upper(k: u64, n: u64, level: f64) -> f64 {
    assert!(k <= n && n > 0, "need 0 <= k <= n and n > 0");
    if k == n {
        return 1.0;
    }
    if k == 0 {
        return -((1.0 - level).ln() / n as f64).exp_m1();
    }
    beta_quantile(k as f64 + 1.0, (n - k) as f64, level)
}

/// One-sided Clopper-Pearson lower bound at confidence `level`.
pub fn clopper_pearson_lower(k: u64, n: u64, level: f64) -> f64 {
    assert!(k <= n && n > 0, "need 0 <= k <= n and n > 0");
    if k == 0 {
        return 0.0;
    }
    if k == n {
        return ((1.0 - level).ln() / n as f64).exp();
    }
    beta_quantile(k as f64, (n - k + 1) as f64, 1.0 - level)
}

/// Beta(a, b) quantile by bisection on the regularized incomplete beta function.
fn beta_quantile(a: f64, b: f64, q: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two-sided Clopper-Pearson interval at confidence `level`.
pub fn clopper_pearson(k: u64, n: u64, level: f64) -> (f64, f64) {
    let tail = 0.5 * (1.0 + level);
    (clopper_pearson_lower(k, n, tail), clopper_pearson_upper(k, n, tail))
}

/// Exact two-sided binomial test: total mass of outcomes no more likely than `k`.
pub fn binomial_two_sided_p(k: u64, n: u64, prob: f64) -> f64 {
    let prob = prob.clamp(0.0, 1.0);
    let dist = Binomial::new(prob, n).unwrap();
    let observed = dist.pmf(k);
    let cutoff = observed * (1.0 + 1e-7);
    let total: f64 = (0..=n).map(|j| dist.pmf(j)).filter(|&q| q <= cutoff).sum();
    total.min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Percentile bootstrap for a statistic of a sample.
pub fn bootstrap<R: Rng, F: Fn(&[f64]) -> f64>(
    values: &[f64],
    stat: F,
    resamples: usize,
    level: f64,
    rng: &mut R,
) -> Interval {
    let estimate = stat(values);
    let n = values.len();
    let mut scratch = vec![0.0; n];
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            for s in scratch.iter_mut() {
                *s = values[rng.random_range(0..n)];
            }
            stat(&scratch)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let alpha = 0.5 * (1.0 - level);
    let pick = |q: f64| stats[((q * resamples as f64).floor() as usize).min(resamples - 1)];
    Interval { estimate, lower: pick(alpha), upper: pick(1.0 - alpha) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_successes() {
        // (1 − 0.99)^{1/n} = 1 − ub
        let ub = clopper_pearson_upper(0, 100_000, 0.99);
        assert!((ub - (1.0 - 0.01f64.powf(1e-5))).abs() < 1e-12, "{ub}");
        assert_eq!(clopper_pearson_lower(0, 10, 0.99), 0.0);
        assert_eq!(clopper_pearson_upper(10, 10, 0.99), 1.0);
    }

    #[test]
    fn interval_brackets_estimate() {
        let (lo, hi) = clopper_pearson(30, 100, 0.95);
        assert!(lo < 0.3 && 0.3 < hi);
        assert!((lo - 0.2124).abs() < 1e-3 && (hi - 0.3998).abs() < 1e-3);
    }

    #[test]
    fn binomial_test() {
        assert!((binomial_two_sided_p(5, 10, 0.5) - 1.0).abs() < 1e-12);
        assert!(binomial_two_sided_p(0, 20, 0.5) < 1e-5);
    }

    #[test]
    fn bootstrap_of_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let iv = bootstrap(&[2.0; 10], |v| v.iter().sum::<f64>() / v.len() as f64, 200, 0.95, &mut rng);
        assert_eq!((iv.estimate, iv.lower, iv.upper), (2.0, 2.0, 2.0));
    }
}
