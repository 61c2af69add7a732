mod support;

use std::f64::consts::PI;

use approx::assert_relative_eq;
use chaintail::linalg::{CMatrix, C64};
use chaintail::procsim::*;
use chaintail::stats::{clopper_pearson_lower, clopper_pearson_upper};
use chaintail::tailcalc::{azuma_uniform_bound, mixed_tail_bound, ConstantRegistry};
use proptest::prelude::*;
use rand::Rng;
use rayon::ThreadPoolBuilder;
use support::rng;

fn rademacher_martingale(coefficients: Vec<Vec<f64>>) -> MartingaleModel {
    MartingaleModel { coefficients, driver: Distribution::Rademacher, step_bounds: None, labels: None }
}

fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

fn binomial_coeff(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Law of |Σ_{i≤n} ε_i| for Rademacher ε.
fn abs_sum_law(n: u64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for k in 0..=n {
        let v = (2.0 * k as f64 - n as f64).abs();
        let p = binomial_coeff(n, k) / 2f64.powi(n as i32);
        match out.iter_mut().find(|a| a.0 == v) {
            Some(a) => a.1 += p,
            None => out.push((v, p)),
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn binomial_cdf(k: u64, n: u64, p: f64) -> f64 {
    (0..=k).map(|j| binomial_coeff(n, j) * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32)).sum()
}

#[test]
fn enumeration_matches_binomial_law() {
    for n in 1..=10u64 {
        let law = enumerate_martingale_family(&rademacher_martingale(vec![vec![1.0; n as usize]])).unwrap();
        let oracle = abs_sum_law(n);
        assert_eq!(law.atoms.len(), oracle.len());
        for ((a, p), (b, q)) in law.atoms.iter().zip(&oracle) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
            assert_relative_eq!(p, q, epsilon = 1e-12);
        }
        let decoupled = enumerate_chaos(&ChaosModel { matrices: vec![identity(n as usize)], xi: Distribution::Rademacher }, true).unwrap();
        for x in [0.0, 1.0, 2.0, 5.0] {
            assert_relative_eq!(decoupled.tail(x), law.tail(x), epsilon = 1e-12);
        }
    }
    // ‖ξ‖² = n for sign vectors
    let flat = enumerate_chaos(&ChaosModel { matrices: vec![identity(6)], xi: Distribution::Rademacher }, false).unwrap();
    assert_eq!(flat.atoms.len(), 1);
    assert_relative_eq!(flat.atoms[0].0, 0.0, epsilon = 1e-12);
}

#[test]
fn monte_carlo_agrees_with_enumeration() {
    let reps = 20_000;
    let mart = rademacher_martingale(vec![vec![1.0, 0.5, -0.5, 0.25, 1.0, 0.0, 0.3, -1.0], vec![0.2, 1.0, 1.0, -0.7, 0.0, 0.4, 0.5, 0.1]]);
    let agree = compare_with_exact(&enumerate_martingale_family(&mart).unwrap(), &simulate_martingale_family(&mart, reps, 5).unwrap(), 0.01, 8)
        .unwrap();
    assert!(agree.agrees, "{agree:?}");

    let lin = LinearModel { weights: vec![vec![1.0, -1.0], vec![0.5, 1.0], vec![1.0, 0.0]], components: vec![Distribution::Rademacher; 2], labels: None };
    let agree = compare_with_exact(&enumerate_squares(&lin, 3).unwrap(), &simulate_squares(&lin, 3, reps, 6).unwrap(), 0.01, 8).unwrap();
    assert!(agree.agrees, "{agree:?}");
    let agree = compare_with_exact(&enumerate_empirical(&lin, 4).unwrap(), &simulate_empirical(&lin, 4, reps, 7).unwrap(), 0.01, 8).unwrap();
    assert!(agree.agrees, "{agree:?}");

    let mut r = rng(8);
    let matrices: Vec<CMatrix> = (0..2).map(|_| support::random_matrix(&mut r, 3, 4, true)).collect();
    let chaos = ChaosModel { matrices, xi: Distribution::Rademacher };
    for decoupled in [false, true] {
        let agree =
            compare_with_exact(&enumerate_chaos(&chaos, decoupled).unwrap(), &simulate_chaos(&chaos, reps, 9, decoupled).unwrap(), 0.01, 8)
                .unwrap();
        assert!(agree.agrees, "decoupled = {decoupled}: {agree:?}");
    }
}

#[test]
fn gaussian_increment_mean() {
    let model = GaussianModel { covariance: vec![vec![1.0, 0.0], vec![0.0, 1.0]], labels: None };
    let s = simulate_gaussian(&model, Base::Point(0), 100_000, 10).unwrap();
    let mean = s.values.iter().sum::<f64>() / s.values.len() as f64;
    // E|g₂ − g₁| = 2/√π
    assert!((mean - 2.0 / PI.sqrt()).abs() < 0.012, "{mean}");
    assert_eq!(s.base_point, Some(0));
    assert!(simulate_gaussian(&model, Base::Point(2), 10, 1).is_err());
}

#[test]
fn squares_variance_with_standard_normals() {
    let m = 5;
    let model = LinearModel { weights: vec![vec![1.0]], components: vec![Distribution::Gaussian { mean: 0.0, sd: 1.0 }], labels: None };
    let s = simulate_squares(&model, m, 100_000, 11).unwrap();
    let second = s.values.iter().map(|v| v * v).sum::<f64>() / s.values.len() as f64;
    assert!((second - 2.0 / m as f64).abs() < 0.02, "{second}");
    let l2 = s.l2_sup.as_ref().unwrap();
    assert_eq!(l2.len(), s.values.len());
    // |mean g² − 1| with mean g² = ‖X‖²_{L²(μ_m)}
    assert!(s.values.iter().zip(l2).all(|(a, b)| (a - (b * b - 1.0).abs()).abs() < 1e-12));
}

#[test]
fn selector_symmetrization_and_decoupling_hold() {
    let n = 6;
    let u = CMatrix::from_fn(n, n, |j, k| C64::from_polar(1.0 / (n as f64).sqrt(), -2.0 * PI * (j * k) as f64 / n as f64));
    let chaos = ChaosModel { matrices: vec![support::random_matrix(&mut rng(12), 4, 5, true)], xi: Distribution::Rademacher };
    let report = check_symmetrization_decoupling(&chaos, Some((&u, 3.0, 2)), &[1.0, 2.0, 4.0]).unwrap();
    assert!(report.holds, "{report:?}");
    assert_eq!(report.decoupling.len(), 3);
    assert_eq!(report.symmetrization.len(), 3);
    assert!(check_selector_symmetrization(&identity(11), 3.0, 2, &[1.0]).is_err());
}

#[test]
fn hanson_wright_fit_is_tight_at_an_atom() {
    let b = CMatrix::from_fn(4, 4, |i, j| C64::new(if i == j { 0.0 } else { 1.0 }, 0.0));
    let fit = fit_hanson_wright(&b, &Distribution::Rademacher).unwrap();
    assert!(fit.c_max > 0.0 && fit.c_max.is_finite());
    assert!(fit_hanson_wright(&b, &Distribution::Gaussian { mean: 0.0, sd: 1.0 }).is_err());
}

#[test]
fn fitted_bounds_are_never_paper_confirmed() {
    let mart = rademacher_martingale(vec![vec![1.0, 1.0, 1.0], vec![1.0, -1.0, 0.0]]);
    let s = simulate_martingale_family(&mart, 20_000, 13).unwrap();
    let grid = [1.0, 2.0, 3.0];
    let reg = ConstantRegistry::with_overrides([("mixed.C", 50.0), ("mixed.c", 50.0)]).unwrap();
    let fitted = validate_bound(&s, &mixed_tail_bound(1.0, 1.0, 1.0, 1.0, &reg).unwrap(), &grid).unwrap();
    assert!(fitted.fitted);
    assert_eq!(fitted.summary, Summary::DominatedFitted);

    let lit = validate_bound(&s, &azuma_uniform_bound(1.0, 1.0, &ConstantRegistry::default()).unwrap(), &grid).unwrap();
    assert_eq!(lit.summary, Summary::PaperConfirmed);

    // a threshold that is always exceeded with envelope < 1
    let tiny = ConstantRegistry::with_overrides([("mixed.C", 1e-9), ("mixed.c", 1e-9)]).unwrap();
    let bad = validate_bound(&s, &mixed_tail_bound(1.0, 1.0, 1.0, 1.0, &tiny).unwrap(), &grid).unwrap();
    assert_eq!(bad.summary, Summary::Violated, "{:?}", bad.tail);
}

#[test]
fn moment_estimates_bracket_the_sample_moment() {
    let mart = rademacher_martingale(vec![vec![1.0; 6]]);
    let s = simulate_martingale_family(&mart, 20_000, 14).unwrap();
    let law = enumerate_martingale_family(&mart).unwrap();
    for e in estimate_moments(&s, &[1.0, 2.0, 4.0], 500, 0.99).unwrap() {
        assert!(e.ci_lower <= e.estimate && e.estimate <= e.ci_upper);
        assert!((e.estimate - law.moment(e.p)).abs() < 0.05 * law.moment(e.p), "{e:?}");
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let lin = LinearModel { weights: vec![vec![1.0, 0.5], vec![-0.3, 1.0]], components: vec![Distribution::Uniform { lo: -1.0, hi: 1.0 }, Distribution::Rademacher], labels: None };
    let run = || simulate_squares(&lin, 7, 5_000, 15).unwrap();
    let here = run();
    for threads in [1, 3, 8] {
        let pool = ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        assert_eq!(pool.install(run), here);
    }
    assert_ne!(simulate_squares(&lin, 7, 5_000, 16).unwrap().values, here.values);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gaussian_metric_is_canonical(seed in any::<u64>(), n in 1usize..6) {
        let mut r = rng(seed);
        let a: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
        let cov: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * a[j][k]).sum()).collect()).collect();
        let metric = GaussianModel { covariance: cov.clone(), labels: None }.metric().unwrap();
        for s in 0..n {
            for t in 0..n {
                let d2 = (cov[s][s] + cov[t][t] - 2.0 * cov[s][t]).max(0.0);
                prop_assert!((metric.dist(s, t) - d2.sqrt()).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn samples_are_well_formed(seed in any::<u64>(), reps in 1usize..300, n in 1usize..5) {
        let mart = rademacher_martingale(vec![vec![1.0; n], (0..n).map(|i| i as f64 - 1.0).collect()]);
        let s = simulate_martingale_family(&mart, reps, seed).unwrap();
        prop_assert_eq!(s.values.len(), reps);
        prop_assert_eq!(s.replications, reps);
        prop_assert!(s.values.iter().all(|v| *v >= 0.0 && v.is_finite()));
        prop_assert_eq!(&simulate_martingale_family(&mart, reps, seed).unwrap(), &s);
    }

    #[test]
    fn clopper_pearson_matches_binomial_cdf(n in 1u64..120, frac in 0.0f64..1.0, level in 0.8f64..0.999) {
        let k = ((n as f64) * frac).floor() as u64;
        let up = clopper_pearson_upper(k, n, level);
        let lo = clopper_pearson_lower(k, n, level);
        prop_assert!(lo <= k as f64 / n as f64 && k as f64 / n as f64 <= up);
        if k < n {
            prop_assert!((binomial_cdf(k, n, up) - (1.0 - level)).abs() < 1e-8);
        }
        if k > 0 {
            prop_assert!((1.0 - binomial_cdf(k - 1, n, lo) - (1.0 - level)).abs() < 1e-8);
        }
    }
}
