use rayon::prelude::*;
use serde::Serialize;

use super::SupremumSample;
use crate::error::{Error, Result};
use crate::stats::{clopper_pearson_lower, clopper_pearson_upper, stream_rng};
use crate::tailcalc::{ConstantsUsed, MomentBound, TailBound};
use rand::Rng;

/// One-sided confidence used for every verdict.
pub const CONFIDENCE: f64 = 0.99;
pub const DEFAULT_RESAMPLES: usize = 1000;
/// Stream offset of bootstrap generators, clear of replication streams.
const BOOTSTRAP_STREAM: u64 = 1 << 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Dominated,
    Violated,
    Inconclusive,
}

/// Overall label. Only bounds without fitted constants can be paper-confirmed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Summary {
    PaperConfirmed,
    DominatedFitted,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailCheck {
    pub u: f64,
    pub threshold: f64,
    pub envelope: f64,
    pub exceedances: u64,
    pub empirical: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub p: f64,
    pub estimate: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCheck {
    pub bound_name: String,
    pub p: f64,
    pub bound: f64,
    pub estimate: MomentEstimate,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub bound: String,
    pub fitted: bool,
    pub constants_used: ConstantsUsed,
    pub replications: usize,
    pub seed: u64,
    pub tail: Vec<TailCheck>,
    pub moments: Vec<MomentCheck>,
    pub summary: Summary,
    pub notes: Vec<String>,
}

fn summarize(verdicts: impl Iterator<Item = Verdict>, fitted: bool) -> Summary {
    let v: Vec<Verdict> = verdicts.collect();
    if v.contains(&Verdict::Violated) {
        Summary::Violated
    } else if v.contains(&Verdict::Inconclusive) || v.is_empty() {
        Summary::Inconclusive
    } else if fitted {
        Summary::DominatedFitted
    } else {
        Summary::PaperConfirmed
    }
}

fn verdict(lower: f64, upper: f64, bound: f64) -> Verdict {
    if upper <= bound {
        Verdict::Dominated
    } else if lower > bound {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    }
}

fn check_sample(sample: &SupremumSample) -> Result<()> {
    if sample.values.is_empty() {
        return Err(Error::Domain("empty sample".into()));
    }
    if let Some(v) = sample.values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!("sample values must be finite and nonnegative, got {v}")));
    }
    Ok(())
}

/// Empirical `P(sup ≥ threshold(u))` with one-sided 99% Clopper-Pearson
/// bounds; dominated iff the upper bound is at most the envelope, violated
/// iff the lower bound exceeds it.
pub fn validate_bound(sample: &SupremumSample, bound: &TailBound, u_grid: &[f64]) -> Result<ValidationReport> {
    check_sample(sample)?;
    let n = sample.values.len() as u64;
    let mut tail = Vec::with_capacity(u_grid.len());
    let mut unresolved = false;
    for &u in u_grid {
        let pt = bound.at(u)?;
        let k = sample.values.iter().filter(|&&v| v >= pt.threshold).count() as u64;
        let (lo, hi) = (clopper_pearson_lower(k, n, CONFIDENCE), clopper_pearson_upper(k, n, CONFIDENCE));
        let v = verdict(lo, hi, pt.envelope);
        unresolved |= k == 0 && v == Verdict::Inconclusive;
        tail.push(TailCheck {
            u,
            threshold: pt.threshold,
            envelope: pt.envelope,
            exceedances: k,
            empirical: k as f64 / n as f64,
            ci_lower: lo,
            ci_upper: hi,
            verdict: v,
        });
    }
    let mut notes = Vec::new();
    if unresolved {
        notes.push(format!(
            "no exceedances observed but the envelope lies below the resolution of {n} replications \
             (upper bound {:.3e}); this regime is not reachable by plain Monte Carlo",
            clopper_pearson_upper(0, n, CONFIDENCE)
        ));
    }
    let summary = summarize(tail.iter().map(|c| c.verdict), bound.fitted);
    Ok(ValidationReport {
        bound: bound.name.clone(),
        fitted: bound.fitted,
        constants_used: bound.constants_used.clone(),
        replications: sample.replications,
        seed: sample.seed,
        tail,
        moments: Vec::new(),
        summary,
        notes,
    })
}

/// `(mean v^p)^{1/p}` with percentile-bootstrap intervals at two-sided level
/// `level`. Resample b uses a dedicated generator stream.
pub fn estimate_moments(sample: &SupremumSample, p_list: &[f64], resamples: usize, level: f64) -> Result<Vec<MomentEstimate>> {
    check_sample(sample)?;
    if let Some(p) = p_list.iter().find(|&&p| !(p >= 1.0) || !p.is_finite()) {
        return Err(Error::Domain(format!("moment order must be a finite p >= 1, got {p}")));
    }
    if resamples == 0 {
        return Err(Error::Domain("need at least one bootstrap resample".into()));
    }
    let v = &sample.values;
    let n = v.len();
    let power_means = |draw: &mut dyn FnMut() -> f64| -> Vec<f64> {
        let mut sums = vec![0.0; p_list.len()];
        for _ in 0..n {
            let x = draw();
            for (s, &p) in sums.iter_mut().zip(p_list) {
                *s += x.powf(p);
            }
        }
        sums.iter().zip(p_list).map(|(s, &p)| (s / n as f64).powf(1.0 / p)).collect()
    };
    let mut idx = 0;
    let point = power_means(&mut || {
        idx += 1;
        v[idx - 1]
    });
    let boot: Vec<Vec<f64>> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(sample.seed, BOOTSTRAP_STREAM + b as u64);
            power_means(&mut || v[rng.random_range(0..n)])
        })
        .collect();
    let alpha = 0.5 * (1.0 - level);
    let pick = |sorted: &[f64], q: f64| sorted[((q * resamples as f64).floor() as usize).min(resamples - 1)];
    Ok(p_list
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let mut col: Vec<f64> = boot.iter().map(|r| r[j]).collect();
            col.sort_by(f64::total_cmp);
            MomentEstimate { p, estimate: point[j], ci_lower: pick(&col, alpha), ci_upper: pick(&col, 1.0 - alpha) }
        })
        .collect())
}

/// Moment bounds against bootstrap intervals whose sides each have 99% coverage.
pub fn validate_moment_bounds(sample: &SupremumSample, bounds: &[MomentBound], resamples: usize) -> Result<ValidationReport> {
    let p_list: Vec<f64> = bounds.iter().map(|b| b.p).collect();
    let est = estimate_moments(sample, &p_list, resamples, 1.0 - 2.0 * (1.0 - CONFIDENCE))?;
    let moments: Vec<MomentCheck> = bounds
        .iter()
        .zip(est)
        .map(|(b, e)| MomentCheck { bound_name: b.name.clone(), p: b.p, bound: b.value, verdict: verdict(e.ci_lower, e.ci_upper, b.value), estimate: e })
        .collect();
    let fitted = bounds.iter().any(|b| b.fitted);
    let mut constants_used = ConstantsUsed::new();
    for b in bounds {
        constants_used.extend(b.constants_used.clone());
    }
    Ok(ValidationReport {
        bound: bounds.first().map(|b| b.name.clone()).unwrap_or_default(),
        fitted,
        constants_used,
        replications: sample.replications,
        seed: sample.seed,
        tail: Vec::new(),
        summary: summarize(moments.iter().map(|m| m.verdict), fitted),
        moments,
        notes: Vec::new(),
    })
}

/// Smallest λ in `[lo, hi]` (to relative precision 10⁻⁶) for which the bound
/// built from λ is dominated at every grid point. Thresholds must grow with λ.
pub fn minimal_dominating_scale<F>(sample: &SupremumSample, u_grid: &[f64], lo: f64, hi: f64, build: F) -> Result<Option<f64>>
where
    F: Fn(f64) -> Result<TailBound>,
{
    let dominated = |lam: f64| -> Result<bool> {
        Ok(validate_bound(sample, &build(lam)?, u_grid)?.tail.iter().all(|c| c.verdict == Verdict::Dominated))
    };
    if !(0.0 < lo && lo < hi) {
        return Err(Error::Domain(format!("need 0 < lo < hi, got [{lo}, {hi}]")));
    }
    if !dominated(hi)? {
        return Ok(None);
    }
    if dominated(lo)? {
        return Ok(Some(lo));
    }
    let (mut a, mut b) = (lo, hi);
    while b > a * (1.0 + 1e-6) {
        let mid = (a * b).sqrt();
        if dominated(mid)? {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(Some(b))
}

/// Smallest multiplier of a bound that dominates the upper bootstrap limit.
pub fn minimal_moment_constant(estimate: &MomentEstimate, unit_bound: f64) -> f64 {
    if unit_bound > 0.0 {
        estimate.ci_upper / unit_bound
    } else if estimate.ci_upper == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}
