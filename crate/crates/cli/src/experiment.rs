//! `simulate --config file.json`: Monte Carlo run plus bound validation.

use std::collections::BTreeMap;

use chaintail::metric::{gamma_exact, gamma_greedy, truncation_level, FiniteMetricSpace, GammaMode, DEFAULT_GAMMA_CAP};
use chaintail::procsim::{
    self, compare_with_exact, empirical_parameters, enumerate_chaos, enumerate_empirical, enumerate_martingale_family,
    enumerate_squares, estimate_moments, linear_form_psi_norm, squares_parameters, validate_bound,
    validate_moment_bounds, Agreement, Base, MomentEstimate, ProcessModel, SimOptions, SupremumSample,
    ValidationReport, Verdict,
};
use chaintail::tailcalc::{self as tc, ConstantRegistry, MomentBound, SchattenRadii, TailBound};
use chaintail::{Error, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_REPS: usize = 10_000;
const EXACT_LEVEL: f64 = 0.01;
const EXACT_POINTS: usize = 20;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaPolicy {
    /// Exhaustive search; refuses index sets above `gamma_cap`.
    #[default]
    Exact,
    /// Farthest-point sequence (an upper estimate).
    Greedy,
    /// Chebyshev radius, a lower estimate of γ_{α,p} when p < 2 and 0 otherwise.
    Chebyshev,
}

/// Bound to check against the simulated supremum. Omitted parameters are
/// derived from the model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BoundSpec {
    Gaussian {
        gamma2: Option<f64>,
        sigma: Option<f64>,
    },
    Azuma {
        gamma2: Option<f64>,
        diam: Option<f64>,
    },
    PsiAlpha {
        alpha: f64,
        gamma: f64,
        diam: f64,
    },
    Empirical {
        gamma2: Option<f64>,
        gamma1: Option<f64>,
        sigma: Option<f64>,
        #[serde(rename = "K")]
        k: Option<f64>,
    },
    Squares {
        gamma2: Option<f64>,
        radius: Option<f64>,
        sigma: Option<f64>,
        #[serde(rename = "K")]
        k: Option<f64>,
    },
    Chaos {
        xi_psi2: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ProcessModel,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub reps: Option<usize>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub base: Base,
    #[serde(default)]
    pub decoupled: bool,
    #[serde(default)]
    pub bound: Option<BoundSpec>,
    #[serde(default)]
    pub u_grid: Vec<f64>,
    #[serde(default)]
    pub p_list: Vec<f64>,
    #[serde(default)]
    pub gamma: GammaPolicy,
    #[serde(default = "default_cap")]
    pub gamma_cap: usize,
    /// Compare the sample with exhaustive enumeration.
    #[serde(default)]
    pub exact: bool,
    /// Fitted constants, applied on top of `--fit`.
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
}

fn default_cap() -> usize {
    DEFAULT_GAMMA_CAP
}

#[derive(Debug, Serialize)]
pub struct SampleSummary {
    pub replications: usize,
    pub seed: u64,
    pub mean: f64,
    pub max: f64,
    pub base_point: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct ExperimentResult {
    pub sample: SampleSummary,
    pub gamma_policy: GammaPolicy,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<ValidationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moments: Option<ValidationReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub moment_estimates: Vec<MomentEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<Agreement>,
    pub fitted: bool,
}

impl ExperimentResult {
    pub fn violated(&self) -> bool {
        let tail = self.tail.iter().flat_map(|r| r.tail.iter().map(|c| c.verdict));
        let moments = self.moments.iter().flat_map(|r| r.moments.iter().map(|c| c.verdict));
        tail.chain(moments).any(|v| v == Verdict::Violated)
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    reg: &'a ConstantRegistry,
}

impl Ctx<'_> {
    fn gamma(&self, space: &FiniteMetricSpace, alpha: f64, p: f64) -> Result<f64> {
        match self.cfg.gamma {
            GammaPolicy::Exact => Ok(gamma_exact(space, alpha, p, self.cfg.gamma_cap)?.value),
            GammaPolicy::Greedy => Ok(gamma_greedy(space, alpha, p)?.value),
            GammaPolicy::Chebyshev => Ok(if truncation_level(p)? == 0 { space.chebyshev().1 } else { 0.0 }),
        }
    }

    fn m(&self) -> Result<usize> {
        self.cfg.m.ok_or_else(|| Error::Domain("this model needs the sample count `m`".into()))
    }

    fn radii(&self, model: &procsim::ChaosModel) -> Result<SchattenRadii> {
        let mode = if self.cfg.gamma == GammaPolicy::Exact { GammaMode::Exact } else { GammaMode::Greedy };
        let mut radii = tc::schatten_radii(&model.matrices, mode, self.cfg.gamma_cap)?;
        if self.cfg.gamma == GammaPolicy::Chebyshev {
            radii.gamma2_dinf = self.gamma(&tc::operator_metric(&model.matrices)?, 2.0, 1.0)?;
        }
        Ok(radii)
    }

    /// Tail bound and, for each p in `p_list`, the matching moment bound when one exists.
    fn bounds(&self, spec: &BoundSpec) -> Result<(TailBound, Vec<MomentBound>)> {
        let (cfg, reg) = (self.cfg, self.reg);
        let mismatch = |name: &str| Error::Unsupported(format!("bound `{name}` does not match the model kind"));
        let mut moments = Vec::new();
        let tail = match (spec, &cfg.model) {
            (BoundSpec::Gaussian { gamma2, sigma }, ProcessModel::Gaussian(model)) => {
                let metric = model.metric()?;
                let sigma = sigma.unwrap_or_else(|| model.weak_sigma());
                for &p in &cfg.p_list {
                    moments.push(tc::gaussian_moment_bound(self.gamma(&metric, 2.0, p)?, sigma, p, reg)?);
                }
                let g = match gamma2 {
                    Some(g) => *g,
                    None => self.gamma(&metric, 2.0, 1.0)?,
                };
                tc::gaussian_tail_bound(g, sigma, reg)?
            }
            (BoundSpec::Gaussian { .. }, _) => return Err(mismatch("gaussian")),
            (BoundSpec::Azuma { gamma2, diam }, ProcessModel::MartingaleFamily(model)) => {
                let metric = model.metric()?;
                let g = match gamma2 {
                    Some(g) => *g,
                    None => self.gamma(&metric, 2.0, 1.0)?,
                };
                tc::azuma_uniform_bound(g, diam.unwrap_or_else(|| metric.diameter()), reg)?
            }
            (BoundSpec::Azuma { .. }, _) => return Err(mismatch("azuma")),
            (BoundSpec::PsiAlpha { alpha, gamma, diam }, _) => tc::psi_alpha_tail_bound(*gamma, *diam, *alpha, reg)?,
            (BoundSpec::Empirical { gamma2, gamma1, sigma, k }, ProcessModel::Empirical(model)) => {
                let m = self.m()?;
                let params = empirical_parameters(model)?;
                let (sigma, k) = (sigma.unwrap_or(params.sigma), k.unwrap_or(params.k));
                let g2 = match gamma2 {
                    Some(g) => *g,
                    None => self.gamma(&params.metric, 2.0, 1.0)?,
                };
                let g1 = match gamma1 {
                    Some(g) => *g,
                    None => self.gamma(&params.metric, 1.0, 1.0)?,
                };
                for &p in &cfg.p_list {
                    moments.push(tc::empirical_process_moment_bound(g2, g1, sigma, k, m, p, reg)?);
                }
                tc::empirical_process_bound(g2, g1, sigma, k, m, reg)?
            }
            (BoundSpec::Empirical { .. }, _) => return Err(mismatch("empirical")),
            (BoundSpec::Squares { gamma2, radius, sigma, k }, ProcessModel::Squares(model)) => {
                let m = self.m()?;
                let params = squares_parameters(model)?;
                let radius = radius.unwrap_or(params.radius);
                let (sigma, k) = (sigma.unwrap_or(params.sigma), k.unwrap_or(params.k));
                for &p in &cfg.p_list {
                    let g = match gamma2 {
                        Some(g) => *g,
                        None => self.gamma(&params.metric, 2.0, p)?,
                    };
                    moments.push(tc::squares_moment_bound(g, radius, m, sigma, k, p, reg)?);
                }
                let g = match gamma2 {
                    Some(g) => *g,
                    None => self.gamma(&params.metric, 2.0, 1.0)?,
                };
                tc::squares_tail_bound(g, radius, m, sigma, k, reg)?
            }
            (BoundSpec::Squares { .. }, _) => return Err(mismatch("squares")),
            (BoundSpec::Chaos { xi_psi2 }, ProcessModel::Chaos(model)) => {
                let radii = self.radii(model)?;
                let xi = match xi_psi2 {
                    Some(x) => *x,
                    None => linear_form_psi_norm(&[1.0], std::slice::from_ref(&model.xi), 2.0)?,
                };
                let metric = tc::operator_metric(&model.matrices)?;
                for &p in &cfg.p_list {
                    moments.push(tc::chaos_moment_bound(&radii, self.gamma(&metric, 2.0, p)?, xi, p, reg)?);
                }
                tc::chaos_tail_bound(&radii, xi, reg)?
            }
            (BoundSpec::Chaos { .. }, _) => return Err(mismatch("chaos")),
        };
        Ok((tail, moments))
    }

    fn exact_law(&self) -> Result<procsim::DiscreteLaw> {
        match &self.cfg.model {
            ProcessModel::MartingaleFamily(model) => enumerate_martingale_family(model),
            ProcessModel::Empirical(model) => enumerate_empirical(model, self.m()?),
            ProcessModel::Squares(model) => enumerate_squares(model, self.m()?),
            ProcessModel::Chaos(model) => enumerate_chaos(model, self.cfg.decoupled),
            ProcessModel::Gaussian(_) => Err(Error::Unsupported("a Gaussian model has no finite enumeration".into())),
        }
    }
}

pub fn run(cfg: &ExperimentConfig, seed: u64, reps: usize, resamples: usize, reg: &ConstantRegistry) -> Result<ExperimentResult> {
    let opts = SimOptions { reps, seed, m: cfg.m, base: cfg.base, decoupled: cfg.decoupled };
    let sample: SupremumSample = procsim::simulate(&cfg.model, &opts)?;
    let ctx = Ctx { cfg, reg };

    let exact = if cfg.exact { Some(compare_with_exact(&ctx.exact_law()?, &sample, EXACT_LEVEL, EXACT_POINTS)?) } else { None };

    let (mut tail, mut moments, mut moment_estimates) = (None, None, Vec::new());
    match &cfg.bound {
        Some(spec) => {
            let (tail_bound, moment_bounds) = ctx.bounds(spec)?;
            if !cfg.u_grid.is_empty() {
                tail = Some(validate_bound(&sample, &tail_bound, &cfg.u_grid)?);
            }
            if !moment_bounds.is_empty() {
                moments = Some(validate_moment_bounds(&sample, &moment_bounds, resamples)?);
            } else if !cfg.p_list.is_empty() {
                moment_estimates = estimate_moments(&sample, &cfg.p_list, resamples, 0.95)?;
            }
        }
        None if !cfg.p_list.is_empty() => moment_estimates = estimate_moments(&sample, &cfg.p_list, resamples, 0.95)?,
        None => {}
    }

    let fitted = tail.iter().chain(moments.iter()).any(|r| r.fitted);
    let n = sample.values.len().max(1) as f64;
    Ok(ExperimentResult {
        sample: SampleSummary {
            replications: sample.replications,
            seed: sample.seed,
            mean: sample.values.iter().sum::<f64>() / n,
            max: sample.values.iter().copied().fold(0.0, f64::max),
            base_point: sample.base_point,
        },
        gamma_policy: cfg.gamma,
        tail,
        moments,
        moment_estimates,
        exact,
        fitted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn martingale_config() -> ExperimentConfig {
        serde_json::from_value(json!({
            "model": {"kind": "martingale-family", "coefficients": [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]},
            "bound": {"name": "azuma"},
            "u_grid": [1.0, 2.0],
            "exact": true
        }))
        .unwrap()
    }

    #[test]
    fn config_errors_name_the_field() {
        let e = serde_json::from_value::<ExperimentConfig>(json!({"model": {"kind": "gaussian"}})).unwrap_err();
        assert!(e.to_string().contains("covariance"), "{e}");
        let e = serde_json::from_value::<ExperimentConfig>(json!({
            "model": {"kind": "gaussian", "covariance": [[1.0]]}, "u_gird": [1.0]
        }))
        .unwrap_err();
        assert!(e.to_string().contains("u_gird"), "{e}");
    }

    #[test]
    fn azuma_run_is_dominated() {
        let cfg = martingale_config();
        let r = run(&cfg, 7, 2000, 200, &ConstantRegistry::default()).unwrap();
        assert!(!r.violated());
        assert!(r.exact.as_ref().unwrap().agrees);
        assert_eq!(r.tail.as_ref().unwrap().tail.len(), 2);
    }

    #[test]
    fn mismatched_bound_is_rejected() {
        let mut cfg = martingale_config();
        cfg.bound = Some(BoundSpec::Gaussian { gamma2: None, sigma: None });
        assert!(run(&cfg, 1, 10, 10, &ConstantRegistry::default()).is_err());
    }
}
