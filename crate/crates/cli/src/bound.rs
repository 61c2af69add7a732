//! `bound <name> --params file.json`: direct evaluation of one bound.

use chaintail::linalg::{matrix_from_json, matrix_list, CMatrix};
use chaintail::metric::{gamma_exact, gamma_greedy, GammaMode, DEFAULT_GAMMA_CAP};
use chaintail::tailcalc::{self as tc, BernsteinForm, BernsteinParams, ConstantRegistry, MomentBound, TailBound, TailPoint};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::GammaModeArg;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BoundRequest {
    UnionConstant {},
    UnionProbability { alpha: f64, u: f64, p: f64 },
    MomentsToTails { a: f64, b: f64, alpha: f64 },
    MomentsToTailsMixed { a1: f64, a2: f64, a3: f64 },
    TailsToMoments { a: f64, b: f64, alpha: f64, p: f64 },
    TailsToMomentsMixed { a1: f64, a2: f64, p: f64 },
    SmallSet { individual: Vec<f64>, p: f64, set_size: usize },
    LpFromTail { gamma: f64, c: f64, u_star: f64, alpha: f64, p: f64 },
    ChainingLp { gamma_p: f64, alpha: f64, p: f64 },
    PsiAlpha { gamma: f64, diam: f64, alpha: f64 },
    PsiAlphaMoment { gamma_p: f64, sup_individual: f64, alpha: f64, p: f64 },
    Gaussian { gamma2: f64, sigma: f64 },
    GaussianMoment { gamma2p: f64, sigma: f64, p: f64 },
    Azuma { gamma2: f64, diam: f64 },
    Mixed { gamma2: f64, gamma1: f64, diam2: f64, diam1: f64 },
    MixedMoment { gamma2: f64, gamma1: f64, sup_individual: f64, p: f64 },
    Bernstein {
        #[serde(default)]
        sigma: f64,
        #[serde(default, rename = "K")]
        k: f64,
        #[serde(default)]
        nu: f64,
        #[serde(default)]
        kappa: f64,
        m: usize,
        #[serde(default = "moment_form")]
        form: BernsteinForm,
    },
    Empirical {
        gamma2: f64,
        gamma1: f64,
        sigma: f64,
        #[serde(rename = "K")]
        k: f64,
        m: usize,
    },
    EmpiricalMoment {
        gamma2: f64,
        gamma1: f64,
        sigma: f64,
        #[serde(rename = "K")]
        k: f64,
        m: usize,
        p: f64,
    },
    Squares {
        gamma2: f64,
        radius: f64,
        m: usize,
        sigma: f64,
        #[serde(rename = "K")]
        k: f64,
    },
    SquaresMoment {
        gamma2p: f64,
        radius: f64,
        m: usize,
        sigma: f64,
        #[serde(rename = "K")]
        k: f64,
        p: f64,
    },
    L2Increment { d_psi2: f64, m: usize },
    HansonWright { matrix: Value, c: f64 },
    Chaos {
        #[serde(with = "matrix_list")]
        matrices: Vec<CMatrix>,
        xi_psi2: f64,
        #[serde(default)]
        mode: GammaModeArg,
    },
    ChaosMoment {
        #[serde(with = "matrix_list")]
        matrices: Vec<CMatrix>,
        xi_psi2: f64,
        p: f64,
        #[serde(default)]
        mode: GammaModeArg,
    },
}

fn moment_form() -> BernsteinForm {
    BernsteinForm::MomentCondition
}

#[derive(Debug, Serialize)]
#[serde(tag = "report", rename_all = "kebab-case")]
pub enum BoundReport {
    Tail { bound: TailBound, grid: Vec<TailPoint> },
    Moment { bound: MomentBound },
    Scalar { name: String, value: f64, registry_value: Option<f64>, fitted: bool },
}

impl BoundReport {
    pub fn fitted(&self) -> bool {
        match self {
            BoundReport::Tail { bound, .. } => bound.fitted,
            BoundReport::Moment { bound } => bound.fitted,
            BoundReport::Scalar { fitted, .. } => *fitted,
        }
    }
}

fn gamma_on(matrices: &[CMatrix], p: f64, mode: GammaModeArg) -> chaintail::Result<f64> {
    let metric = tc::operator_metric(matrices)?;
    Ok(match mode {
        GammaModeArg::Exact => gamma_exact(&metric, 2.0, p, DEFAULT_GAMMA_CAP)?.value,
        GammaModeArg::Greedy => gamma_greedy(&metric, 2.0, p)?.value,
    })
}

pub fn evaluate(req: &BoundRequest, u_grid: &[f64], reg: &ConstantRegistry) -> chaintail::Result<BoundReport> {
    use BoundRequest as B;
    let tail = |bound: TailBound| -> chaintail::Result<BoundReport> {
        let grid = u_grid.iter().map(|&u| bound.at(u)).collect::<chaintail::Result<Vec<_>>>()?;
        Ok(BoundReport::Tail { bound, grid })
    };
    let moment = |bound: MomentBound| Ok(BoundReport::Moment { bound });
    match req {
        B::UnionConstant {} => {
            let c = reg.get(tc::KEY_UNION)?;
            Ok(BoundReport::Scalar {
                name: "union-constant".into(),
                value: tc::union_bound_constant(),
                registry_value: Some(c.value),
                fitted: c.fitted,
            })
        }
        B::UnionProbability { alpha, u, p } => {
            let c = reg.get(tc::KEY_UNION)?;
            Ok(BoundReport::Scalar {
                name: "union-probability".into(),
                value: tc::union_bound_probability(*alpha, *u, *p, reg)?,
                registry_value: Some(c.value),
                fitted: c.fitted,
            })
        }
        B::MomentsToTails { a, b, alpha } => tail(tc::moments_to_tails(*a, *b, *alpha)?),
        B::MomentsToTailsMixed { a1, a2, a3 } => tail(tc::moments_to_tails_mixed(*a1, *a2, *a3)?),
        B::TailsToMoments { a, b, alpha, p } => moment(tc::tails_to_moments(*a, *b, *alpha, *p)?),
        B::TailsToMomentsMixed { a1, a2, p } => moment(tc::tails_to_moments_mixed(*a1, *a2, *p)?),
        B::SmallSet { individual, p, set_size } => moment(tc::small_set_moment_bound(individual, *p, *set_size)?),
        B::LpFromTail { gamma, c, u_star, alpha, p } => moment(tc::lp_from_tail(*gamma, *c, *u_star, *alpha, *p)?),
        B::ChainingLp { gamma_p, alpha, p } => moment(tc::chaining_lp_bound(*gamma_p, *alpha, *p, reg)?),
        B::PsiAlpha { gamma, diam, alpha } => tail(tc::psi_alpha_tail_bound(*gamma, *diam, *alpha, reg)?),
        B::PsiAlphaMoment { gamma_p, sup_individual, alpha, p } => {
            moment(tc::psi_alpha_moment_bound(*gamma_p, *sup_individual, *alpha, *p, reg)?)
        }
        B::Gaussian { gamma2, sigma } => tail(tc::gaussian_tail_bound(*gamma2, *sigma, reg)?),
        B::GaussianMoment { gamma2p, sigma, p } => moment(tc::gaussian_moment_bound(*gamma2p, *sigma, *p, reg)?),
        B::Azuma { gamma2, diam } => tail(tc::azuma_uniform_bound(*gamma2, *diam, reg)?),
        B::Mixed { gamma2, gamma1, diam2, diam1 } => tail(tc::mixed_tail_bound(*gamma2, *gamma1, *diam2, *diam1, reg)?),
        B::MixedMoment { gamma2, gamma1, sup_individual, p } => {
            moment(tc::mixed_tail_moment_bound(*gamma2, *gamma1, *sup_individual, *p, reg)?)
        }
        B::Bernstein { sigma, k, nu, kappa, m, form } => {
            let params = BernsteinParams { sigma: *sigma, k: *k, nu: *nu, kappa: *kappa, m: *m };
            tail(tc::bernstein_tail(&params, *form)?)
        }
        B::Empirical { gamma2, gamma1, sigma, k, m } => {
            tail(tc::empirical_process_bound(*gamma2, *gamma1, *sigma, *k, *m, reg)?)
        }
        B::EmpiricalMoment { gamma2, gamma1, sigma, k, m, p } => {
            moment(tc::empirical_process_moment_bound(*gamma2, *gamma1, *sigma, *k, *m, *p, reg)?)
        }
        B::Squares { gamma2, radius, m, sigma, k } => tail(tc::squares_tail_bound(*gamma2, *radius, *m, *sigma, *k, reg)?),
        B::SquaresMoment { gamma2p, radius, m, sigma, k, p } => {
            moment(tc::squares_moment_bound(*gamma2p, *radius, *m, *sigma, *k, *p, reg)?)
        }
        B::L2Increment { d_psi2, m } => tail(tc::l2_increment_tail(*d_psi2, *m)?),
        B::HansonWright { matrix, c } => tail(tc::hanson_wright_tail(&matrix_from_json(matrix)?, *c)?),
        B::Chaos { matrices, xi_psi2, mode } => {
            let radii = tc::schatten_radii(matrices, GammaMode::from(*mode), DEFAULT_GAMMA_CAP)?;
            tail(tc::chaos_tail_bound(&radii, *xi_psi2, reg)?)
        }
        B::ChaosMoment { matrices, xi_psi2, p, mode } => {
            let radii = tc::schatten_radii(matrices, GammaMode::from(*mode), DEFAULT_GAMMA_CAP)?;
            let g = gamma_on(matrices, *p, *mode)?;
            moment(tc::chaos_moment_bound(&radii, g, *xi_psi2, *p, reg)?)
        }
    }
}

/// Builds the request from the positional name and an optional params object.
pub fn request(name: &str, params: Option<Value>) -> Result<BoundRequest, String> {
    let mut obj = match params {
        Some(Value::Object(map)) => map,
        Some(_) => return Err("bound parameters must be a JSON object".into()),
        None => serde_json::Map::new(),
    };
    obj.insert("name".into(), Value::String(name.into()));
    serde_json::from_value(Value::Object(obj)).map_err(|e| format!("bound {name}: {e}"))
}
