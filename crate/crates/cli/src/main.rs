//! `chaintail`: γ-functionals, explicit bounds and Monte Carlo checks from the command line.
//!
//! Exit status is 0 on success, 1 when a validation verdict is "violated"
//! and 2 on any usage or input error.

mod artifact;
mod bound;
mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use artifact::{parse, Context};
use chaintail::linalg::{matrix_from_json, matrix_to_json, CMatrix};
use chaintail::metric::{
    covering_number, covering_profile, entropy_integral, gamma_entropy, gamma_exact, gamma_greedy, gamma_prime,
    CoverMode, FiniteMetricSpace, GammaMode, DEFAULT_COVER_CAP, DEFAULT_GAMMA_CAP,
};
use chaintail::orlicz::{self, Family};
use chaintail::procsim::{linear_form_psi_norm, Distribution};
use chaintail::ripkit::{
    estimate_failure_probability, restricted_isometry_constant, sample_complexity, ComplexityParams, RipInstance,
    DEFAULT_SUPPORT_CAP,
};
use chaintail::tailcalc::{self as tc, MomentBound, TailBound};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "chaintail", version, about = "Generic chaining bounds, exact oracles and Monte Carlo checks")]
struct Cli {
    /// Cap on worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory for JSON/CSV artifacts.
    #[arg(long, global = true, env = "CHAINTAIL_OUT", default_value = "chaintail-out")]
    out: PathBuf,
    /// File holding a JSON object of fitted constants, e.g. {"chaos.C": 2.0}.
    #[arg(long, global = true)]
    fit: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// γ_{α,p} or γ'_α of a finite metric space.
    Gamma(GammaArgs),
    /// Covering numbers, covering profile and entropy integral.
    Cover(CoverArgs),
    /// ψ_α norm from samples or a closed-form family.
    Orlicz(OrliczArgs),
    /// Evaluate one bound from a JSON parameter file.
    Bound(BoundArgs),
    /// Simulate a process and validate a bound against it.
    Simulate(SimulateArgs),
    /// Restricted isometry constants of subsampled unitaries.
    Rip {
        #[command(subcommand)]
        command: RipCommand,
    },
    /// Schatten radii and chaos bounds of a matrix family.
    Chaos(ChaosArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaModeArg {
    #[default]
    Exact,
    Greedy,
}

impl From<GammaModeArg> for GammaMode {
    fn from(m: GammaModeArg) -> Self {
        match m {
            GammaModeArg::Exact => GammaMode::Exact,
            GammaModeArg::Greedy => GammaMode::Greedy,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum GammaCommandMode {
    Exact,
    Greedy,
    EntropyIntegral,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Variant {
    Standard,
    Partition,
}

#[derive(Debug, Args, Serialize)]
struct GammaArgs {
    /// Metric space JSON: {"dist": [[...]]} or {"points": [[...]], "norm": "l2"}.
    #[arg(long)]
    space: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, value_enum, default_value = "exact")]
    mode: GammaCommandMode,
    #[arg(long, value_enum, default_value = "standard")]
    variant: Variant,
    /// Largest index set for exhaustive search.
    #[arg(long, default_value_t = DEFAULT_GAMMA_CAP)]
    cap: usize,
    /// Largest index set for exact covers inside the entropy integral.
    #[arg(long, default_value_t = DEFAULT_COVER_CAP)]
    cover_cap: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CoverModeArg {
    Exact,
    Greedy,
}

#[derive(Debug, Args, Serialize)]
struct CoverArgs {
    #[arg(long)]
    space: PathBuf,
    /// Radii; without them the full covering profile is reported.
    #[arg(long, value_delimiter = ',')]
    u: Vec<f64>,
    #[arg(long, value_enum, default_value = "exact")]
    mode: CoverModeArg,
    #[arg(long, default_value_t = DEFAULT_COVER_CAP)]
    cap: usize,
    /// Also report the entropy integral for this α.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SampleFormat {
    Text,
    F64le,
}

#[derive(Debug, Args, Serialize)]
struct OrliczArgs {
    /// Sample file (newline-delimited text or little-endian f64).
    #[arg(long, conflicts_with = "family")]
    samples: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: SampleFormat,
    /// Closed-form family as JSON, e.g. '{"family": "gaussian", "sigma": 1}'.
    #[arg(long)]
    family: Option<String>,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = orlicz::DEFAULT_TOL)]
    tol: f64,
    /// Points at which to report the tail envelope 2exp(−(u/‖X‖)^α).
    #[arg(long, value_delimiter = ',')]
    u: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
struct BoundArgs {
    /// Bound name, e.g. gaussian, azuma, empirical, squares, chaos, union-constant.
    name: String,
    /// File holding a JSON object with the bound's parameters.
    #[arg(long)]
    params: Option<PathBuf>,
    /// u values at which to evaluate a tail bound.
    #[arg(long, value_delimiter = ',')]
    u_grid: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
struct SimulateArgs {
    /// Experiment config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config replication count.
    #[arg(long)]
    reps: Option<usize>,
    /// Bootstrap resamples for moment confidence intervals.
    #[arg(long, default_value_t = 1000)]
    resamples: usize,
}

#[derive(Subcommand)]
enum RipCommand {
    /// δ_s of one subsampled DFT (or imported unitary) by support enumeration.
    Exact(RipExactArgs),
    /// Monte Carlo failure probability P(δ_s > δ) over a list of m.
    Curve(RipCurveArgs),
    /// Minimal m satisfying the sample-complexity condition.
    Complexity(RipComplexityArgs),
}

#[derive(Debug, Args, Serialize)]
struct RipExactArgs {
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    m: f64,
    #[arg(long)]
    s: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Unitary matrix JSON to subsample instead of the DFT.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Write the subsampled matrix as JSON here.
    #[arg(long)]
    export: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SUPPORT_CAP)]
    cap: u64,
}

#[derive(Debug, Args, Serialize)]
struct RipCurveArgs {
    #[arg(long = "N")]
    n: usize,
    #[arg(long)]
    s: usize,
    #[arg(long)]
    delta: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    m_list: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
struct RipComplexityArgs {
    #[arg(long)]
    s: usize,
    #[arg(long = "K")]
    k: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    eta: f64,
    #[arg(long)]
    d1: f64,
    #[arg(long)]
    d2: f64,
    #[arg(long = "N")]
    n: usize,
}

#[derive(Debug, Args, Serialize)]
struct ChaosArgs {
    /// JSON array of matrices (2-D arrays, complex entries as [re, im]).
    #[arg(long)]
    matrices: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    mode: GammaModeArg,
    /// ψ₂ norm of the components; defaults to the Rademacher value.
    #[arg(long)]
    xi_psi2: Option<f64>,
    /// Moment orders for the chaos moment bound.
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    /// u values for the chaos tail bound.
    #[arg(long, value_delimiter = ',')]
    u_grid: Vec<f64>,
}

type Outcome = Result<bool, String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    let mut ctx = Context::new(cli.out, cli.fit.as_deref())?;
    match cli.command {
        Command::Gamma(a) => gamma(&mut ctx, a),
        Command::Cover(a) => cover(&mut ctx, a),
        Command::Orlicz(a) => orlicz_cmd(&mut ctx, a),
        Command::Bound(a) => bound_cmd(&mut ctx, a),
        Command::Simulate(a) => simulate(&mut ctx, a),
        Command::Rip { command: RipCommand::Exact(a) } => rip_exact(&mut ctx, a),
        Command::Rip { command: RipCommand::Curve(a) } => rip_curve(&mut ctx, a),
        Command::Rip { command: RipCommand::Complexity(a) } => rip_complexity(&mut ctx, a),
        Command::Chaos(a) => chaos(&mut ctx, a),
    }
}

fn lib<T>(r: chaintail::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn load_space(ctx: &mut Context, path: &PathBuf) -> Result<FiniteMetricSpace, String> {
    let text = ctx.input(path)?;
    FiniteMetricSpace::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn need_seed(seed: Option<u64>, command: &str) -> Result<u64, String> {
    seed.ok_or_else(|| format!("{command} is stochastic and needs --seed"))
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn gamma(ctx: &mut Context, a: GammaArgs) -> Outcome {
    let space = load_space(ctx, &a.space)?;
    let est = match (a.variant, a.mode) {
        (Variant::Standard, GammaCommandMode::Exact) => gamma_exact(&space, a.alpha, a.p, a.cap),
        (Variant::Standard, GammaCommandMode::Greedy) => gamma_greedy(&space, a.alpha, a.p),
        (Variant::Standard, GammaCommandMode::EntropyIntegral) => gamma_entropy(&space, a.alpha, a.cover_cap),
        (Variant::Partition, GammaCommandMode::Exact) => gamma_prime(&space, a.alpha, GammaMode::Exact, a.cap),
        (Variant::Partition, GammaCommandMode::Greedy) => gamma_prime(&space, a.alpha, GammaMode::Greedy, a.cap),
        (Variant::Partition, GammaCommandMode::EntropyIntegral) => {
            gamma_prime(&space, a.alpha, GammaMode::EntropyIntegral, a.cap)
        }
    };
    let est = lib(est)?;
    print!("{}", ctx.write_json("gamma", &a, None, false, &est)?);
    Ok(false)
}

fn cover(ctx: &mut Context, a: CoverArgs) -> Outcome {
    let space = load_space(ctx, &a.space)?;
    let mode = match a.mode {
        CoverModeArg::Exact => CoverMode::Exact,
        CoverModeArg::Greedy => CoverMode::Greedy,
    };
    let entropy = a.alpha.map(|alpha| lib(entropy_integral(&space, alpha, a.cap))).transpose()?;
    let (result, rows): (Value, Vec<Vec<String>>) = if a.u.is_empty() {
        let profile = lib(covering_profile(&space, mode, a.cap))?;
        let rows = profile.radii.iter().zip(&profile.counts).map(|(r, c)| vec![num(*r), c.to_string()]).collect();
        (json!({ "profile": profile, "entropy_integral": entropy }), rows)
    } else {
        let covers = a.u.iter().map(|&u| lib(covering_number(&space, u, mode, a.cap))).collect::<Result<Vec<_>, _>>()?;
        let rows = covers.iter().map(|c| vec![num(c.radius), c.count.to_string()]).collect();
        (json!({ "covers": covers, "entropy_integral": entropy }), rows)
    };
    ctx.write_csv("cover", &["radius", "count"], &rows)?;
    print!("{}", ctx.write_json("cover", &a, None, false, &result)?);
    Ok(false)
}

fn orlicz_cmd(ctx: &mut Context, a: OrliczArgs) -> Outcome {
    let norm = match (&a.samples, &a.family) {
        (Some(path), None) => {
            let samples = match a.format {
                SampleFormat::Text => lib(orlicz::read_samples_text(&ctx.input(path)?))?,
                SampleFormat::F64le => lib(orlicz::read_samples_f64_le(&ctx.input_bytes(path)?))?,
            };
            lib(orlicz::psi_norm_empirical(&samples, a.alpha, a.tol))?
        }
        (None, Some(text)) => {
            let family: Family = serde_json::from_str(text).map_err(|e| format!("--family: {e}"))?;
            lib(orlicz::psi_norm_analytic(family, a.alpha))?
        }
        _ => return Err("orlicz needs exactly one of --samples or --family".into()),
    };
    let tail = a
        .u
        .iter()
        .map(|&u| lib(orlicz::psi_tail_envelope(&norm, u)).map(|p| json!({ "u": u, "envelope": p })))
        .collect::<Result<Vec<_>, _>>()?;
    let result = json!({ "norm": norm, "tail": tail });
    print!("{}", ctx.write_json("orlicz", &a, None, false, &result)?);
    Ok(false)
}

fn bound_cmd(ctx: &mut Context, a: BoundArgs) -> Outcome {
    let params = match &a.params {
        Some(path) => Some(parse::<Value>(path, &ctx.input(path)?)?),
        None => None,
    };
    let req = bound::request(&a.name, params)?;
    let report = lib(bound::evaluate(&req, &a.u_grid, &ctx.registry))?;
    if let bound::BoundReport::Tail { grid, .. } = &report {
        let rows: Vec<_> = grid.iter().map(|p| vec![num(p.u), num(p.threshold), num(p.envelope)]).collect();
        ctx.write_csv("bound", &["u", "threshold", "envelope"], &rows)?;
    }
    let result = json!({ "request": req, "result": report });
    print!("{}", ctx.write_json("bound", &a, None, report.fitted(), &result)?);
    Ok(false)
}

fn simulate(ctx: &mut Context, a: SimulateArgs) -> Outcome {
    let cfg: experiment::ExperimentConfig = parse(&a.config, &ctx.input(&a.config)?)?;
    ctx.extra_constants(&cfg.constants)?;
    let seed = need_seed(a.seed.or(cfg.seed), "simulate")?;
    let reps = a.reps.or(cfg.reps).unwrap_or(experiment::DEFAULT_REPS);
    let result = lib(experiment::run(&cfg, seed, reps, a.resamples, &ctx.registry))?;

    let mut rows = Vec::new();
    if let Some(report) = &result.tail {
        for c in &report.tail {
            let verdict = json!(c.verdict).as_str().unwrap_or_default().to_string();
            println!(
                "u={} threshold={} envelope={} empirical={} ci_upper={} verdict={verdict}",
                c.u, c.threshold, c.envelope, c.empirical, c.ci_upper
            );
            rows.push(vec![num(c.u), num(c.threshold), num(c.envelope), num(c.empirical), num(c.ci_upper), verdict]);
        }
    }
    if let Some(report) = &result.moments {
        for c in &report.moments {
            let verdict = json!(c.verdict).as_str().unwrap_or_default().to_string();
            println!(
                "p={} bound={} estimate={} ci_upper={} verdict={verdict}",
                c.p, c.bound, c.estimate.estimate, c.estimate.ci_upper
            );
        }
    }
    for e in &result.moment_estimates {
        println!("p={} estimate={} ci=[{}, {}]", e.p, e.estimate, e.ci_lower, e.ci_upper);
    }
    if let Some(agreement) = &result.exact {
        println!("exact-enumeration agrees={}", agreement.agrees);
    }
    ctx.write_csv("simulate", &["u", "threshold", "envelope", "empirical", "ci_upper", "verdict"], &rows)?;
    let args = json!({ "args": a, "seed": seed, "reps": reps });
    ctx.write_json("simulate", &args, Some(seed), result.fitted, &result)?;
    Ok(result.violated())
}

fn rip_exact(ctx: &mut Context, a: RipExactArgs) -> Outcome {
    let seed = need_seed(a.seed, "rip exact")?;
    let instance = match (&a.matrix, a.n) {
        (Some(path), _) => {
            let value: Value = parse(path, &ctx.input(path)?)?;
            lib(RipInstance::from_unitary(&lib(matrix_from_json(&value))?, a.m, seed))?
        }
        (None, Some(n)) => lib(RipInstance::dft(n, a.m, seed))?,
        (None, None) => return Err("rip exact needs --N or --matrix".into()),
    };
    let report = lib(restricted_isometry_constant(&instance.matrix, a.s, a.cap))?;
    if let Some(path) = &a.export {
        let text = serde_json::to_string(&matrix_to_json(&instance.matrix)).map_err(|e| e.to_string())?;
        std::fs::write(path, text + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    println!("N={} m={} |I|={} s={} delta_s={}", instance.n, instance.m, instance.selected.len(), a.s, report.delta_s);
    let result = json!({ "instance": instance, "realized_rows": instance.selected.len(), "rip": report });
    ctx.write_json("rip-exact", &a, Some(seed), false, &result)?;
    Ok(false)
}

fn rip_curve(ctx: &mut Context, a: RipCurveArgs) -> Outcome {
    let seed = need_seed(a.seed, "rip curve")?;
    let mut points = Vec::with_capacity(a.m_list.len());
    let mut rows = Vec::with_capacity(a.m_list.len());
    for &m in &a.m_list {
        let est = lib(estimate_failure_probability(a.n, m, a.s, a.delta, a.reps, seed))?;
        println!(
            "m={} failures={}/{} estimate={} ci=[{}, {}] mean_rows={}",
            m, est.failures, est.reps, est.estimate, est.ci_lower, est.ci_upper, est.mean_selected
        );
        rows.push(vec![
            num(m),
            est.failures.to_string(),
            num(est.estimate),
            num(est.ci_lower),
            num(est.ci_upper),
            num(est.mean_selected),
        ]);
        points.push(est);
    }
    ctx.write_csv("rip-curve", &["m", "failures", "estimate", "ci_lower", "ci_upper", "mean_selected"], &rows)?;
    ctx.write_json("rip-curve", &a, Some(seed), false, &json!({ "points": points }))?;
    Ok(false)
}

fn rip_complexity(ctx: &mut Context, a: RipComplexityArgs) -> Outcome {
    let params = ComplexityParams { s: a.s, k: a.k, delta: a.delta, eta: a.eta, d1: a.d1, d2: a.d2, n: a.n };
    let c = lib(sample_complexity(params))?;
    print!("{}", ctx.write_json("rip-complexity", &a, None, c.fitted, &c)?);
    Ok(false)
}

fn load_matrices(ctx: &mut Context, path: &PathBuf) -> Result<Vec<CMatrix>, String> {
    let value: Value = parse(path, &ctx.input(path)?)?;
    let Value::Array(items) = value else {
        return Err(format!("{}: expected a JSON array of matrices", path.display()));
    };
    items.iter().map(|v| lib(matrix_from_json(v)).map_err(|e| format!("{}: {e}", path.display()))).collect()
}

#[derive(Serialize)]
struct ChaosReport {
    radii: tc::SchattenRadii,
    kmr: tc::KmrParams,
    xi_psi2: f64,
    tail: Option<TailBound>,
    tail_grid: Vec<tc::TailPoint>,
    moments: Vec<MomentBound>,
    notes: Vec<String>,
}

fn chaos(ctx: &mut Context, a: ChaosArgs) -> Outcome {
    let matrices = load_matrices(ctx, &a.matrices)?;
    let radii = lib(tc::schatten_radii(&matrices, a.mode.into(), DEFAULT_GAMMA_CAP))?;
    let xi_psi2 = match a.xi_psi2 {
        Some(x) => x,
        None => lib(linear_form_psi_norm(&[1.0], &[Distribution::Rademacher], 2.0))?,
    };
    let mut report = ChaosReport {
        kmr: tc::kmr_parameters(&radii),
        radii,
        xi_psi2,
        tail: None,
        tail_grid: Vec::new(),
        moments: Vec::new(),
        notes: Vec::new(),
    };
    match tc::chaos_tail_bound(&report.radii, xi_psi2, &ctx.registry) {
        Ok(b) => {
            report.tail_grid = a.u_grid.iter().map(|&u| lib(b.at(u))).collect::<Result<_, _>>()?;
            report.tail = Some(b);
        }
        Err(e) => report.notes.push(e.to_string()),
    }
    if !a.p.is_empty() {
        let metric = lib(tc::operator_metric(&matrices))?;
        for &p in &a.p {
            let g = match a.mode {
                GammaModeArg::Exact => lib(gamma_exact(&metric, 2.0, p, DEFAULT_GAMMA_CAP))?.value,
                GammaModeArg::Greedy => lib(gamma_greedy(&metric, 2.0, p))?.value,
            };
            match tc::chaos_moment_bound(&report.radii, g, xi_psi2, p, &ctx.registry) {
                Ok(b) => report.moments.push(b),
                Err(e) => {
                    report.notes.push(e.to_string());
                    break;
                }
            }
        }
    }
    let fitted = report.tail.iter().any(|b| b.fitted) || report.moments.iter().any(|b| b.fitted);
    print!("{}", ctx.write_json("chaos", &a, None, fitted, &report)?);
    Ok(false)
}
