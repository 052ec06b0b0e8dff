//! `besq`: transforms, prices, validation and experiments for integral
//! functionals of squared Bessel processes.
//!
//! Exit codes: 0 success, 2 usage or parameter regime, 3 numerical failure.

mod grid;
mod output;
mod validate;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use besq::asymptotics::{default_lambda_grid, default_y_grid, lil_experiment, lt_rate_empirical, small_ball_targets, tauberian_series};
use besq::bessel::{BesselSource, Exact, Perturbed};
use besq::inversion::{cdf_sigma, density_sigma, InversionConfig};
use besq::laws::{
    joint_max_laplace, joint_r_sigma_laplace, laplace_hitting_time, laplace_sigma, BarrierQuery, BesqParams,
    SigmaQuery,
};
use besq::pricing::{mc_price, price, OptionKind, OptionSpec};
use besq::simulate::{bias_study, PathConfig, StepMode};
use besq::{BesqError, Real};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use output::{Format, Sink};

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }
    fn numeric(message: impl Into<String>) -> Self {
        CliError { code: 3, message: message.into() }
    }
    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError { code: 1, message: format!("{}: {e}", path.display()) }
    }
    fn output(e: impl fmt::Display) -> Self {
        CliError { code: 1, message: format!("cannot write output: {e}") }
    }
}

impl From<BesqError> for CliError {
    fn from(e: BesqError) -> Self {
        if e.is_usage() { CliError::usage(e.to_string()) } else { CliError::numeric(e.to_string()) }
    }
}

#[derive(Parser)]
#[command(name = "besq", version, about = "Integral functionals of squared Bessel processes up to a passage time")]
struct Cli {
    /// Working digits for Gaver–Stehfest inversion (at most 31).
    #[arg(long, global = true, env = "BESQ_DIGITS", default_value_t = 31)]
    digits: u32,
    /// Write data to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; CSV by default except for `price`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate transforms, or the distribution of Σ, over a grid.
    Laplace(LaplaceArgs),
    /// Price a digital, a put on e^Σ, or a put on the running maximum.
    Price(PriceArgs),
    /// Run the identity suite; exits 3 if any check fails.
    Validate(ValidateArgs),
    /// Small-ball series, liminf experiment, or step-size bias study.
    Experiment(ExperimentArgs),
}

#[derive(Args, Serialize, Clone, Copy)]
struct ProcessArgs {
    /// Index ν >= -1.
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<f64>,
    /// Dimension δ = 2(ν + 1); may be given instead of, or alongside, --nu.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Exponent of the functional, p > -1.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    p: f64,
    /// Starting level.
    #[arg(long, default_value_t = 0.0)]
    x: f64,
    /// Target level.
    #[arg(long)]
    y: f64,
}

impl ProcessArgs {
    fn params(&self) -> Result<BesqParams<f64>, CliError> {
        let nu = match (self.nu, self.delta) {
            (Some(nu), None) => nu,
            (None, Some(d)) => d / 2.0 - 1.0,
            (Some(nu), Some(d)) => {
                if (d - 2.0 * (nu + 1.0)).abs() > 1e-12 * d.abs().max(1.0) {
                    return Err(CliError::usage(format!("--delta {d} is not 2(ν + 1) for --nu {nu}")));
                }
                nu
            }
            (None, None) => return Err(CliError::usage("one of --nu or --delta is required")),
        };
        Ok(BesqParams::new(nu, self.p)?)
    }
}

#[derive(Args, Serialize, Clone, Copy)]
struct InversionArgs {
    /// Inversion method.
    #[arg(long, value_enum, default_value = "gaver-stehfest")]
    method: MethodArg,
    /// Gaver–Stehfest order (default 16) or Talbot node count (default 32).
    #[arg(long)]
    order: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MethodArg {
    GaverStehfest,
    Talbot,
}

impl InversionArgs {
    fn config(&self, digits: u32) -> Result<InversionConfig, CliError> {
        let cfg = match self.method {
            MethodArg::GaverStehfest => InversionConfig::gaver_stehfest(self.order.unwrap_or(16)).with_digits(digits),
            MethodArg::Talbot => InversionConfig::talbot(self.order.unwrap_or(32)),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Serialize, Clone)]
struct PathArgs {
    /// Number of Monte Carlo paths.
    #[arg(long, default_value_t = 20_000)]
    paths: usize,
    /// Time step, or a list of steps for the bias study.
    #[arg(long)]
    step: Option<String>,
    /// Random seed; required whenever paths are simulated.
    #[arg(long)]
    seed: Option<u64>,
    /// Paths still running at this time are censored.
    #[arg(long, default_value_t = 1e3)]
    max_time: f64,
}

impl PathArgs {
    fn seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::usage("--seed is required for randomized commands"))
    }

    fn steps(&self, default: f64) -> Result<Vec<f64>, CliError> {
        match &self.step {
            Some(s) => grid::parse(s).map_err(|e| CliError::usage(format!("--step: {e}"))),
            None => Ok(vec![default]),
        }
    }

    fn config(&self, default_step: f64) -> Result<PathConfig, CliError> {
        let steps = self.steps(default_step)?;
        if steps.len() != 1 {
            return Err(CliError::usage("--step takes a single value here"));
        }
        let cfg = PathConfig { max_time: self.max_time, ..PathConfig::new(steps[0], self.paths, self.seed()?) };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum LaplaceKind {
    /// E[exp(-(λ/2) Σ)].
    Sigma,
    /// E[exp(-(λ/2) R_y)]; uses ν only.
    HittingTime,
    /// E[exp(-(λ/2) Σ); y reached before --barrier].
    JointMax,
    /// E[exp(-r R_y - (λ/2) Σ)] with r from --rate.
    JointTime,
    /// P(Σ <= t), with t from --t or --grid.
    Cdf,
    /// Density of Σ at t.
    Density,
}

#[derive(Args, Serialize)]
struct LaplaceArgs {
    #[command(flatten)]
    process: ProcessArgs,
    #[arg(long, value_enum, default_value = "sigma")]
    kind: LaplaceKind,
    /// Discount parameter λ.
    #[arg(long)]
    lambda: Option<f64>,
    /// Abscissa for --kind cdf or density.
    #[arg(long)]
    t: Option<f64>,
    /// Grid replacing --lambda (or --t): `a,b,c`, `lin:lo:hi:n` or `log:lo:hi:n`.
    #[arg(long)]
    grid: Option<String>,
    /// Barrier level for --kind joint-max.
    #[arg(long)]
    barrier: Option<f64>,
    /// Time discount rate for --kind joint-time.
    #[arg(long)]
    rate: Option<f64>,
    #[command(flatten)]
    inversion: InversionArgs,
}

#[derive(Serialize)]
struct LaplaceRow {
    index: usize,
    kind: LaplaceKind,
    nu: f64,
    p: f64,
    x: f64,
    y: f64,
    lambda: Option<f64>,
    t: Option<f64>,
    barrier: Option<f64>,
    rate: Option<f64>,
    value: f64,
}

fn need(v: Option<f64>, flag: &str, kind: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::usage(format!("--kind {kind} needs {flag}")))
}

fn cmd_laplace(a: &LaplaceArgs, digits: u32, sink: &Sink) -> Result<(), CliError> {
    let params = a.process.params()?;
    let (x, y) = (a.process.x, a.process.y);
    let on_time_axis = matches!(a.kind, LaplaceKind::Cdf | LaplaceKind::Density);
    let single = if on_time_axis { a.t } else { a.lambda };
    let points = match (&a.grid, single) {
        (Some(g), _) => grid::parse(g).map_err(|e| CliError::usage(format!("--grid: {e}")))?,
        (None, Some(v)) => vec![v],
        (None, None) => {
            return Err(CliError::usage(if on_time_axis { "give --t or --grid" } else { "give --lambda or --grid" }))
        }
    };
    let inv = if on_time_axis { Some(a.inversion.config(digits)?) } else { None };
    let barrier = if let LaplaceKind::JointMax = a.kind { Some(need(a.barrier, "--barrier", "joint-max")?) } else { None };
    let rate = if let LaplaceKind::JointTime = a.kind { Some(need(a.rate, "--rate", "joint-time")?) } else { None };
    let eval = |v: f64| -> besq::Result<f64> {
        match a.kind {
            LaplaceKind::Sigma => laplace_sigma(&SigmaQuery::new(params, x, y, v)?),
            LaplaceKind::HittingTime => laplace_hitting_time(params.nu(), x, y, v),
            LaplaceKind::JointMax => joint_max_laplace(&BarrierQuery::new(SigmaQuery::new(params, x, y, v)?, barrier.unwrap())?),
            LaplaceKind::JointTime => joint_r_sigma_laplace(&SigmaQuery::new(params, x, y, v)?, rate.unwrap()),
            LaplaceKind::Cdf => cdf_sigma(&params, x, y, v, inv.as_ref().unwrap()),
            LaplaceKind::Density => density_sigma(&params, x, y, v, inv.as_ref().unwrap()),
        }
    };
    let values: Vec<f64> = points.par_iter().map(|&v| eval(v)).collect::<besq::Result<_>>()?;
    let rows: Vec<LaplaceRow> = points
        .iter()
        .zip(values)
        .enumerate()
        .map(|(index, (&v, value))| LaplaceRow {
            index,
            kind: a.kind,
            nu: params.nu(),
            p: params.p(),
            x,
            y,
            lambda: (!on_time_axis).then_some(v),
            t: on_time_axis.then_some(v),
            barrier,
            rate,
            value,
        })
        .collect();
    sink.emit("laplace", json!(a), None, &rows, None)
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum OptionArg {
    /// Pays e^{-Σ} when Σ <= strike.
    Digital,
    /// Payoff (K - e^Σ)⁺.
    Put,
    /// Payoff (K - max X)⁺ discounted by e^{-Σ}; needs y < x <= K.
    Maxput,
}

#[derive(Args, Serialize)]
struct PriceArgs {
    #[command(flatten)]
    process: ProcessArgs,
    #[arg(long, value_enum, default_value = "digital")]
    option: OptionArg,
    /// Strike K, or the threshold k of the digital.
    #[arg(long)]
    strike: f64,
    #[command(flatten)]
    inversion: InversionArgs,
    /// Also price by Monte Carlo and report the estimate with its standard error.
    #[arg(long)]
    mc_check: bool,
    #[command(flatten)]
    mc: PathArgs,
}

#[derive(Serialize)]
struct PriceRow {
    option: OptionArg,
    nu: f64,
    p: f64,
    x: f64,
    y: f64,
    strike: f64,
    price: f64,
    mc_estimate: Option<f64>,
    mc_std_error: Option<f64>,
    mc_z_score: Option<f64>,
    mc_censored_fraction: Option<f64>,
}

fn cmd_price(a: &PriceArgs, digits: u32, sink: &Sink) -> Result<(), CliError> {
    let params = a.process.params()?;
    let kind = match a.option {
        OptionArg::Digital => OptionKind::Digital { k: a.strike },
        OptionArg::Put => OptionKind::PutAccumulated { strike: a.strike },
        OptionArg::Maxput => OptionKind::PutMaxRate { strike: a.strike },
    };
    let spec = OptionSpec { kind, params, x: a.process.x, y: a.process.y };
    spec.validate()?;
    let cfg = a.inversion.config(digits)?;
    let mc_cfg = if a.mc_check { Some(a.mc.config(1e-3)?) } else { None };
    let value = price(&spec, &cfg)?;
    let mc = mc_cfg.map(|c| mc_price(&spec, &c)).transpose()?;
    let row = PriceRow {
        option: a.option,
        nu: params.nu(),
        p: params.p(),
        x: spec.x,
        y: spec.y,
        strike: a.strike,
        price: value,
        mc_estimate: mc.map(|m| m.mean),
        mc_std_error: mc.map(|m| m.std_error),
        mc_z_score: mc.map(|m| m.z_score(value)),
        mc_censored_fraction: mc.map(|m| m.censored_fraction),
    };
    if let Some(m) = mc {
        eprintln!("mc: {:.6} ± {:.2e}, {:.2} standard errors from {:.6}", m.mean, m.std_error, m.z_score(value), value);
    }
    sink.emit("price", json!(a), mc_cfg.map(|c| c.seed), &[row], None)
}

#[derive(Args, Serialize)]
struct ValidateArgs {
    /// Multiply the Bessel kernels by 1 + rel·z/(1+z) to check that the suite notices.
    #[arg(long)]
    perturb_bessel: Option<f64>,
}

fn cmd_validate(a: &ValidateArgs, digits: u32, sink: &Sink) -> Result<(), CliError> {
    let perturbed;
    let bessel: &dyn BesselSource<f64> = match a.perturb_bessel {
        Some(rel) if !rel.is_finite() => return Err(CliError::usage("--perturb-bessel must be finite")),
        Some(rel) => {
            perturbed = Perturbed { rel };
            &perturbed
        }
        None => &Exact,
    };
    let checks = validate::run(bessel, digits)?;
    for c in &checks {
        eprintln!(
            "{:<22} {:>4} points  max residual {:.2e}  tolerance {:.0e}  {}",
            c.identity,
            c.points,
            c.max_residual,
            c.tolerance,
            if c.pass { "ok" } else { "FAILED" }
        );
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.identity).collect();
    sink.emit("validate", json!(a), None, &checks, Some(json!({ "pass": failed.is_empty() })))?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::numeric(format!("failed: {}", failed.join(", "))))
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Mode {
    /// λ^{-1/2} ln E[e^{-λΣ}] over a λ grid and t ln P(Σ <= t) over a t grid.
    Smallball,
    /// Σ_{0→y}/φ(y) along simulated paths from 0 up to --y.
    Lil,
    /// Monte Carlo transform against the closed form across a step ladder.
    BiasStudy,
}

#[derive(Args, Serialize)]
struct ExperimentArgs {
    #[arg(value_enum)]
    mode: Mode,
    #[command(flatten)]
    process: ProcessArgs,
    /// λ grid (smallball) or passage levels (lil).
    #[arg(long)]
    grid: Option<String>,
    /// Discount parameter for the bias study.
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
    #[command(flatten)]
    mc: PathArgs,
}

#[derive(Serialize)]
struct SmallBallRow {
    series: &'static str,
    arg: f64,
    value: f64,
    target: Option<f64>,
}

#[derive(Serialize)]
struct LilRow {
    path_id: usize,
    y: f64,
    ratio: Option<f64>,
    proxy: Option<f64>,
}

fn cmd_experiment(a: &ExperimentArgs, sink: &Sink) -> Result<(), CliError> {
    let params = a.process.params()?;
    let (x, y) = (a.process.x, a.process.y);
    let parse_grid = |g: &String| grid::parse(g).map_err(|e| CliError::usage(format!("--grid: {e}")));
    match a.mode {
        Mode::Smallball => {
            let lambdas = a.grid.as_ref().map(parse_grid).transpose()?.unwrap_or_else(default_lambda_grid);
            let target = small_ball_targets(&params, x, y)?;
            let mut rows: Vec<SmallBallRow> = lt_rate_empirical(&params, x, y, &lambdas)?
                .into_iter()
                .map(|r| SmallBallRow { series: "lt-rate", arg: r.lambda, value: r.rate, target: Some(target.lt_rate) })
                .collect();
            if let Some(beta) = target.sb_constant.filter(|&b| b > 0.0) {
                let ts = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
                rows.extend(
                    tauberian_series(&params, x, y, &ts.map(|t| t * beta))?
                        .into_iter()
                        .map(|r| SmallBallRow { series: "tauberian", arg: r.t, value: r.scaled, target: Some(-beta) }),
                );
            }
            sink.emit("experiment", json!(a), None, &rows, Some(json!(target)))
        }
        Mode::Lil => {
            let seed = a.mc.seed()?;
            let levels = match &a.grid {
                Some(g) => parse_grid(g)?,
                None => default_y_grid(y, 40),
            };
            let steps = a.mc.steps(1e-3)?;
            if steps.len() != 1 {
                return Err(CliError::usage("--step takes a single value here"));
            }
            let cfg = PathConfig {
                max_time: a.mc.max_time,
                step_mode: StepMode::Relative,
                ..PathConfig::new(steps[0], a.mc.paths, seed)
            };
            let report = lil_experiment(&params, &cfg, &levels)?;
            if report.qualitative {
                eprintln!("note: ν < 0, the liminf constant is indicative only");
            }
            let rows: Vec<LilRow> = report
                .paths
                .iter()
                .enumerate()
                .flat_map(|(i, path)| {
                    levels.iter().zip(&path.ratios).map(move |(&y, &ratio)| LilRow { path_id: i, y, ratio, proxy: path.proxy })
                })
                .collect();
            let summary = json!({
                "median": report.median,
                "lower_quartile": report.lower_quartile,
                "upper_quartile": report.upper_quartile,
                "target": report.target,
                "censored": report.censored,
                "qualitative": report.qualitative,
            });
            sink.emit("experiment", json!(a), Some(seed), &rows, Some(summary))
        }
        Mode::BiasStudy => {
            let seed = a.mc.seed()?;
            let steps = a.mc.steps(1e-2)?;
            let steps = if a.mc.step.is_none() { vec![4e-2, 2e-2, 1e-2, 5e-3] } else { steps };
            let base = PathConfig { max_time: a.mc.max_time, ..PathConfig::new(steps[0], a.mc.paths, seed) };
            let reference = laplace_sigma(&SigmaQuery::new(params, x, y, a.lambda)?)?;
            let study = bias_study(&params, x, y, a.lambda, &steps, reference, &base)?;
            let summary = json!({ "intercept": study.intercept, "observed_order": study.observed_order, "reference": reference });
            sink.emit("experiment", json!(a), Some(seed), &study.rows, Some(summary))
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let default_format = if let Command::Price(_) = cli.command { Format::Json } else { Format::Csv };
    let sink = Sink { format: cli.format.unwrap_or(default_format), path: cli.out.clone(), started: Instant::now() };
    if cli.digits == 0 || cli.digits > besq::DoubleDouble::DIGITS {
        return Err(CliError::usage(format!(
            "working digits must be in 1..={}, got {}",
            besq::DoubleDouble::DIGITS,
            cli.digits
        )));
    }
    match &cli.command {
        Command::Laplace(a) => cmd_laplace(a, cli.digits, &sink),
        Command::Price(a) => cmd_price(a, cli.digits, &sink),
        Command::Validate(a) => cmd_validate(a, cli.digits, &sink),
        Command::Experiment(a) => cmd_experiment(a, &sink),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
