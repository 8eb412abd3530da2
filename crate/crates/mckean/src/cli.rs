//! The `mckean` command line: `solve`, `curve`, `sweep` and `verify`.
//!
//! Data goes to stdout, diagnostics to stderr. Exit codes: 0 success, 1 a
//! verification check failed, 2 usage error or violated model assumption
//! (with a JSON error document on stdout).

use clap::{Args, Parser, Subcommand, ValueEnum};
use mckean_core::model::risk_neutral_drift;
use mckean_core::{Error, McKeanGame, ModelParams, Regime};
use serde_json::{Map, Value};

use crate::format::{document, json_number, number, Csv};
use crate::mc::SimConfig;
use crate::verify::{self, Check};

#[derive(Parser, Debug)]
#[command(name = "mckean", version, about = "Cancellable American put (McKean game) under a jump-diffusion with exponential down-jumps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve the game and print thresholds and boundaries as JSON.
    Solve(SolveArgs),
    /// Tabulate U, V or f'(log K+) on a grid as CSV.
    Curve(CurveArgs),
    /// Sweep σ with the drift held fixed and tabulate thresholds and boundaries as CSV.
    Sweep(SweepArgs),
    /// Run a verification suite and print a JSON report.
    Verify(VerifyArgs),
}

/// Model and contract flags. All are required except under `verify`, which
/// falls back to σ = 0.4, λ = 1, θ = 2, q = 0.05, K = 5, risk-neutral drift.
#[derive(Args, Debug, Clone, Default)]
pub struct ModelArgs {
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Discount rate.
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub strike: Option<f64>,
    /// Drift of the continuous part.
    #[arg(long, conflicts_with = "risk_neutral")]
    pub mu: Option<f64>,
    /// Set μ so that e^{X} discounted at q is a martingale.
    #[arg(long)]
    pub risk_neutral: bool,
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Cancellation penalty δ.
    #[arg(long)]
    pub delta: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curve {
    /// Perpetual put value U(x).
    #[value(name = "U")]
    U,
    /// Game value V(x); needs --delta.
    #[value(name = "V")]
    V,
    /// Slope f'(log K+) as a function of δ on (0, δ̄].
    #[value(name = "fprimeK")]
    FPrimeK,
}

#[derive(Args, Debug, Clone)]
pub struct CurveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum)]
    pub what: Curve,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub xmin: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub xmax: f64,
    /// Number of intervals; n + 1 rows are printed.
    #[arg(long)]
    pub n: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    #[value(name = "sigma")]
    Sigma,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub param: SweepParam,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    /// Number of intervals; n + 1 rows are printed.
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub theta: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub strike: f64,
    #[arg(long)]
    pub delta: f64,
    /// Fixed drift.
    #[arg(long, conflicts_with = "risk_neutral_at", required_unless_present = "risk_neutral_at")]
    pub mu: Option<f64>,
    /// Reference σ at which the fixed drift is risk-neutral.
    #[arg(long)]
    pub risk_neutral_at: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Saddle,
    Oracles,
}

impl Suite {
    fn as_str(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Saddle => "saddle",
            Suite::Oracles => "oracles",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 100_000)]
    pub paths: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Penalty; defaults to δ₀/2.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Start points for the saddle suite (comma separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x0: Vec<f64>,
}

/// Result of one command: text for stdout and the exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

/// A failure reported as `{"spec_version", "error", "message", ...}` with exit code 2.
#[derive(Debug, Clone)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    pub detail: Map<String, Value>,
}

impl CliError {
    fn invalid(message: impl Into<String>) -> Self {
        CliError { kind: "invalid_parameter", message: message.into(), detail: Map::new() }
    }

    fn range(message: impl Into<String>) -> Self {
        CliError { kind: "invalid_range", message: message.into(), detail: Map::new() }
    }

    pub fn to_json(&self) -> String {
        let mut doc = document();
        doc.insert("error".into(), Value::from(self.kind));
        doc.insert("message".into(), Value::from(self.message.clone()));
        doc.extend(self.detail.clone());
        render(doc)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let mut detail = Map::new();
        let kind = match e {
            Error::AssumptionViolated { psi_one, discount } => {
                detail.insert("psi_one".into(), json_number(Some(psi_one)));
                detail.insert("q".into(), json_number(Some(discount)));
                "assumption_violated"
            }
            Error::InvalidParameter { name, value } => {
                detail.insert("parameter".into(), Value::from(name));
                detail.insert("value".into(), json_number(Some(value)));
                "invalid_parameter"
            }
            _ => "solver_failure",
        };
        CliError { kind, message: e.to_string(), detail }
    }
}

fn render(doc: Map<String, Value>) -> String {
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("json");
    s.push('\n');
    s
}

struct Setup {
    game: McKeanGame,
}

impl ModelArgs {
    fn p0() -> Self {
        ModelArgs {
            sigma: Some(0.4),
            lambda: Some(1.0),
            theta: Some(2.0),
            q: Some(0.05),
            strike: Some(5.0),
            mu: None,
            risk_neutral: true,
        }
    }

    /// Fill unset flags from P0 defaults (drift only when neither --mu nor --risk-neutral is given).
    fn or_p0(&self) -> Self {
        let d = Self::p0();
        let explicit_drift = self.mu.is_some() || self.risk_neutral;
        ModelArgs {
            sigma: self.sigma.or(d.sigma),
            lambda: self.lambda.or(d.lambda),
            theta: self.theta.or(d.theta),
            q: self.q.or(d.q),
            strike: self.strike.or(d.strike),
            mu: self.mu,
            risk_neutral: self.risk_neutral || !explicit_drift,
        }
    }

    fn build(&self) -> Result<Setup, CliError> {
        let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| CliError::invalid(format!("missing required flag --{flag}")));
        let sigma = need(self.sigma, "sigma")?;
        let lambda = need(self.lambda, "lambda")?;
        let theta = need(self.theta, "theta")?;
        let q = need(self.q, "q")?;
        let strike = need(self.strike, "strike")?;
        let params = match (self.mu, self.risk_neutral) {
            (Some(mu), false) => ModelParams::new(sigma, mu, lambda, theta)?,
            (None, true) => ModelParams::risk_neutral(sigma, lambda, theta, q)?,
            _ => return Err(CliError::invalid("exactly one of --mu or --risk-neutral is required")),
        };
        Ok(Setup { game: McKeanGame::new(params, strike, q)? })
    }
}

fn check_penalty(delta: f64) -> Result<f64, CliError> {
    if delta.is_finite() && delta > 0.0 {
        Ok(delta)
    } else {
        Err(CliError::invalid(format!("--delta must be positive and finite, got {delta}")))
    }
}

fn grid(from: f64, to: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if !(from.is_finite() && to.is_finite()) || from >= to || n == 0 {
        return Err(CliError::range(format!("need finite min < max and n >= 1, got [{from}, {to}] with n = {n}")));
    }
    Ok((0..=n).map(|i| if i == n { to } else { from + (to - from) * i as f64 / n as f64 }).collect())
}

fn model_json(game: &McKeanGame) -> Value {
    let p = game.params();
    let mut m = Map::new();
    m.insert("sigma".into(), json_number(Some(p.sigma())));
    m.insert("mu".into(), json_number(Some(p.mu())));
    m.insert("lambda".into(), json_number(Some(p.lambda())));
    m.insert("theta".into(), json_number(Some(p.theta())));
    m.insert("q".into(), json_number(Some(game.discount())));
    m.insert("strike".into(), json_number(Some(game.strike())));
    m.insert("psi_one".into(), json_number(Some(game.psi_one())));
    Value::Object(m)
}

pub fn solve(args: &SolveArgs) -> Result<String, CliError> {
    let delta = check_penalty(args.delta)?;
    let game = args.model.build()?.game;
    let sol = game.solve(delta)?;
    let mut doc = document();
    doc.insert("model".into(), model_json(&game));
    doc.insert("delta".into(), json_number(Some(delta)));
    doc.insert("regime".into(), Value::from(sol.regime.as_str()));
    doc.insert("k_star".into(), json_number(Some(sol.put.k_star)));
    doc.insert("delta_bar".into(), json_number(Some(game.delta_bar())));
    doc.insert("delta_0".into(), json_number(Some(sol.delta_0)));
    doc.insert("x_star".into(), json_number(sol.x_star));
    doc.insert("y_star".into(), json_number(sol.y_star));
    doc.insert("alpha".into(), json_number(sol.alpha));
    Ok(render(doc))
}

pub fn curve(args: &CurveArgs) -> Result<String, CliError> {
    let xs = grid(args.xmin, args.xmax, args.n)?;
    let game = args.model.build()?.game;
    let strike = game.strike();
    let lower = |x: f64| (strike - x.exp()).max(0.0);
    let mut csv = Csv::new(&["x", "value", "lower_payoff", "upper_payoff"]);
    match args.what {
        Curve::U => {
            let delta = args.delta.map(check_penalty).transpose()?;
            let put = game.put();
            for x in xs {
                let upper = delta.map_or(String::new(), |d| number(lower(x) + d));
                csv.row([number(x), number(put.value(x)), number(lower(x)), upper]);
            }
        }
        Curve::V => {
            let delta = check_penalty(args.delta.ok_or_else(|| CliError::invalid("--what V needs --delta"))?)?;
            let sol = game.solve(delta)?;
            for x in xs {
                csv.row([number(x), number(sol.value_at(x)), number(lower(x)), number(lower(x) + delta)]);
            }
        }
        Curve::FPrimeK => {
            if xs[0] <= 0.0 || xs[xs.len() - 1] > game.delta_bar() {
                return Err(CliError::range(format!(
                    "penalty grid must lie in (0, delta_bar = {}]",
                    number(game.delta_bar())
                )));
            }
            for d in xs {
                csv.row([number(d), number(game.f_prime_at_strike(d)?), String::new(), String::new()]);
            }
        }
    }
    Ok(csv.finish())
}

pub fn sweep(args: &SweepArgs) -> Result<String, CliError> {
    let sigmas = grid(args.from, args.to, args.n)?;
    if args.from <= 0.0 {
        return Err(CliError::range("sigma grid must be positive"));
    }
    let delta = check_penalty(args.delta)?;
    let mu = match (args.mu, args.risk_neutral_at) {
        (Some(mu), None) => mu,
        (None, Some(s_ref)) => {
            if !(s_ref.is_finite() && s_ref > 0.0) {
                return Err(CliError::invalid(format!("--risk-neutral-at must be positive, got {s_ref}")));
            }
            risk_neutral_drift(s_ref, args.lambda, args.theta, args.q)
        }
        _ => return Err(CliError::invalid("exactly one of --mu or --risk-neutral-at is required")),
    };
    let mut csv = Csv::new(&["sigma", "delta_bar", "delta_0", "x_star", "y_star"]);
    let mut valid = 0;
    let mut last_violation = None;
    for sigma in sigmas {
        let params = ModelParams::new(sigma, mu, args.lambda, args.theta)?;
        let game = match McKeanGame::new(params, args.strike, args.q) {
            Ok(g) => g,
            Err(e @ Error::AssumptionViolated { .. }) => {
                eprintln!("sigma = {}: skipped ({e})", number(sigma));
                csv.row([number(sigma), "skipped".into(), "skipped".into(), "skipped".into(), "skipped".into()]);
                last_violation = Some(e);
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let sol = game.solve(delta)?;
        let y = match sol.regime {
            Regime::NoCancel => None,
            Regime::PointCancel => Some(game.log_strike()),
            Regime::IntervalCancel => sol.y_star,
        };
        let opt = |v: Option<f64>| v.map_or(String::new(), number);
        csv.row([number(sigma), number(game.delta_bar()), number(sol.delta_0), opt(sol.x_star), opt(y)]);
        valid += 1;
    }
    if valid == 0 {
        let mut err = CliError::from(last_violation.expect("non-empty grid"));
        err.message = format!("every grid point violates the model assumption; last: {}", err.message);
        return Err(err);
    }
    Ok(csv.finish())
}

/// Runs a suite; `Ok((report, all_passed))`.
pub fn verify(args: &VerifyArgs) -> Result<(String, bool), CliError> {
    if args.paths == 0 || !(args.dt.is_finite() && args.dt > 0.0) {
        return Err(CliError::invalid("--paths must be positive and --dt positive and finite"));
    }
    let game = args.model.or_p0().build()?.game;
    let delta = match args.delta {
        Some(d) => check_penalty(d)?,
        None if game.delta_0() > 0.0 => game.delta_0() / 2.0,
        None => game.delta_bar() / 2.0,
    };
    let horizon = SimConfig::discounted_horizon(game.discount(), game.strike(), delta);
    let cfg = SimConfig::new(args.paths, args.dt, args.seed, horizon);
    if args.suite != Suite::Oracles {
        eprintln!("verify {}: {} paths, dt = {}, seed = {}", args.suite.as_str(), args.paths, args.dt, args.seed);
    }
    let mut starts = Vec::new();
    let checks: Vec<Check> = match args.suite {
        Suite::Identities => verify::identities(&game, &cfg)?,
        Suite::Oracles => verify::oracles(&game)?,
        Suite::Saddle => {
            if delta >= game.delta_bar() {
                return Err(CliError::invalid("the saddle suite needs delta < delta_bar"));
            }
            starts = if args.x0.is_empty() { verify::default_starts(&game, delta)? } else { args.x0.clone() };
            verify::saddle(&game, delta, &starts, &cfg)?
        }
    };
    let pass = checks.iter().all(|c| c.pass);
    let mut doc = document();
    doc.insert("suite".into(), Value::from(args.suite.as_str()));
    doc.insert("model".into(), model_json(&game));
    doc.insert("delta".into(), json_number(Some(delta)));
    if args.suite != Suite::Oracles {
        doc.insert("paths".into(), Value::from(args.paths));
        doc.insert("dt".into(), json_number(Some(args.dt)));
        doc.insert("seed".into(), Value::from(args.seed));
    }
    if !starts.is_empty() {
        doc.insert("x0".into(), Value::Array(starts.iter().map(|&x| json_number(Some(x))).collect()));
    }
    let list = checks
        .iter()
        .map(|c| {
            let mut m = Map::new();
            m.insert("name".into(), Value::from(c.name.clone()));
            m.insert("tolerance".into(), json_number(Some(c.tolerance)));
            m.insert("observed".into(), json_number(Some(c.observed)));
            m.insert("pass".into(), Value::from(c.pass));
            Value::Object(m)
        })
        .collect();
    doc.insert("checks".into(), Value::Array(list));
    doc.insert("pass".into(), Value::from(pass));
    for c in checks.iter().filter(|c| !c.pass) {
        eprintln!("FAIL {} (observed {}, tolerance {})", c.name, number(c.observed), number(c.tolerance));
    }
    Ok((render(doc), pass))
}

pub fn run(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::Solve(a) => solve(a).map(|s| (s, true)),
        Command::Curve(a) => curve(a).map(|s| (s, true)),
        Command::Sweep(a) => sweep(a).map(|s| (s, true)),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok((stdout, ok)) => Outcome { stdout, code: if ok { 0 } else { 1 } },
        Err(e) => {
            eprintln!("error: {}", e.message);
            Outcome { stdout: e.to_json(), code: 2 }
        }
    }
}

/// Parses `args` (including the program name) and runs the command. Usage
/// errors produce an `invalid_flags` error document and exit code 2.
pub fn run_from<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) if !e.use_stderr() => Outcome { stdout: e.to_string(), code: 0 },
        Err(e) => {
            eprint!("{e}");
            let err = CliError { kind: "invalid_flags", message: e.kind().to_string(), detail: Map::new() };
            Outcome { stdout: err.to_json(), code: 2 }
        }
    }
}
