//! `hyperkappa` command-line front end: argument parsing, orchestration and reports.

mod text;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hyperkappa::correspondence::bolza_match;
use hyperkappa::curves::HyperellipticCurve;
use hyperkappa::expansion::{kappa_from_expansion, DEFAULT_ORDER, MAX_ORDER};
use hyperkappa::identities::kappa_report;
use hyperkappa::periods::{compute_periods, PeriodBundle};
use hyperkappa::quadrature::DEFAULT_QUAD_TOL;
use hyperkappa::report::{
    cmat, parse_curve_json, to_json, Cx, ExpansionJson, KappaJson, MatchReport, PeriodReport,
    ThetaReport, WeierstrassJson,
};
use hyperkappa::suite::{
    verify_curve, verify_random, weierstrass_split, StageError, Suite, VerifyConfig, VerifyReport,
    DEFAULT_IDENTITY_TOL,
};
use hyperkappa::theta::{theta_table, ThetaTable, DEFAULT_THETA_TOL};
use hyperkappa::Error;

const EXIT_OK: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "hyperkappa", version, about = "Periods, theta constants and kappa for genus 1 and 2 hyperelliptic curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Curve as inline JSON: {"branch_points": [...]} or {"genus": g, "lambda": [...]}
    #[arg(long, global = true, conflicts_with = "curve_file")]
    curve: Option<String>,

    /// Path to a curve JSON file
    #[arg(long, global = true)]
    curve_file: Option<PathBuf>,

    /// Identity tolerance
    #[arg(long, global = true, default_value_t = DEFAULT_IDENTITY_TOL)]
    tol: f64,

    /// Quadrature tolerance, between 1e-14 and 1e-6
    #[arg(long, global = true, default_value_t = DEFAULT_QUAD_TOL)]
    quad_tol: f64,

    /// Theta series truncation tolerance, between 1e-16 and 1e-6
    #[arg(long, global = true, default_value_t = DEFAULT_THETA_TOL)]
    theta_tol: f64,

    /// Expansion order in the local parameter at infinity
    #[arg(long, global = true, default_value_t = DEFAULT_ORDER)]
    order: i32,

    #[arg(long, global = true, value_enum, default_value_t = SuiteArg::Full)]
    suite: SuiteArg,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Seed for random suite curves and sample points
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Period matrices, tau and kappa
    Periods,
    /// Theta constants and derivatives for every characteristic
    Theta,
    /// Odd characteristics matched to branch points
    Match,
    /// kappa by every available route
    Kappa,
    /// Identity suite on the given curve, or on seeded random curves
    Verify,
    /// kappa from the expansion at infinity
    Expand,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Periods => "periods",
            Command::Theta => "theta",
            Command::Match => "match",
            Command::Kappa => "kappa",
            Command::Verify => "verify",
            Command::Expand => "expand",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum SuiteArg {
    Quick,
    Full,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Text,
}

#[derive(Serialize)]
#[serde(rename_all = "lowercase")]
enum Status {
    Ok,
    Fail,
    Error,
}

#[derive(Serialize)]
struct Envelope<T: Serialize> {
    command: &'static str,
    status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<T>,
    errors: Vec<StageError>,
}

#[derive(Serialize)]
struct EllipticKappa {
    kappa_direct: Vec<Vec<Cx>>,
    weierstrass: WeierstrassJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa_expansion: Option<Vec<Vec<Cx>>>,
}

#[derive(Serialize)]
struct ExpandReport {
    kappa_direct: Vec<Vec<Cx>>,
    kappa_gap: f64,
    expansion: ExpansionJson,
}

/// Failure of a stage, with the exit code it maps to.
struct Failure {
    code: u8,
    error: StageError,
}

fn input_error(stage: &str, e: &Error) -> Failure {
    Failure { code: EXIT_INPUT, error: StageError::new(stage, e) }
}

fn stage<T>(name: &str, r: hyperkappa::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| {
        let code = match e {
            Error::InvalidInput(_) | Error::DegenerateCurve(..) | Error::UnsupportedGenus(_) => EXIT_INPUT,
            _ => EXIT_FAIL,
        };
        Failure { code, error: StageError::new(name, &e) }
    })
}

fn check_ranges(cli: &Cli) -> Result<(), Failure> {
    let bad = |msg: String| Err(input_error("config", &Error::InvalidInput(msg)));
    if !(cli.tol > 0.0 && cli.tol <= 1e-2) {
        return bad(format!("--tol {} outside (0, 1e-2]", cli.tol));
    }
    if !(1e-14..=1e-6).contains(&cli.quad_tol) {
        return bad(format!("--quad-tol {} outside [1e-14, 1e-6]", cli.quad_tol));
    }
    if !(1e-16..=1e-6).contains(&cli.theta_tol) {
        return bad(format!("--theta-tol {} outside [1e-16, 1e-6]", cli.theta_tol));
    }
    if !(2..=MAX_ORDER).contains(&cli.order) {
        return bad(format!("--order {} outside [2, {MAX_ORDER}]", cli.order));
    }
    Ok(())
}

fn load_curve(cli: &Cli) -> Result<Option<HyperellipticCurve>, Failure> {
    let text = match (&cli.curve, &cli.curve_file) {
        (Some(s), _) => s.clone(),
        (None, Some(path)) => std::fs::read_to_string(path).map_err(|e| {
            input_error("input", &Error::InvalidInput(format!("{}: {e}", path.display())))
        })?,
        (None, None) => return Ok(None),
    };
    stage("input", parse_curve_json(&text)).map(Some)
}

fn require_curve(cli: &Cli) -> Result<HyperellipticCurve, Failure> {
    load_curve(cli)?.ok_or_else(|| {
        input_error("input", &Error::InvalidInput("--curve or --curve-file is required".into()))
    })
}

fn periods_and_theta(cli: &Cli, c: &HyperellipticCurve) -> Result<(PeriodBundle, ThetaTable), Failure> {
    let b = stage("periods", compute_periods(c, cli.quad_tol))?;
    let tt = stage("theta", theta_table(&b, cli.theta_tol))?;
    Ok((b, tt))
}

fn verify_config(cli: &Cli) -> VerifyConfig {
    VerifyConfig {
        suite: match cli.suite {
            SuiteArg::Quick => Suite::Quick,
            SuiteArg::Full => Suite::Full,
        },
        tol: cli.tol,
        quad_tol: cli.quad_tol,
        theta_tol: cli.theta_tol,
        order: cli.order,
        seed: cli.seed,
        ..VerifyConfig::default()
    }
}

/// Serialized report plus its rendering, chosen once the command finishes.
struct Output {
    status: u8,
    json: String,
    text: String,
}

fn emit<T: Serialize>(command: Command, r: Result<(T, bool), Failure>) -> Output {
    let (status, code, report, errors) = match r {
        Ok((rep, true)) => (Status::Ok, EXIT_OK, Some(rep), Vec::new()),
        Ok((rep, false)) => (Status::Fail, EXIT_FAIL, Some(rep), Vec::new()),
        Err(f) => (Status::Error, f.code, None, vec![f.error]),
    };
    let env = Envelope { command: command.name(), status, report, errors };
    let json = to_json(&env);
    let text = text::render(&json);
    Output { status: code, json, text }
}

fn run_verify(cli: &Cli) -> Result<(VerifyReport, bool), Failure> {
    let cfg = verify_config(cli);
    let rep = match load_curve(cli)? {
        Some(c) => VerifyReport::new(&cfg, vec![verify_curve("input", &c, &cfg)]),
        None => verify_random(&cfg),
    };
    let passed = rep.passed;
    Ok((rep, passed))
}

fn run(cli: &Cli) -> Output {
    let cmd = cli.command;
    let prepared = check_ranges(cli).and_then(|_| match cmd {
        Command::Verify => Ok(None),
        _ => require_curve(cli).map(Some),
    });
    let curve = match prepared {
        Ok(c) => c,
        Err(f) => return emit::<()>(cmd, Err(f)),
    };
    match (cmd, curve) {
        (Command::Verify, _) => emit(cmd, run_verify(cli)),
        (Command::Periods, Some(c)) => emit(
            cmd,
            stage("periods", compute_periods(&c, cli.quad_tol)).map(|b| (PeriodReport::new(&b), true)),
        ),
        (Command::Theta, Some(c)) => emit(
            cmd,
            periods_and_theta(cli, &c).map(|(_, tt)| (ThetaReport::new(&tt), true)),
        ),
        (Command::Match, Some(c)) => {
            let r = periods_and_theta(cli, &c).and_then(|(_, tt)| stage("match", bolza_match(&tt, &c)));
            match r {
                Ok(m) => {
                    let rep = MatchReport { branch_points: hyperkappa::report::cvec(&c.sorted_branch_points()), matching: &m };
                    emit(cmd, Ok((rep, true)))
                }
                Err(f) => emit::<()>(cmd, Err(f)),
            }
        }
        (Command::Kappa, Some(c)) => {
            if c.genus() == 1 {
                emit(cmd, elliptic_kappa(cli, &c))
            } else {
                emit(cmd, genus_two_kappa(cli, &c))
            }
        }
        (Command::Expand, Some(c)) => emit(cmd, expand(cli, &c)),
        (_, None) => unreachable!("curve required above"),
    }
}

fn elliptic_kappa(cli: &Cli, c: &HyperellipticCurve) -> Result<(EllipticKappa, bool), Failure> {
    let (b, tt) = periods_and_theta(cli, c)?;
    let weierstrass = stage("weierstrass", weierstrass_split(c, &b, &tt))?;
    let expansion = stage("expansion", kappa_from_expansion(c, &b, &tt, None, cli.order))?;
    Ok((
        EllipticKappa {
            kappa_direct: cmat(&b.kappa),
            weierstrass,
            kappa_expansion: Some(cmat(&expansion.kappa)),
        },
        true,
    ))
}

fn genus_two_kappa(cli: &Cli, c: &HyperellipticCurve) -> Result<(KappaJson, bool), Failure> {
    let (b, tt) = periods_and_theta(cli, c)?;
    let m = stage("match", bolza_match(&tt, c))?;
    let mut rep = stage("kappa", kappa_report(c, &b, &tt, &m))?;
    let exp = stage("expansion", kappa_from_expansion(c, &b, &tt, Some(&m), cli.order))?;
    rep.set_expansion(exp.kappa);
    Ok((KappaJson::new(&rep), true))
}

fn expand(cli: &Cli, c: &HyperellipticCurve) -> Result<(ExpandReport, bool), Failure> {
    let (b, tt) = periods_and_theta(cli, c)?;
    let m = if c.genus() == 2 { Some(stage("match", bolza_match(&tt, c))?) } else { None };
    let exp = stage("expansion", kappa_from_expansion(c, &b, &tt, m.as_ref(), cli.order))?;
    let gap = hyperkappa::linalg::max_abs(&(&exp.kappa - &b.kappa));
    Ok((
        ExpandReport { kappa_direct: cmat(&b.kappa), kappa_gap: gap, expansion: ExpansionJson::new(&exp) },
        true,
    ))
}

/// Exit code and captured output of one invocation.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (program name first) and runs the command.
pub fn run_args<I, T>(args: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                Invocation { code: EXIT_INPUT, stdout: String::new(), stderr: rendered }
            } else {
                Invocation { code: EXIT_OK, stdout: rendered, stderr: String::new() }
            };
        }
    };
    let out = run(&cli);
    let stdout = match cli.format {
        Format::Json => format!("{}\n", out.json),
        Format::Text => out.text,
    };
    Invocation { code: out.status, stdout, stderr: String::new() }
}
