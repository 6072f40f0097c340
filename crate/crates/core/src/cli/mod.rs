//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on a runtime failure or a failed verdict,
//! 2 on a usage or configuration error.

pub mod config;
pub mod tableau_file;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::discretize::{build_grid, build_operators, discrete_norms, initial_data, NormKind};
use crate::error::{Error, Result};
use crate::exprk::solve;
use crate::harness::{default_tau_list, emit_csv, run_experiment, ExperimentSpec, SchemeSpec};
use crate::orderchk::full_report;
use crate::probes::{
    fourier_beta_probe, relative_boundedness_probe, smoothing_envelope, smoothing_probe,
    CoefficientRule, ProbeReport, ENVELOPE_SLACK,
};

pub use config::RunConfig;
pub use tableau_file::{format_tableau, load_tableau, parse_tableau};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_SCHEME: &str = "rk3paper";
const DEFAULT_C: f64 = 0.5;
const DEFAULT_N: usize = 399;
const DEFAULT_NU: f64 = 0.2;
const DEFAULT_T: f64 = 1.0;
const DEFAULT_OUT: &str = "convergence.csv";
const DEFAULT_SEED: u64 = 1;
const DEFAULT_SOLVE_TAU: f64 = 1.0 / 64.0;

#[derive(Parser, Debug)]
#[command(
    name = "stiffexp",
    version,
    about = "Exponential Runge-Kutta integrators for stiff advection-diffusion problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convergence study against an RK4 reference; writes a CSV of errors and fitted orders
    Convergence(ConvergenceArgs),
    /// Residuals of the stiff order conditions; exit 0 iff every claimed condition passes
    CheckOrder(CheckOrderArgs),
    /// Numerical probes of the smoothing, relative-boundedness and Fourier-series bounds
    Probe(ProbeArgs),
    /// Single integration on the testbed; prints norms of the final state
    Solve(SolveArgs),
}

#[derive(Args, Debug, Default)]
struct SchemeArgs {
    /// key = value configuration file; flags take precedence over its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in scheme: euler, rk2, rk2(<c>), rk3paper [default: rk3paper]
    #[arg(long)]
    scheme: Option<String>,
    /// Node of the second-order family [default: 0.5]
    #[arg(long)]
    c: Option<f64>,
    /// Custom tableau file; overrides --scheme
    #[arg(long)]
    tableau: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct ProblemArgs {
    /// Interior grid points [default: 399]
    #[arg(long)]
    n: Option<usize>,
    /// Diffusion coefficient [default: 0.2]
    #[arg(long)]
    nu: Option<f64>,
    /// Final time [default: 1]
    #[arg(long = "T")]
    t_final: Option<f64>,
}

#[derive(Args, Debug)]
struct ConvergenceArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    problem: ProblemArgs,
    /// Comma-separated decreasing step sizes, at least 4 [default: 2^-4,...,2^-10]
    #[arg(long)]
    tau_list: Option<String>,
    /// Reference RK4 step [default: min(2^-16, 0.9*2.7/spectral radius)]
    #[arg(long)]
    tau_ref: Option<f64>,
    /// Comma-separated norms among l1, l2, linf [default: l1,l2,linf]
    #[arg(long)]
    norms: Option<String>,
    /// Output CSV path [default: convergence.csv]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckOrderArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Seed for the random test matrices [default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Check the claims of this stiff order instead of the scheme's own
    #[arg(long)]
    require_order: Option<u8>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ProbeKind {
    Smoothing,
    Relbound,
    Fourier,
}

#[derive(Args, Debug)]
struct ProbeArgs {
    /// Which probe to run
    #[arg(value_enum)]
    kind: ProbeKind,
    /// Fractional exponent for smoothing and relbound [default: 0.5]
    #[arg(long)]
    gamma: Option<f64>,
    /// Fourier exponent [default: 0.24]
    #[arg(long)]
    beta: Option<f64>,
    /// Fourier norm: l1, l2 or linf [default: l2]
    #[arg(long)]
    norm: Option<String>,
    /// Fourier coefficients: initial-data, inverse-k or zero [default: initial-data]
    #[arg(long)]
    rule: Option<String>,
    /// Testbed size for smoothing [default: 399]
    #[arg(long)]
    n: Option<usize>,
    /// Diffusion coefficient [default: 0.2]
    #[arg(long)]
    nu: Option<f64>,
    /// Comma-separated sizes: testbed n for relbound [default: 25,50,100,200,399],
    /// truncation N for fourier [default: 64,128,...,16384]
    #[arg(long)]
    n_list: Option<String>,
    /// Evaluation points on [0, 1] for fourier, at least 1000 [default: 1001]
    #[arg(long)]
    points: Option<usize>,
    /// Output CSV path; printed to standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    problem: ProblemArgs,
    /// Step size, must divide T [default: 2^-6]
    #[arg(long)]
    tau: Option<f64>,
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Convergence(a) => cmd_convergence(a),
        Command::CheckOrder(a) => cmd_check_order(a),
        Command::Probe(a) => cmd_probe(a),
        Command::Solve(a) => cmd_solve(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse { .. } => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// File entries, then flag entries on top.
fn layered(scheme: &SchemeArgs, flags: RunConfig) -> Result<(RunConfig, RunConfig)> {
    let file = match &scheme.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let flags = RunConfig {
        scheme: scheme.scheme.clone(),
        c: scheme.c,
        tableau: scheme.tableau.clone(),
        ..flags
    };
    Ok((file, flags))
}

/// A scheme or tableau set by flags beats either one set in the file.
fn resolve_scheme(file: &RunConfig, flags: &RunConfig) -> Result<SchemeSpec> {
    let spec = pick_scheme(file, flags)?;
    spec.tableau().map_err(|e| Error::Config(e.to_string()))?;
    Ok(spec)
}

fn pick_scheme(file: &RunConfig, flags: &RunConfig) -> Result<SchemeSpec> {
    let c = flags.c.or(file.c).unwrap_or(DEFAULT_C);
    for layer in [flags, file] {
        if let Some(p) = &layer.tableau {
            return Ok(SchemeSpec::Custom(load_tableau(p)?));
        }
        if let Some(s) = &layer.scheme {
            return SchemeSpec::parse(s, c);
        }
    }
    SchemeSpec::parse(DEFAULT_SCHEME, c)
}

fn problem_flags(p: &ProblemArgs) -> RunConfig {
    RunConfig {
        n: p.n,
        nu: p.nu,
        t_final: p.t_final,
        ..Default::default()
    }
}

fn cmd_convergence(a: ConvergenceArgs) -> Result<i32> {
    let mut flags = problem_flags(&a.problem);
    flags.tau_list = a
        .tau_list
        .as_deref()
        .map(|s| config::parse_list("tau-list", s))
        .transpose()?;
    flags.tau_ref = a.tau_ref;
    flags.norms = a.norms.as_deref().map(config::parse_norms).transpose()?;
    flags.out = a.out.clone();
    let (file, flags) = layered(&a.scheme, flags)?;
    let scheme = resolve_scheme(&file, &flags)?;
    let cfg = file.overridden_by(flags);

    let spec = ExperimentSpec {
        n_inner: cfg.n.unwrap_or(DEFAULT_N),
        nu: cfg.nu.unwrap_or(DEFAULT_NU),
        t_final: cfg.t_final.unwrap_or(DEFAULT_T),
        scheme,
        tau_list: cfg.tau_list.unwrap_or_else(default_tau_list),
        tau_ref: cfg.tau_ref,
        norms: cfg.norms.unwrap_or_else(|| NormKind::ALL.to_vec()),
    };
    spec.validate()?;
    let out = cfg.out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let report = run_experiment(&spec)?;
    emit_csv(&report, &out)?;

    println!(
        "scheme={} n={} nu={} T={} tau_ref={}",
        report.meta.scheme,
        report.meta.n_inner,
        report.meta.nu,
        report.meta.t_final,
        report.meta.tau_ref
    );
    let mut ok = true;
    for &k in &spec.norms {
        match report.fitted_order(k) {
            Some(p) => println!("fitted_order_{}={p}", k.name()),
            None => {
                println!("fitted_order_{}=nan (fewer than 2 usable rows)", k.name());
                ok = false;
            }
        }
    }
    let unstable = report
        .rows
        .iter()
        .filter(|r| r.flag == crate::harness::RowFlag::Unstable)
        .count();
    if unstable > 0 {
        println!("unstable rows: {unstable}");
    }
    println!("wrote {}", out.display());
    Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_check_order(a: CheckOrderArgs) -> Result<i32> {
    let flags = RunConfig {
        seed: a.seed,
        ..Default::default()
    };
    let (file, flags) = layered(&a.scheme, flags)?;
    let scheme = resolve_scheme(&file, &flags)?;
    let cfg = file.overridden_by(flags);
    let mut tab = scheme.tableau()?;
    if let Some(order) = a.require_order {
        tab = tab.with_order(order);
    }
    let report = full_report(&tab, cfg.seed.unwrap_or(DEFAULT_SEED))?;
    print!("{}", report.to_table());
    Ok(if report.claims_hold() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

fn parse_counts(flag: &str, s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::Config(format!("invalid value '{}' for '{flag}'", t.trim())))
        })
        .collect()
}

fn cmd_probe(a: ProbeArgs) -> Result<i32> {
    let nu = a.nu.unwrap_or(DEFAULT_NU);
    let n_list = a
        .n_list
        .as_deref()
        .map(|s| parse_counts("n-list", s))
        .transpose()?;
    let config_err = |e: Error| match e {
        Error::Parameter(m) => Error::Config(m),
        other => other,
    };
    let (report, ok, summary): (ProbeReport, bool, String) = match a.kind {
        ProbeKind::Smoothing => {
            let gamma = a.gamma.unwrap_or(0.5);
            let ops = build_operators(
                &build_grid(a.n.unwrap_or(DEFAULT_N)).map_err(config_err)?,
                nu,
            )
            .map_err(config_err)?;
            let t_grid: Vec<f64> = (0..=12).rev().map(|k| 0.5f64.powi(k)).collect();
            let r = smoothing_probe(&ops, gamma, &t_grid).map_err(config_err)?;
            let env = smoothing_envelope(gamma);
            let within = r.max <= env + ENVELOPE_SLACK;
            let s = format!("max={} envelope={env} within_envelope={within}", r.max);
            let ok = within && r.bounded;
            (r, ok, s)
        }
        ProbeKind::Relbound => {
            let gamma = a.gamma.unwrap_or(0.5);
            let ns = n_list.unwrap_or_else(|| vec![25, 50, 100, 200, 399]);
            let r = relative_boundedness_probe(gamma, &ns, nu).map_err(config_err)?;
            let s = format!("max={}", r.max);
            let ok = r.bounded;
            (r, ok, s)
        }
        ProbeKind::Fourier => {
            let beta = a.beta.unwrap_or(0.24);
            let norm = match a.norm.as_deref() {
                None => NormKind::L2,
                Some(s) => NormKind::parse(s).ok_or_else(|| {
                    Error::Config(format!("unknown norm '{s}' (expected l1, l2, linf)"))
                })?,
            };
            let rule = match a.rule.as_deref() {
                None => CoefficientRule::InitialData,
                Some(s) => CoefficientRule::parse(s).ok_or_else(|| {
                    Error::Config(format!(
                        "unknown coefficient rule '{s}' (expected initial-data, inverse-k, zero)"
                    ))
                })?,
            };
            let ns = n_list.unwrap_or_else(|| (6..=14).map(|k| 1usize << k).collect());
            let r = fourier_beta_probe(&rule, beta, &ns, norm, a.points.unwrap_or(1001))
                .map_err(config_err)?;
            let s = format!("max={}", r.max);
            let ok = r.bounded;
            (r, ok, s)
        }
    };
    match &a.out {
        Some(p) => {
            report.write_csv(p)?;
            println!("wrote {}", p.display());
        }
        None => print!("{}", report.to_csv()),
    }
    println!("{summary} verdict={}", report.verdict());
    Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_solve(a: SolveArgs) -> Result<i32> {
    let mut flags = problem_flags(&a.problem);
    flags.tau = a.tau;
    let (file, flags) = layered(&a.scheme, flags)?;
    let scheme = resolve_scheme(&file, &flags)?;
    let cfg = file.overridden_by(flags);
    let param = |e: Error| match e {
        Error::Parameter(m) => Error::Config(m),
        other => other,
    };
    let tab = scheme.tableau().map_err(param)?;
    let grid = build_grid(cfg.n.unwrap_or(DEFAULT_N)).map_err(param)?;
    let ops = build_operators(&grid, cfg.nu.unwrap_or(DEFAULT_NU)).map_err(param)?;
    let t_final = cfg.t_final.unwrap_or(DEFAULT_T);
    let tau = cfg.tau.unwrap_or(DEFAULT_SOLVE_TAU);
    crate::exprk::step_count(t_final, tau).map_err(param)?;
    let res = solve(&tab, &ops, &initial_data(&grid), t_final, tau)?;
    let norms = discrete_norms(&grid, &res.final_state)?;
    println!(
        "scheme={} n={} tau={} steps={} l1={:.16e} l2={:.16e} linf={:.16e}",
        tab.name(),
        grid.n_inner(),
        tau,
        res.steps,
        norms.l1,
        norms.l2,
        norms.linf
    );
    Ok(EXIT_OK)
}
