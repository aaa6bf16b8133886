//! `stiefel-inj`: injectivity-radius bounds, conjugate-point witnesses and
//! randomized certificates for the Stiefel manifold under the β-metric.
//!
//! Exit codes: 0 success, 2 invalid arguments or dimensions, 3 numerical
//! verification failure, 4 I/O error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use stiefel_inj::{
    build_witness, inj_upper_bound, iterations_profile, run_certificate_with, run_sweep,
    solve_t_root, verify_witness, BetaParam, CertificateRecord, Error, LogPolicy, SweepGrid,
};

use output::{emit, Field, Format, Report};

/// Environment variable holding the number of sweep worker threads.
pub const WORKERS_ENV: &str = "STIEFEL_INJ_WORKERS";

const WITNESS_TOLERANCE: f64 = 1e-8;
const DEFAULT_BETAS: &str = "0.1:0.05:1.5";
const DEFAULT_OFFSETS: &str = "0,0.05";
const DEFAULT_DELTAS: &str = "1,0.1,0.01,0.001,0.0001";

const RECORD_COLUMNS: &[&str] = &["beta", "rho", "found", "iterations", "witness_length", "seed"];

#[derive(Parser, Debug)]
#[command(name = "stiefel-inj", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Upper bound on the injectivity radius and its ingredients.
    Bound {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Smallest positive conjugate time t^r for a given beta.
    Troot {
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Build and verify the conjugate-point witness (needs 2 <= p <= n-2).
    Witness {
        #[command(flatten)]
        point: PointArgs,
        /// Use the t = pi branch instead of t^r.
        #[arg(long)]
        pi_branch: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the randomized certificate at one radius.
    Certify {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iters: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fail instead of pairing eigenvalues at -1 in the rotation logarithm.
        #[arg(long)]
        strict_log: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Certificate runs over a (beta, offset) grid with rho = bound + offset.
    Sweep {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        p: usize,
        /// Comma-separated values or start:step:stop.
        #[arg(long, default_value = DEFAULT_BETAS)]
        betas: String,
        #[arg(long, default_value = DEFAULT_OFFSETS)]
        offsets: String,
        #[arg(long, default_value_t = 100_000)]
        max_iters: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        strict_log: bool,
        /// Also write a matplotlib script next to the output.
        #[arg(long)]
        emit_plot_script: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Iterations needed at rho = bound + delta for several deltas.
    Profile {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value = DEFAULT_DELTAS, num_args = 0..=1, default_missing_value = "")]
        deltas: String,
        #[arg(long, default_value_t = 1_000_000)]
        max_iters: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args, Debug, Serialize)]
struct PointArgs {
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    p: usize,
}

#[derive(Args, Debug)]
struct OutArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Verification(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Verification(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Verification(m) | CliError::Io(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidDims { .. }
            | Error::InvalidBeta(_)
            | Error::InvalidRadius(_)
            | Error::DimensionMismatch(_)
            | Error::ZeroTime
            | Error::ZeroTangent => CliError::Usage(e.to_string()),
            _ => CliError::Verification(e.to_string()),
        }
    }
}

fn io_err(path: Option<&Path>, e: std::io::Error) -> CliError {
    match path {
        Some(p) => CliError::Io(format!("{}: {e}", p.display())),
        None => CliError::Io(format!("stdout: {e}")),
    }
}

/// Comma-separated list of numbers, or `start:step:stop` inclusive. An empty
/// string is an empty list.
fn parse_list(flag: &str, s: &str) -> Result<Vec<f64>, CliError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let bad = |v: &str| CliError::Usage(format!("--{flag}: cannot parse {v:?} as a number"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    if parts.len() == 3 {
        let nums = parts
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| bad(v)))
            .collect::<Result<Vec<_>, _>>()?;
        let (start, step, stop) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0) || !(stop >= start) {
            return Err(CliError::Usage(format!("--{flag}: empty or invalid range {s:?}")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        // Rounded to 12 decimals so 0.1:0.05:1.5 yields 0.15, not 0.15000000000000002.
        return Ok((0..=count)
            .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
            .collect());
    }
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| bad(v)))
        .collect()
}

fn write_report(report: &Report, out: &OutArgs) -> Result<(), CliError> {
    let text = report
        .render(out.format)
        .map_err(|e| io_err(out.out.as_deref(), e))?;
    emit(&text, out.out.as_deref()).map_err(|e| io_err(out.out.as_deref(), e))
}

fn record_row(r: &CertificateRecord) -> Vec<Field> {
    vec![
        Field::Float(r.beta),
        Field::Float(r.rho),
        Field::Bool(r.found),
        Field::Int(r.iterations),
        Field::MaybeFloat(r.witness_length),
        Field::Int(r.seed),
    ]
}

fn policy(strict: bool) -> LogPolicy {
    if strict {
        LogPolicy::Strict
    } else {
        LogPolicy::Canonical
    }
}

fn cmd_bound(point: &PointArgs, out: &OutArgs) -> Result<(), CliError> {
    let r = inj_upper_bound(point.beta, point.n, point.p)?;
    let report = Report {
        columns: &[
            "beta", "n", "p", "t_root", "conj_bound", "loop_bound", "inj_upper", "regime",
        ],
        rows: vec![vec![
            Field::Float(r.beta),
            Field::Int(r.n as u64),
            Field::Int(r.p as u64),
            Field::Float(r.t_root),
            Field::MaybeFloat(r.conj_bound),
            Field::Float(r.loop_bound),
            Field::Float(r.inj_upper),
            Field::Text(r.regime.as_str().into()),
        ]],
        config: json!({"command": "bound", "beta": point.beta, "n": point.n, "p": point.p}),
    };
    write_report(&report, out)
}

fn cmd_troot(beta: f64, out: &OutArgs) -> Result<(), CliError> {
    let t = solve_t_root(beta)?;
    let report = Report {
        columns: &["beta", "t_root", "conj_length"],
        rows: vec![vec![
            Field::Float(beta),
            Field::Float(t),
            Field::Float(t * std::f64::consts::SQRT_2),
        ]],
        config: json!({"command": "troot", "beta": beta}),
    };
    write_report(&report, out)
}

fn cmd_witness(point: &PointArgs, pi_branch: bool, out: &OutArgs) -> Result<(), CliError> {
    let mp = BetaParam::new(point.beta)?;
    let mut wit = build_witness(&mp, point.n, point.p, pi_branch)?;
    let residual = verify_witness(&mut wit)?;
    let bound = inj_upper_bound(point.beta, point.n, point.p)?;
    let report = Report {
        columns: &[
            "beta", "n", "p", "branch", "t_conj", "t_root", "geodesic_length", "conj_bound",
            "residual",
        ],
        rows: vec![vec![
            Field::Float(point.beta),
            Field::Int(point.n as u64),
            Field::Int(point.p as u64),
            Field::Text(if pi_branch { "pi" } else { "root" }.into()),
            Field::Float(wit.t_conj),
            Field::Float(bound.t_root),
            Field::Float(wit.geodesic_length()),
            Field::MaybeFloat(bound.conj_bound),
            Field::Float(residual),
        ]],
        config: json!({
            "command": "witness", "beta": point.beta, "n": point.n, "p": point.p,
            "pi_branch": pi_branch,
        }),
    };
    write_report(&report, out)?;
    if !(residual <= WITNESS_TOLERANCE) {
        return Err(CliError::Verification(format!(
            "witness residual {residual:e} exceeds {WITNESS_TOLERANCE:e}"
        )));
    }
    Ok(())
}

fn cmd_certify(
    point: &PointArgs,
    rho: f64,
    max_iters: u64,
    seed: u64,
    strict_log: bool,
    out: &OutArgs,
) -> Result<(), CliError> {
    let mp = BetaParam::new(point.beta)?;
    let rec = run_certificate_with(&mp, point.n, point.p, rho, max_iters, seed, policy(strict_log))?;
    let report = Report {
        columns: RECORD_COLUMNS,
        rows: vec![record_row(&rec)],
        config: json!({
            "command": "certify", "beta": point.beta, "n": point.n, "p": point.p, "rho": rho,
            "max_iters": max_iters, "seed": seed, "strict_log": strict_log,
            "total_space_riemannian": rec.total_space_riemannian,
        }),
    };
    write_report(&report, out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    n: usize,
    p: usize,
    betas: &str,
    offsets: &str,
    max_iters: u64,
    seed: u64,
    strict_log: bool,
    emit_plot_script: bool,
    out: &OutArgs,
) -> Result<(), CliError> {
    let grid = SweepGrid {
        betas: parse_list("betas", betas)?,
        rho_offsets: parse_list("offsets", offsets)?,
        max_iterations: max_iters,
        n,
        p,
        master_seed: seed,
        policy: policy(strict_log),
    };
    let records = run_sweep(&grid)?;
    let report = Report {
        columns: RECORD_COLUMNS,
        rows: records.iter().map(record_row).collect(),
        config: json!({
            "command": "sweep", "n": n, "p": p, "betas": grid.betas,
            "offsets": grid.rho_offsets, "max_iters": max_iters, "seed": seed,
            "strict_log": strict_log,
            "note": "rows with beta > 0.5 use a pseudo-Riemannian total space; \
                     reaching the cap there is weaker evidence",
        }),
    };
    write_report(&report, out)?;
    if emit_plot_script {
        let path = match &out.out {
            Some(p) => p.with_extension("py"),
            None => PathBuf::from("stiefel_inj_sweep.py"),
        };
        std::fs::write(&path, plot::sweep_script(&records, n, p))
            .map_err(|e| io_err(Some(&path), e))?;
    }
    Ok(())
}

fn cmd_profile(
    point: &PointArgs,
    deltas: &str,
    max_iters: u64,
    seed: u64,
    out: &OutArgs,
) -> Result<(), CliError> {
    let mp = BetaParam::new(point.beta)?;
    let deltas = parse_list("deltas", deltas)?;
    let pts = iterations_profile(&mp, point.n, point.p, &deltas, max_iters, seed)?;
    let report = Report {
        columns: &["delta", "rho", "iterations", "found"],
        rows: pts
            .iter()
            .map(|q| {
                vec![
                    Field::Float(q.delta),
                    Field::Float(q.rho),
                    Field::Int(q.iterations),
                    Field::Bool(q.found),
                ]
            })
            .collect(),
        config: json!({
            "command": "profile", "beta": point.beta, "n": point.n, "p": point.p,
            "deltas": deltas, "max_iters": max_iters, "seed": seed,
        }),
    };
    write_report(&report, out)
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let workers: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|w| *w > 0)
        .ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV}={raw:?} is not a positive integer")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| CliError::Usage(format!("{WORKERS_ENV}: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_workers()?;
    match &cli.command {
        Command::Bound { point, out } => cmd_bound(point, out),
        Command::Troot { beta, out } => cmd_troot(*beta, out),
        Command::Witness {
            point,
            pi_branch,
            out,
        } => cmd_witness(point, *pi_branch, out),
        Command::Certify {
            point,
            rho,
            max_iters,
            seed,
            strict_log,
            out,
        } => cmd_certify(point, *rho, *max_iters, *seed, *strict_log, out),
        Command::Sweep {
            n,
            p,
            betas,
            offsets,
            max_iters,
            seed,
            strict_log,
            emit_plot_script,
            out,
        } => cmd_sweep(
            *n,
            *p,
            betas,
            offsets,
            *max_iters,
            *seed,
            *strict_log,
            *emit_plot_script,
            out,
        ),
        Command::Profile {
            point,
            deltas,
            max_iters,
            seed,
            out,
        } => cmd_profile(point, deltas, *max_iters, *seed, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
