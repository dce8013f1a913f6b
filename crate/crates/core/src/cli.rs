//! Command-line front end: argument parsing, dispatch and deterministic
//! CSV/JSON output.
//!
//! Exit codes: 0 on success, 2 when a kernel validation or bound check
//! fails, 1 on usage errors (bad flags, unknown names, empty index ranges).
//! Errors are reported on stderr as a single JSON object.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::analysis::{convergence_study, ConvergenceReport, DEFAULT_GRID_POINTS};
use crate::error::{Error, Result};
use crate::kernels::{density_by_name, sigmoidal_by_name, validate_sigmoidal};
use crate::moments::{
    discrete_absolute_moment_with, truncated_algebraic_moment, MomentOptions, MomentQuery,
    DEFAULT_GRID_POINTS as MOMENT_GRID_POINTS, DEFAULT_TOLERANCE,
};
use crate::operators::{OperatorConfig, SteklovOperator};
use crate::quadrature::{QuadratureRule, DEFAULT_POINTS_PER_PIECE};
use crate::steklov::{steklov_mean, steklov_mean_oracle, SteklovConfig};
use crate::target::resolve_function_spec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILED_CHECK: i32 = 2;

/// Environment variable capping worker threads (0 or unset: automatic).
pub const THREADS_ENV: &str = "STEKLOV_THREADS";

#[derive(Debug, Clone, Parser)]
#[command(
    name = "steklov",
    version,
    about = "Steklov neural network operators: kernels, means, convergence studies"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Add a Unix timestamp to the JSON summary.
    #[arg(long, global = true)]
    pub stamp: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Certify the admissibility conditions of a sigmoidal on sampled grids.
    ValidateKernel {
        #[arg(long, default_value = "logistic")]
        kernel: String,
        #[arg(long, default_value_t = 5)]
        r_max: u32,
        #[arg(long, default_value_t = 1000)]
        grid: usize,
    },
    /// Discrete absolute moment M_β of a kernel (and optionally m_β^n at u).
    Moments {
        #[arg(long, default_value = "logistic")]
        kernel: String,
        #[arg(long)]
        beta: u32,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long, default_value_t = MOMENT_GRID_POINTS)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        min_radius: u64,
        /// Also report the truncated algebraic moment at this point.
        #[arg(long)]
        u: Option<f64>,
        /// Truncation radius for the algebraic moment.
        #[arg(long, default_value_t = 50)]
        n: u32,
    },
    /// Evaluate one Steklov mean f_{r,h}(x).
    SteklovMean {
        #[arg(long)]
        function: String,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = DEFAULT_POINTS_PER_PIECE)]
        points_per_piece: usize,
        /// Cross-check with the tensor-product rule (r ≤ 4) using this many
        /// nodes per dimension.
        #[arg(long)]
        oracle_nodes: Option<usize>,
    },
    /// Evaluate F_n^r f on a grid and write x,approx,exact,abs_error.
    Approximate {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        r: u32,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sup errors and rate bounds over a list of n.
    Convergence(StudyArgs),
    /// Like `convergence`, exiting with status 2 if any row exceeds its bound.
    BoundCheck {
        #[command(flatten)]
        study: StudyArgs,
        /// Multiply every bound by this factor before comparing.
        #[arg(long, default_value_t = 1.0)]
        bound_scale: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct TargetArgs {
    #[arg(long, default_value = "logistic")]
    pub kernel: String,
    /// Catalog name or path to a CSV file with header `x,y`.
    #[arg(long)]
    pub function: String,
}

#[derive(Debug, Clone, Args)]
pub struct StudyArgs {
    #[command(flatten)]
    pub target: TargetArgs,
    #[arg(long)]
    pub r: u32,
    #[arg(long, value_delimiter = ',', default_value = "10,20,40,80,160")]
    pub n: Vec<u32>,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub grid: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Sizes the global worker pool from [`THREADS_ENV`].
pub fn configure_threads() {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    if threads > 0 {
        // only fails if a pool already exists, which is fine
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

/// JSON error object written to stderr.
pub fn error_json(kind: &str, message: &str) -> String {
    json!({ "error": kind, "message": message }).to_string()
}

fn write_output(out: Option<&Path>, contents: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        }
        None => stdout.write_all(contents.as_bytes()).map_err(Error::from),
    }
}

fn stamp(mut summary: Value, enabled: bool) -> Value {
    if enabled {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        summary["stamp"] = json!(secs);
    }
    summary
}

/// CSV rows `x,approx,exact,abs_error`.
pub fn approximation_csv(points: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("x,approx,exact,abs_error\n");
    for &(x, approx, exact) in points {
        let _ = writeln!(out, "{x},{approx},{exact},{}", (approx - exact).abs());
    }
    out
}

fn study(args: &StudyArgs) -> Result<ConvergenceReport> {
    let f = resolve_function_spec(&args.target.function)?;
    let kernel = density_by_name(&args.target.kernel)?;
    convergence_study(&f, &kernel, args.r, &args.n, args.grid)
}

fn report_summary(report: &ConvergenceReport) -> Value {
    json!({
        "kernel": report.kernel,
        "function": report.function,
        "r": report.r,
        "grid": report.grid_points,
        "m1": report.m1,
        "bound_kind": report.omega_source.map(|s| s.label()),
        "rows": report.rows,
    })
}

/// Runs one subcommand, returning the process exit code.
pub fn run(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match dispatch(config, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "{}", error_json(e.kind(), &e.to_string()));
            EXIT_USAGE
        }
    }
}

fn dispatch(config: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    let emit = |stdout: &mut dyn Write, v: Value| -> Result<()> {
        writeln!(stdout, "{}", stamp(v, config.stamp))?;
        Ok(())
    };
    match &config.command {
        Command::ValidateKernel {
            kernel,
            r_max,
            grid,
        } => {
            let s = sigmoidal_by_name(kernel)?;
            let report = validate_sigmoidal(&s, *r_max, *grid)?;
            let passed = report.all_passed();
            emit(stdout, json!({ "passed": passed, "report": report }))?;
            Ok(if passed { EXIT_OK } else { EXIT_FAILED_CHECK })
        }
        Command::Moments {
            kernel,
            beta,
            tol,
            grid,
            min_radius,
            u,
            n,
        } => {
            let phi = density_by_name(kernel)?;
            let opts = MomentOptions {
                tol: *tol,
                grid_points: *grid,
                min_radius: *min_radius,
            };
            let moment = discrete_absolute_moment_with(&phi, *beta, opts)?;
            let mut summary = json!({ "kernel": kernel, "absolute_moment": moment });
            if let Some(u) = u {
                let q = MomentQuery::new(*beta, *u, *n)?;
                summary["algebraic_moment"] = json!({
                    "beta": beta,
                    "u": u,
                    "n": n,
                    "value": truncated_algebraic_moment(&phi, q),
                });
            }
            emit(stdout, summary)?;
            Ok(EXIT_OK)
        }
        Command::SteklovMean {
            function,
            r,
            h,
            x,
            points_per_piece,
            oracle_nodes,
        } => {
            let f = resolve_function_spec(function)?;
            let cfg = SteklovConfig::new(*r, *h)?;
            let rule = QuadratureRule::gauss_legendre(*points_per_piece)?;
            let value = steklov_mean(&f, cfg, *x, &rule)?;
            let mut summary = json!({
                "function": f.name(),
                "r": r,
                "h": h,
                "x": x,
                "value": value,
            });
            if let Some(nodes) = oracle_nodes {
                let oracle = steklov_mean_oracle(&f, cfg, *x, *nodes)?;
                summary["oracle"] = json!(oracle);
                summary["difference"] = json!((value - oracle).abs());
            }
            emit(stdout, summary)?;
            Ok(EXIT_OK)
        }
        Command::Approximate {
            target,
            n,
            r,
            grid,
            out,
        } => {
            let f = resolve_function_spec(&target.function)?;
            let kernel = density_by_name(&target.kernel)?;
            let cfg = OperatorConfig::for_function(&f, *n, *r, kernel)?;
            let op = SteklovOperator::new(&f, cfg)?;
            let points: Vec<(f64, f64, f64)> = op
                .evaluate_on_grid(*grid)?
                .into_iter()
                .map(|(x, y)| (x, y, f.eval(x)))
                .collect();
            write_output(out.as_deref(), &approximation_csv(&points), stdout)?;
            if out.is_some() {
                let max_error = points.iter().map(|p| (p.1 - p.2).abs()).fold(0.0, f64::max);
                emit(
                    stdout,
                    json!({
                        "function": f.name(),
                        "kernel": target.kernel,
                        "n": n,
                        "r": r,
                        "grid": grid,
                        "sup_error": max_error,
                    }),
                )?;
            }
            Ok(EXIT_OK)
        }
        Command::Convergence(args) => {
            let report = study(args)?;
            write_output(args.out.as_deref(), &report.to_csv(), stdout)?;
            if args.out.is_some() {
                emit(stdout, report_summary(&report))?;
            }
            Ok(EXIT_OK)
        }
        Command::BoundCheck {
            study: args,
            bound_scale,
        } => {
            if args.r < 2 {
                return Err(Error::OrderOutOfScope { r: args.r });
            }
            let mut report = study(args)?;
            report.scale_bounds(*bound_scale);
            if let Some(out) = &args.out {
                write_output(Some(out), &report.to_csv(), stdout)?;
            }
            let violations = report.violations();
            let mut summary = report_summary(&report);
            summary["bound_scale"] = json!(bound_scale);
            summary["violations"] = json!(violations);
            summary["passed"] = json!(violations.is_empty());
            emit(stdout, summary)?;
            Ok(if violations.is_empty() {
                EXIT_OK
            } else {
                EXIT_FAILED_CHECK
            })
        }
    }
}

/// Parses `args` and runs; clap help/version print and exit 0.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(config) => run(&config, stdout, stderr),
        Err(e) => {
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = writeln!(stderr, "{}", error_json("UsageError", e.to_string().trim()));
                    EXIT_USAGE
                }
            }
        }
    }
}
