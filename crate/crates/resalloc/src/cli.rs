//! Command-line interface: `generate`, `solve`, `verify`, `bench`, and
//! `profile` subcommands over the library's instance JSON and records CSV
//! formats.
//!
//! Exit codes follow one convention everywhere: `0` for success, `1` for a
//! negative verdict (an infeasible instance, or a verification that fails),
//! `2` for genuine errors — bad flags, unreadable files, invalid
//! configuration.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{
    performance_profile, read_records_csv, run_bench, write_records_csv, BenchRecord, ProfilePoint,
};
use crate::dual::{solve, MultiplierRule, SolverConfig};
use crate::generator::{generate, Family, GeneratorSpec};
use crate::instance::{load_instance, save_instance, ProblemInstance, SolveStatus};
use crate::kkt::kkt_check;

#[derive(Parser)]
#[command(
    name = "resalloc",
    version,
    about = "Separable convex resource allocation: solve, verify, and benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded random instance and write its JSON.
    Generate(GenerateArgs),
    /// Solve an instance (from a file or generated on the fly); print a solve report.
    Solve(SolveArgs),
    /// Check a solve report against its instance; print the KKT residuals.
    Verify(VerifyArgs),
    /// Time the solvers over a grid of generated instances; emit records.
    Bench(BenchArgs),
    /// Turn a records file into performance-profile points.
    Profile(ProfileArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Instance family (commodity, quad-quad, portfolio, sampling,
    /// target-search, neg-entropy).
    #[arg(long)]
    family: Family,
    /// Number of variables.
    #[arg(long)]
    n: usize,
    /// RNG seed; identical seeds reproduce the instance bit for bit.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to place the resource level between its loosest and tightest
    /// feasible values (0 = tightest).
    #[arg(long, default_value_t = 0.5)]
    b_fraction: f64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON file. Omit it to generate one via --family/--n instead.
    instance: Option<PathBuf>,
    /// Family to generate when no instance file is given.
    #[arg(long, conflicts_with = "instance", requires = "n")]
    family: Option<Family>,
    /// Number of variables for the generated instance.
    #[arg(long, requires = "family")]
    n: Option<usize>,
    /// RNG seed for the generated instance.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Resource-level placement for the generated instance (0 = tightest).
    #[arg(long, default_value_t = 0.5)]
    b_fraction: f64,
    /// Multiplier update rule.
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Secant)]
    algorithm: AlgorithmArg,
    /// Safeguard margin in (0, 1/2): secant proposals closer than
    /// gamma·width to a bracket endpoint are replaced by the midpoint.
    #[arg(long, default_value_t = 0.2)]
    gamma: f64,
    /// Bracket-width stopping tolerance in arctan(multiplier) space.
    #[arg(long, default_value_t = 1e-10)]
    eps: f64,
    /// Relative feasibility band for exact-hit detection.
    #[arg(long, default_value_t = 1e-9)]
    feas_tol: f64,
    /// Wall-clock budget in seconds; the solver falls back to its best
    /// feasible point when it expires.
    #[arg(long)]
    timeout_s: Option<f64>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Instance JSON file.
    instance: PathBuf,
    /// Solve report JSON (as produced by `solve`) holding the point and
    /// multiplier to check.
    #[arg(long)]
    report: PathBuf,
    /// Residual tolerance, scaled by the instance's magnitudes.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Families to run, comma-separated or repeated; all six when omitted.
    #[arg(long, value_delimiter = ',')]
    family: Vec<Family>,
    /// Instance sizes, comma-separated (e.g. 200,2000).
    #[arg(long, value_delimiter = ',', default_value = "1000")]
    n: Vec<usize>,
    /// Instances per (family, size) cell; rep r uses seed + r.
    #[arg(long, default_value_t = 5)]
    reps: u32,
    /// Base RNG seed for the run.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Resource-level placement for every generated instance (0 = tightest).
    #[arg(long, default_value_t = 0.5)]
    b_fraction: f64,
    /// Per-solve wall budget; expired runs are recorded as fallbacks with
    /// their time capped here.
    #[arg(long)]
    timeout_s: Option<f64>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Records encoding.
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Args)]
struct ProfileArgs {
    /// Records CSV produced by `bench`.
    records: PathBuf,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Profile encoding.
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgorithmArg {
    Secant,
    Bisection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

/// Runs the CLI on `argv` (including the program name) and returns the
/// process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            // clap already distinguishes --help/--version (exit 0) from
            // usage errors (exit 2).
            let _ = err.print();
            return err.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Profile(args) => cmd_profile(args),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<i32, Box<dyn std::error::Error>> {
    let instance = generate(&GeneratorSpec {
        family: args.family,
        n: args.n,
        seed: args.seed,
        b_fraction: args.b_fraction,
    })?;
    match &args.out {
        Some(path) => save_instance(&instance, path)?,
        None => emit(&pretty_json(&instance)?, None)?,
    }
    Ok(0)
}

fn cmd_solve(args: SolveArgs) -> Result<i32, Box<dyn std::error::Error>> {
    let instance = resolve_instance(
        args.instance.as_deref(),
        args.family,
        args.n,
        args.seed,
        args.b_fraction,
    )?;
    let config = SolverConfig {
        gamma: args.gamma,
        eps: args.eps,
        feas_tol: args.feas_tol,
        rule: match args.algorithm {
            AlgorithmArg::Secant => MultiplierRule::Secant,
            AlgorithmArg::Bisection => MultiplierRule::Bisection,
        },
        deadline: deadline_from(args.timeout_s)?,
        ..SolverConfig::default()
    };
    let report = solve(&instance, &config)?;
    emit(&pretty_json(&report)?, args.out.as_deref())?;
    Ok(if report.status == SolveStatus::Infeasible {
        1
    } else {
        0
    })
}

fn cmd_verify(args: VerifyArgs) -> Result<i32, Box<dyn std::error::Error>> {
    let instance = load_instance(&args.instance)?;
    let text = fs::read_to_string(&args.report)
        .map_err(|e| format!("reading {}: {e}", args.report.display()))?;
    let report: crate::dual::SolveReport = serde_json::from_str(&text)
        .map_err(|e| format!("parsing {}: {e}", args.report.display()))?;
    let kkt = kkt_check(&instance, &report.x_star, report.lambda_star, args.tol);
    emit(&pretty_json(&kkt)?, args.out.as_deref())?;
    Ok(if kkt.pass { 0 } else { 1 })
}

fn cmd_bench(args: BenchArgs) -> Result<i32, Box<dyn std::error::Error>> {
    let families = if args.family.is_empty() {
        Family::ALL.to_vec()
    } else {
        args.family.clone()
    };
    let timeout = deadline_duration(args.timeout_s)?;
    let records = run_bench(
        &families,
        &args.n,
        args.reps,
        args.seed,
        args.b_fraction,
        timeout,
    )?;
    let text = match args.format {
        OutputFormat::Csv => records_csv(&records)?,
        OutputFormat::Json => pretty_json(&records)?,
    };
    emit(&text, args.out.as_deref())?;
    Ok(0)
}

fn cmd_profile(args: ProfileArgs) -> Result<i32, Box<dyn std::error::Error>> {
    let records = read_records_csv(&args.records)?;
    let points = performance_profile(&records);
    let text = match args.format {
        OutputFormat::Csv => profile_csv(&points),
        OutputFormat::Json => pretty_json(&points)?,
    };
    emit(&text, args.out.as_deref())?;
    Ok(0)
}

/// Loads the positional instance file, or generates one from the family
/// flags. clap enforces that exactly one source is usable, but the
/// nothing-given case lands here.
fn resolve_instance(
    path: Option<&Path>,
    family: Option<Family>,
    n: Option<usize>,
    seed: u64,
    b_fraction: f64,
) -> Result<ProblemInstance, Box<dyn std::error::Error>> {
    match (path, family) {
        (Some(p), None) => Ok(load_instance(p)?),
        (None, Some(family)) => Ok(generate(&GeneratorSpec {
            family,
            n: n.expect("clap ties --family to --n"),
            seed,
            b_fraction,
        })?),
        (Some(_), Some(_)) => unreachable!("clap rejects --family next to a file"),
        (None, None) => Err("give an instance file, or --family with --n".into()),
    }
}

fn deadline_duration(timeout_s: Option<f64>) -> Result<Option<Duration>, String> {
    match timeout_s {
        None => Ok(None),
        Some(s) if s > 0.0 && s.is_finite() => Ok(Some(Duration::from_secs_f64(s))),
        Some(s) => Err(format!("--timeout-s must be a positive number, got {s}")),
    }
}

fn deadline_from(timeout_s: Option<f64>) -> Result<Option<Instant>, String> {
    Ok(deadline_duration(timeout_s)?.map(|d| Instant::now() + d))
}

fn pretty_json<T: serde::Serialize>(value: &T) -> Result<String, serde_json::Error> {
    serde_json::to_string_pretty(value)
}

fn records_csv(records: &[BenchRecord]) -> Result<String, Box<dyn std::error::Error>> {
    let mut buf = Vec::new();
    write_records_csv(&mut buf, records)?;
    Ok(String::from_utf8(buf)?)
}

/// Profile CSV: `tau` first, then one rho column per method in lexical
/// order (the BTreeMap key order).
fn profile_csv(points: &[ProfilePoint]) -> String {
    let mut out = String::new();
    let methods: Vec<&String> = points
        .first()
        .map(|p| p.rho.keys().collect())
        .unwrap_or_default();
    out.push_str("tau");
    for m in &methods {
        out.push(',');
        out.push_str(m);
    }
    out.push('\n');
    for p in points {
        out.push_str(&p.tau.to_string());
        for m in &methods {
            out.push(',');
            out.push_str(&p.rho[m.as_str()].to_string());
        }
        out.push('\n');
    }
    out
}

/// Writes `text` to `out` (ensuring a trailing newline) or to stdout.
fn emit(text: &str, out: Option<&Path>) -> io::Result<()> {
    let mut owned;
    let text = if text.ends_with('\n') {
        text
    } else {
        owned = String::with_capacity(text.len() + 1);
        owned.push_str(text);
        owned.push('\n');
        &owned
    };
    match out {
        Some(path) => fs::write(path, text),
        None => io::stdout().write_all(text.as_bytes()),
    }
}
