//! Command-line interface: `suite`, `run`, `trace`, `bench`, `ecdf`, and
//! `heatmap` subcommands over the library.
//!
//! Exit codes: 0 on success, 2 for usage errors (bad flags, unknown
//! problems, malformed inputs), 1 for I/O and runtime failures. Outputs
//! carry no timestamps, so identical seeds give byte-identical files.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::bench::{self, CampaignConfig, TargetList};
use crate::biobj::BiObjectiveProblem;
use crate::landscape::{self, GridSpec};
use crate::mogsa::{self, MogsaConfig};
use crate::problems::{self, GradMode, InstanceSpec, ScalarProblem, DEFAULT_SPHERE_CENTER};
use crate::{Error, Result};

/// Environment variable consulted when `--seed` is not given.
pub const SEED_ENV_VAR: &str = "SOMOGSA_SEED";

/// Comma-separated float vector, e.g. `-3.5,-2.5`.
#[derive(Clone, Debug)]
pub struct PointArg(pub Vec<f64>);

impl FromStr for PointArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let coords: std::result::Result<Vec<f64>, _> = s
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|e| format!("`{c}`: {e}")))
            .collect();
        let coords = coords?;
        if coords.is_empty() {
            return Err("empty point".into());
        }
        Ok(PointArg(coords))
    }
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum GradModeArg {
    /// Closed-form gradients; charges no objective evaluations.
    Analytic,
    /// Central finite differences; charges two evaluations per dimension.
    Fd,
}

#[derive(Parser, Debug)]
#[command(
    name = "somogsa",
    version,
    about = "Multi-objective gradient sliding for single-objective optimization"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// List the built-in problem suite.
    Suite,
    /// Run the solver once and print a JSON summary.
    Run(RunArgs),
    /// Run the solver once and write its trace as JSON-lines.
    Trace(TraceArgs),
    /// Execute a benchmarking campaign from a TOML config.
    Bench(BenchArgs),
    /// Aggregate run logs into a runtime ECDF as TSV.
    Ecdf(EcdfArgs),
    /// Export a gradient-field heatmap grid as CSV.
    Heatmap(HeatmapArgs),
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Problem id from the suite.
    #[arg(long)]
    problem: String,
    /// Start point, e.g. `2.5,2`.
    #[arg(long)]
    start: PointArg,
    /// Instance transform seed; 0 is the untransformed problem.
    #[arg(long, default_value_t = 0)]
    instance_seed: u64,
    /// Objective evaluation budget.
    #[arg(long, default_value_t = 200_000)]
    budget: u64,
    /// Restart RNG seed; falls back to $SOMOGSA_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Helper sphere center.
    #[arg(long, default_value = "-3.5,-2.5")]
    sphere_center: PointArg,
    #[arg(long, value_enum, default_value_t = GradModeArg::Fd)]
    grad_mode: GradModeArg,
    /// Finite-difference step for `--grad-mode fd`.
    #[arg(long, default_value_t = 1e-5)]
    fd_h: f64,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    solve: SolveArgs,
    /// Write the JSON summary here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TraceArgs {
    #[command(flatten)]
    solve: SolveArgs,
    /// Write the JSON-lines trace here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Campaign TOML config path.
    #[arg(long)]
    config: PathBuf,
    /// Write the JSON-lines run logs here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct EcdfArgs {
    /// JSON-lines run logs produced by `bench`.
    #[arg(long)]
    logs: PathBuf,
    /// Write the TSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Abscissa range; defaults to the largest budget/dim in the logs.
    #[arg(long)]
    budget_per_dim: Option<u64>,
}

#[derive(Args, Debug)]
struct HeatmapArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, default_value_t = landscape::DEFAULT_RESOLUTION)]
    resolution: usize,
    #[arg(long, default_value_t = 0)]
    instance_seed: u64,
    #[arg(long, default_value = "-3.5,-2.5")]
    sphere_center: PointArg,
    #[arg(long, value_enum, default_value_t = GradModeArg::Analytic)]
    grad_mode: GradModeArg,
    #[arg(long, default_value_t = 1e-5)]
    fd_h: f64,
    /// Write the grid CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the basin summary JSON here.
    #[arg(long)]
    basins: Option<PathBuf>,
    /// Convert this JSON-lines trace into a CSV overlay.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Overlay CSV destination; required with --trace.
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

/// Parses `args` and runs the requested subcommand, returning the process
/// exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::UnknownProblem(_)
        | Error::InvalidConfig(_)
        | Error::Parse { .. }
        | Error::DimensionMismatch { .. }
        | Error::OutOfBounds(_)
        | Error::RequiresDim2(_) => 2,
        _ => 1,
    }
}

fn out_writer(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

fn env_seed() -> u64 {
    std::env::var(SEED_ENV_VAR)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}

fn load_problem(id: &str, instance_seed: u64) -> Result<ScalarProblem> {
    let base = problems::suite_problem(id)?;
    let spec = if instance_seed == 0 {
        InstanceSpec::identity(base.dim)
    } else {
        InstanceSpec::from_seed(instance_seed, base.dim)
    };
    problems::apply_instance(&base, &spec)
}

fn solve(args: &SolveArgs) -> Result<mogsa::RunResult> {
    let problem = load_problem(&args.problem, args.instance_seed)?;
    let grad_mode = match args.grad_mode {
        GradModeArg::Analytic => GradMode::Analytic,
        GradModeArg::Fd => GradMode::CentralFd { h: args.fd_h },
    };
    let cfg = MogsaConfig {
        rng_seed: args.seed.unwrap_or_else(env_seed),
        grad_mode,
        ..MogsaConfig::default()
    };
    let bi = BiObjectiveProblem::new(problem, args.sphere_center.0.clone())?;
    mogsa::run(&bi, &args.start.0, &cfg, args.budget)
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Suite => {
            let mut w = BufWriter::new(std::io::stdout());
            writeln!(w, "id\tdim\tbounds\tanalytic_gradient\tf_opt")?;
            for e in problems::suite_listing(&problems::make_suite()) {
                writeln!(
                    w,
                    "{}\t{}\t[{}, {}]\t{}\t{}",
                    e.id,
                    e.dim,
                    e.bounds[0].0,
                    e.bounds[0].1,
                    e.has_analytic_gradient,
                    e.f_opt.map(|f| f.to_string()).unwrap_or_else(|| "unknown".into()),
                )?;
            }
            Ok(())
        }
        Cmd::Run(args) => {
            let res = solve(&args.solve)?;
            let summary = serde_json::json!({
                "problem": args.solve.problem,
                "instance_seed": args.solve.instance_seed,
                "start": args.solve.start.0,
                "terminated_by": res.terminated_by,
                "evals_f1": res.evals_f1,
                "best_f1": res.best_f1.as_ref().map(|(x, f)| serde_json::json!({"x": x, "f1": f})),
                "archive": res.archive,
            });
            let mut w = out_writer(&args.out)?;
            serde_json::to_writer_pretty(&mut w, &summary).map_err(|e| Error::Parse {
                what: "run summary".into(),
                detail: e.to_string(),
            })?;
            writeln!(w)?;
            Ok(())
        }
        Cmd::Trace(args) => {
            let res = solve(&args.solve)?;
            let w = out_writer(&args.out)?;
            mogsa::write_trace_jsonl(&res.trace, w)
        }
        Cmd::Bench(args) => {
            let text = std::fs::read_to_string(&args.config)?;
            let cfg = CampaignConfig::from_toml(&text)?;
            let targets = TargetList::standard();
            let logs = match args.jobs {
                Some(n) => {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build()
                        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
                    pool.install(|| bench::run_campaign(&cfg, &targets))?
                }
                None => bench::run_campaign(&cfg, &targets)?,
            };
            bench::write_runlogs_jsonl(&logs, out_writer(&args.out)?)
        }
        Cmd::Ecdf(args) => {
            let logs = bench::read_runlogs_jsonl(BufReader::new(File::open(&args.logs)?))?;
            let budget_per_dim = args.budget_per_dim.unwrap_or_else(|| {
                logs.iter()
                    .map(|l| l.budget / l.dim.max(1) as u64)
                    .max()
                    .unwrap_or(1)
            });
            let grid = bench::eval_grid(budget_per_dim);
            let n_targets = logs.first().map_or(51, |l| l.first_hit.len());
            let props = bench::ecdf_proportions(&logs, n_targets, &grid);
            bench::write_ecdf_tsv(&grid, &props, out_writer(&args.out)?)
        }
        Cmd::Heatmap(args) => {
            let problem = load_problem(&args.problem, args.instance_seed)?;
            let grad_mode = match args.grad_mode {
                GradModeArg::Analytic => GradMode::Analytic,
                GradModeArg::Fd => GradMode::CentralFd { h: args.fd_h },
            };
            let bi = BiObjectiveProblem::new(problem, args.sphere_center.0.clone())?;
            let spec = GridSpec {
                resolution: args.resolution,
                grad_mode,
                ..GridSpec::default()
            };
            let grid = landscape::compute_field(&bi, &spec)?;
            landscape::write_grid_csv(&grid, out_writer(&args.out)?)?;
            if let Some(path) = &args.basins {
                landscape::write_basin_report(&grid, BufWriter::new(File::create(path)?))?;
            }
            match (&args.trace, &args.trace_out) {
                (Some(trace_path), Some(out_path)) => {
                    let text = std::fs::read_to_string(trace_path)?;
                    let events: Vec<mogsa::TraceEvent> = text
                        .lines()
                        .filter(|l| !l.trim().is_empty())
                        .map(|l| {
                            serde_json::from_str(l).map_err(|e| Error::Parse {
                                what: "trace event".into(),
                                detail: e.to_string(),
                            })
                        })
                        .collect::<Result<_>>()?;
                    landscape::write_trace_overlay_csv(
                        &events,
                        BufWriter::new(File::create(out_path)?),
                    )?;
                }
                (Some(_), None) => {
                    return Err(Error::InvalidConfig("--trace requires --trace-out".into()));
                }
                _ => {}
            }
            Ok(())
        }
    }
}

// the --sphere-center default literal must match the library constant
const _: () = {
    assert!(DEFAULT_SPHERE_CENTER[0] == -3.5 && DEFAULT_SPHERE_CENTER[1] == -2.5);
};
