//! `conformal-kit` command-line interface.
//!
//! Exit codes: 0 on success, 1 on configuration/usage errors (including an
//! unknown subcommand), 2 when an experiment or lemma suite fails its
//! acceptance checks.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use conformal_kit::harness::io::{parse_point, read_dataset_csv};
use conformal_kit::harness::{
    parse_score, prediction_set, run_experiment, run_lemma_suites, ExperimentReport, LemmaConfig, Method,
    MethodOutput, SetOptions, EXPERIMENTS,
};
use conformal_kit::parallel::{init_pool, THREADS_ENV};
use conformal_kit::{GridSpec, RngSeed};

#[derive(Parser, Debug)]
#[command(
    name = "conformal-kit",
    version,
    about = "Distribution-free prediction sets for regression",
    after_help = "The worker pool size can be set with the CONFORMAL_KIT_THREADS environment variable."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Prediction set for one query point, printed as JSON.
    Predict(PredictArgs),
    /// Run a Monte Carlo experiment and write a JSON report plus CSV tables.
    Simulate(SimulateArgs),
    /// Run the deterministic lemma property suites.
    CheckLemmas(LemmaArgs),
    /// Print the version.
    Version,
}

#[derive(Args, Debug)]
struct PredictArgs {
    /// Headerless CSV dataset with the response in the first column.
    data: PathBuf,
    /// Query features, comma separated (empty string for p = 0).
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// full, shortcut, shortcut-exact, cross, jackknife, jackknife-plus or unimodal.
    #[arg(long, default_value = "shortcut")]
    method: String,
    /// Conformity score, e.g. out-sample:mean, in-sample:ridge:1, in-sample:knn:3.
    #[arg(long, default_value = "out-sample:mean")]
    score: String,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    delta: f64,
    /// Grid lower end (default: prediction − 10 sd).
    #[arg(long, allow_hyphen_values = true, requires = "grid_hi")]
    grid_lo: Option<f64>,
    /// Grid upper end (default: prediction + 10 sd).
    #[arg(long, allow_hyphen_values = true, requires = "grid_lo")]
    grid_hi: Option<f64>,
    /// Number of grid points.
    #[arg(long, default_value_t = 4001)]
    grid_points: usize,
    /// Tolerance of the unimodal method.
    #[arg(long)]
    eps: Option<f64>,
    /// Search radius exponent K of the unimodal method.
    #[arg(long, allow_hyphen_values = true)]
    k: Option<i32>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// marginal, conditional, equivalence, finite-sample or refit-benchmark.
    experiment: String,
    /// JSON config (defaults are used for omitted fields).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// File stem of the outputs (default: the experiment name).
    #[arg(long)]
    stem: Option<String>,
}

#[derive(Args, Debug)]
struct LemmaArgs {
    /// Random instances per suite.
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Grid points per sandwich instance.
    #[arg(long, default_value_t = 101)]
    grid_points: usize,
    /// Optional directory for the JSON/CSV report.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct PredictOutput<'a> {
    x: &'a [f64],
    n: usize,
    #[serde(flatten)]
    output: &'a MethodOutput,
}

enum Failure {
    /// Usage or configuration problem (exit 1).
    Config(String),
    /// Acceptance checks failed (exit 2).
    Checks,
}

impl From<conformal_kit::Error> for Failure {
    fn from(e: conformal_kit::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

fn predict(args: PredictArgs) -> Result<(), Failure> {
    let data = read_dataset_csv(&args.data)?;
    let x = parse_point(&args.x)?;
    let method: Method = args.method.parse()?;
    let score = parse_score(&args.score)?;
    let grid = match (args.grid_lo, args.grid_hi) {
        (Some(lo), Some(hi)) => Some(GridSpec::with_points(lo, hi, args.grid_points)?),
        _ => None,
    };
    let options = SetOptions {
        grid,
        eps: args.eps,
        k: args.k,
    };
    let output = prediction_set(method, &score, &data, &x, args.alpha, args.delta, &options)?;
    let json = serde_json::to_string_pretty(&PredictOutput {
        x: &x,
        n: data.len(),
        output: &output,
    })
    .map_err(|e| Failure::Config(e.to_string()))?;
    println!("{json}");
    Ok(())
}

fn finish(report: &ExperimentReport, out: Option<(&PathBuf, &str)>) -> Result<(), Failure> {
    if let Some((dir, stem)) = out {
        for path in report.write(dir, stem)? {
            println!("wrote {}", path.display());
        }
    }
    print!("{}", report.summary());
    eprintln!("wall-clock: {:.3} s", report.wall_clock_secs);
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    if !EXPERIMENTS.contains(&args.experiment.as_str()) {
        return Err(Failure::Config(format!(
            "unknown experiment '{}' (expected one of {})",
            args.experiment,
            EXPERIMENTS.join(", ")
        )));
    }
    let config = match &args.config {
        Some(path) => Some(
            std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?,
        ),
        None => None,
    };
    let report = run_experiment(&args.experiment, config.as_deref(), RngSeed::new(args.seed))?;
    let stem = args.stem.clone().unwrap_or_else(|| args.experiment.replace('-', "_"));
    finish(&report, Some((&args.out, &stem)))
}

fn check_lemmas(args: LemmaArgs) -> Result<(), Failure> {
    let config = LemmaConfig {
        reps: args.reps,
        sandwich_grid_points: args.grid_points,
    };
    let report = run_lemma_suites(&config, RngSeed::new(args.seed))?;
    finish(&report, args.out.as_ref().map(|dir| (dir, "check_lemmas")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let threads = init_pool(None);
    if std::env::var_os(THREADS_ENV).is_some() {
        eprintln!("worker threads: {threads}");
    }
    let result = match cli.command {
        Command::Predict(args) => predict(args),
        Command::Simulate(args) => simulate(args),
        Command::CheckLemmas(args) => check_lemmas(args),
        Command::Version => {
            println!("conformal-kit {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(Failure::Checks) => {
            eprintln!("acceptance checks failed");
            ExitCode::from(2)
        }
    }
}
