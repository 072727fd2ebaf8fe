//! `fbm`: command-line front end for the Fourier-Bessel Helmholtz solver.
//!
//! Exit codes: 0 on success, 2 when the configuration is rejected, 3 when a
//! numerical step fails. Failures print a JSON record on stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fbm_core::experiment::{
    parse_orders, summary_text, write_solve_outputs, write_svd_outputs, write_sweep_outputs,
    write_trace_outputs, Experiment, ExperimentConfig,
};
use fbm_core::FbmError;
use serde_json::json;

const DEFAULT_OUTPUT_DIR: &str = "fbm_out";

#[derive(Parser)]
#[command(
    name = "fbm",
    version,
    about = "Fourier-Bessel solver for the 2D Helmholtz impedance problem"
)]
struct Cli {
    /// Worker threads (default: FBM_THREADS, else all cores). 1 gives bitwise reproducible output.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's output_dir, else ./fbm_out).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single (k, delta) case and write report.json and coefficients.csv.
    Solve(Common),
    /// Run every (k, delta, seed) combination and write sweep.csv.
    Sweep(Common),
    /// Smallest singular value against the truncation order; writes svd_study.csv.
    Svd {
        #[command(flatten)]
        common: Common,
        /// Orders as `lo..hi:step`, `lo..hi` or a comma list.
        #[arg(long = "N", value_name = "ORDERS")]
        orders: String,
    },
    /// Real parts of u and u_N along the boundary; writes trace_exact.dat and trace_fbm.dat.
    Plot {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// Error plus the exit code it maps to.
struct Failure {
    exit: u8,
    code: String,
    message: String,
}

impl From<FbmError> for Failure {
    fn from(e: FbmError) -> Self {
        Failure {
            exit: if e.is_validation() { 2 } else { 3 },
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

fn load(common: &Common) -> Result<(Experiment, PathBuf), Failure> {
    let config = ExperimentConfig::from_path(&common.config).map_err(|e| match e {
        FbmError::Io { .. } => Failure {
            exit: 2,
            code: "config_unreadable".into(),
            message: e.to_string(),
        },
        other => other.into(),
    })?;
    let out = common
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    Ok((config.prepare()?, out))
}

fn files_json(files: &[PathBuf]) -> Vec<String> {
    files.iter().map(|p| p.display().to_string()).collect()
}

fn run(command: &Command) -> Result<serde_json::Value, Failure> {
    match command {
        Command::Solve(common) => {
            let (exp, out) = load(common)?;
            let case = exp.run_solve()?;
            let files = write_solve_outputs(&case, &exp, &out)?;
            Ok(json!({
                "files": files_json(&files),
                "N": case.plan.truncation,
                "alpha": case.plan.alpha,
                "report": case.report,
            }))
        }
        Command::Sweep(common) => {
            let (exp, out) = load(common)?;
            let table = exp.run_sweep();
            let files = write_sweep_outputs(&table, &out)?;
            eprint!("{}", summary_text(&table));
            let failed = table.rows.iter().filter(|r| r.status != "ok").count();
            Ok(json!({
                "files": files_json(&files),
                "rows": table.rows.len(),
                "failed_rows": failed,
                "summaries": table.summaries,
            }))
        }
        Command::Svd { common, orders } => {
            let orders = parse_orders(orders)?;
            let (exp, out) = load(common)?;
            let study = exp.run_svd_study(&orders)?;
            let files = write_svd_outputs(&study, &exp, &out)?;
            Ok(json!({ "files": files_json(&files), "slope": study.slope }))
        }
        Command::Plot {
            common,
            k,
            delta,
            seed,
        } => {
            let (exp, out) = load(common)?;
            let plot = exp.run_trace_plot(*k, *delta, *seed)?;
            let files = write_trace_outputs(&plot, &out)?;
            Ok(json!({ "files": files_json(&files), "max_gap": plot.max_gap() }))
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("FBM_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map(Some).map_err(|_| Failure {
            exit: 2,
            code: "invalid_threads".into(),
            message: format!("FBM_THREADS must be a positive integer, got {v:?}"),
        }),
        Err(_) => Ok(None),
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), Failure> {
    if let Some(n) = thread_count(flag)? {
        if n == 0 {
            return Err(Failure {
                exit: 2,
                code: "invalid_threads".into(),
                message: "thread count must be positive".into(),
            });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure {
                exit: 3,
                code: "thread_pool".into(),
                message: e.to_string(),
            })?;
    }
    Ok(())
}

fn report_failure(f: &Failure, config: Option<&Path>) -> ExitCode {
    let record = json!({
        "error": f.code,
        "message": f.message,
        "exit_code": f.exit,
        "config": config.map(|p| p.display().to_string()),
    });
    eprintln!("{record}");
    ExitCode::from(f.exit)
}

fn config_path(command: &Command) -> &Path {
    match command {
        Command::Solve(c) | Command::Sweep(c) => &c.config,
        Command::Svd { common, .. } | Command::Plot { common, .. } => &common.config,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(f) = configure_threads(cli.threads) {
        return report_failure(&f, None);
    }
    match run(&cli.command) {
        Ok(summary) => {
            println!("{summary}");
            log::info!("done");
            ExitCode::SUCCESS
        }
        Err(f) => report_failure(&f, Some(config_path(&cli.command))),
    }
}
