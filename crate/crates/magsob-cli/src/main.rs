//! Experiment runner: `run` executes one configured experiment, `sweep`
//! aggregates a list-valued axis into a slope fit, `list` prints the
//! registry. Exit codes: 0 converged/pass, 1 validation error,
//! 2 unconverged or threshold failure.

mod config;
mod registry;
mod runner;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sha2::Digest;

use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "magsob", about = "magnetic Sobolev trace/extension experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = default). Results are identical for any
        /// thread count.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Scale every grid resolution by this factor.
        #[arg(long, default_value_t = 1.0)]
        resolution_multiplier: f64,
    },
    /// Run a sweep over the config's list-valued axis and fit a slope.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long, default_value_t = 1.0)]
        resolution_multiplier: f64,
    },
    /// List the experiment registry.
    List {
        /// Emit the registry as JSON.
        #[arg(long)]
        json: bool,
    },
}

fn params_hash(config: &ExperimentConfig) -> String {
    let mut hasher = sha2::Sha256::new();
    hasher.update(config.canonical_json().as_bytes());
    let digest = hasher.finalize();
    digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

fn epoch_seconds() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn write_outputs(
    config: &ExperimentConfig,
    out_override: Option<PathBuf>,
    result: &runner::RunResult,
) -> anyhow::Result<PathBuf> {
    let out_dir = out_override.unwrap_or_else(|| PathBuf::from(&config.output_dir));
    std::fs::create_dir_all(&out_dir)?;
    let hash = params_hash(config);
    let timestamp = epoch_seconds();

    let report = serde_json::json!({
        "experiment": config.experiment,
        "params_hash": hash,
        "timestamp": timestamp,
        "pass": result.pass,
        "result": result.report,
    });
    let report_path = out_dir.join(format!("{}-{hash}.json", config.experiment));
    std::fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;

    let ledger_path = out_dir.join("ledger.csv");
    let fresh = !ledger_path.exists();
    let mut ledger = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&ledger_path)?;
    if fresh {
        writeln!(
            ledger,
            "timestamp,experiment,params_hash,resolution,lhs,rhs,metric,converged"
        )?;
    }
    for row in &result.rows {
        writeln!(
            ledger,
            "{timestamp},{},{hash},{},{:.17e},{:.17e},{:.17e},{}",
            config.experiment, row.resolution, row.lhs, row.rhs, row.metric, row.converged
        )?;
    }
    Ok(report_path)
}

fn configure_threads(threads: usize) {
    if threads > 0 {
        // ignore the error if a global pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn execute(
    config_path: &Path,
    out: Option<PathBuf>,
    threads: usize,
    multiplier: f64,
    sweep: bool,
) -> ExitCode {
    configure_threads(threads);
    let config = match ExperimentConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(1);
        }
    };
    if registry::lookup(&config.experiment).is_none() {
        eprintln!(
            "config error: unknown experiment `{}`; see `magsob list`",
            config.experiment
        );
        return ExitCode::from(1);
    }
    let result = if sweep {
        runner::sweep(&config, multiplier)
    } else {
        runner::run(&config, multiplier)
    };
    match result {
        Ok(result) => {
            let path = match write_outputs(&config, out, &result) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("output error: {e:#}");
                    return ExitCode::from(1);
                }
            };
            let status = if result.pass { "PASS" } else { "UNCONVERGED" };
            println!(
                "{} {}: {status} (report: {})",
                if sweep { "sweep" } else { "run" },
                config.experiment,
                path.display()
            );
            if result.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("{} error: {e:#}", config.experiment);
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            threads,
            resolution_multiplier,
        } => execute(&config, out, threads, resolution_multiplier, false),
        Command::Sweep {
            config,
            out,
            threads,
            resolution_multiplier,
        } => execute(&config, out, threads, resolution_multiplier, true),
        Command::List { json } => {
            if json {
                let entries: Vec<serde_json::Value> = registry::EXPERIMENTS
                    .iter()
                    .map(|e| {
                        serde_json::json!({
                            "name": e.name,
                            "description": e.description,
                            "required_keys": e.required_keys,
                        })
                    })
                    .collect();
                println!(
                    "{}",
                    serde_json::to_string_pretty(&serde_json::Value::Array(entries)).unwrap()
                );
            } else {
                for e in registry::EXPERIMENTS {
                    println!("{:<22} {}", e.name, e.description);
                    println!("{:<22}   requires: {}", "", e.required_keys.join(", "));
                }
            }
            ExitCode::SUCCESS
        }
    }
}
