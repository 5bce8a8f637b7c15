use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use sketchy_bench::{run_experiment, solve_reference, write_spectrum, BenchError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "sketchy", version, about = "Preconditioned stochastic optimizer benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured method and write per-run CSVs plus summary.csv.
    Run { config: PathBuf },
    /// Write the spectrum report of the training design as spectrum.csv.
    Diag { config: PathBuf },
    /// Compute the reference minimum and write reference.json.
    SolveRef { config: PathBuf },
}

fn load(path: &PathBuf, seed: Option<u64>) -> Result<ExperimentConfig, BenchError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn main_inner(cli: Cli) -> Result<serde_json::Value, BenchError> {
    match &cli.command {
        Command::Run { config } => {
            let rep = run_experiment(&load(config, cli.seed)?)?;
            Ok(json!({
                "summary": rep.summary_file,
                "runs": rep.summaries,
            }))
        }
        Command::Diag { config } => {
            let path = write_spectrum(&load(config, cli.seed)?)?;
            Ok(json!({ "spectrum": path }))
        }
        Command::SolveRef { config } => {
            let (r, path) = solve_reference(&load(config, cli.seed)?)?;
            Ok(json!({
                "reference": path,
                "f_star": r.f_star,
                "grad_norm": r.grad_norm,
                "method": r.method,
            }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}
