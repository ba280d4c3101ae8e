use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use oadmm_cli::check::run_checks;
use oadmm_cli::{run_experiment, CliError, ExperimentSpec, RunOptions};
use oadmm_core::data::{synthesize_randn, write_csv, DatasetDescriptor};

#[derive(Parser)]
#[command(name = "oadmm", version, about = "ADMM solvers for optimization under orthogonality constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every solver listed in a TOML experiment spec.
    Run {
        spec: PathBuf,
        /// Output directory (overrides `out` in the spec).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for data synthesis and the initial point (overrides the spec).
        #[arg(long)]
        seed: Option<u64>,
        /// Single-threaded, with wall time left out of the traces.
        #[arg(long)]
        deterministic: bool,
    },
    /// Run the built-in invariant checks.
    Check,
    /// Write a seeded standard normal samples-by-features matrix as CSV.
    Synth {
        /// `randn-<m>-<d>`.
        descriptor: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { spec, out, seed, deterministic } => {
            let parsed = ExperimentSpec::load(&spec)?;
            let opts = RunOptions {
                out,
                seed,
                deterministic,
                threads: RunOptions::threads_from_env()?,
                base_dir: spec.parent().map(PathBuf::from),
            };
            let report = run_experiment(&parsed, &opts)?;
            for o in &report.outcomes {
                match &o.result {
                    Ok(trace) => {
                        let last = trace.last().map(|r| r.objective).unwrap_or(f64::NAN);
                        println!("{:<20} {:>8} iterations  objective {last:.6e}", o.name, o.plan.max_iters());
                    }
                    Err(e) => eprintln!("{}: numerical failure: {e}", o.name),
                }
            }
            println!("results written to {}", report.out_dir.display());
            Ok(report.exit_code())
        }
        Command::Check => {
            let results = run_checks()?;
            for c in &results {
                println!("{} {:<28} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(if results.iter().all(|c| c.passed) { 0 } else { 1 })
        }
        Command::Synth { descriptor, seed, out } => {
            let DatasetDescriptor::Randn { samples, features, seed } = DatasetDescriptor::parse_with_seed(&descriptor, seed)?
            else {
                return Err(CliError::Config(format!("synth needs randn-<m>-<d>, got {descriptor:?}")));
            };
            write_csv(&out, &synthesize_randn(samples, features, seed))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("oadmm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
