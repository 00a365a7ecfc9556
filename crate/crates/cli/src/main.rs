//! `recoherence`: run scenarios, compare traces, list bundled configs.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod compare;
mod config;
mod error;
mod examples;
mod runner;
mod scenario;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Scenario;
use crate::error::{CliError, CliResult};
use crate::runner::RunRequest;

#[derive(Parser)]
#[command(
    name = "recoherence",
    version,
    about = "Dephasing and recoherence scenarios for a qubit coupled to a massive field"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario, or a sweep over one config key.
    Run {
        #[arg(long, value_enum)]
        scenario: Option<Scenario>,
        /// TOML configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Bundled configuration by name (see list-examples).
        #[arg(long)]
        example: Option<String>,
        /// Output directory. Without it: `out` from the config (default
        /// `runs/<scenario>`), placed under $RECOHERENCE_OUT when set.
        #[arg(long)]
        out: Option<PathBuf>,
        /// `key=a:b:n` (inclusive, `pi` allowed) or `key=v1,v2,...`.
        #[arg(long)]
        sweep: Option<String>,
        /// Concurrent sweep points; all cores when absent.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Max-abs and RMS differences between columns of two CSV traces.
    Compare {
        trace_a: PathBuf,
        trace_b: PathBuf,
        /// Column to compare; repeatable. All shared columns except `t` by default.
        #[arg(long = "column")]
        columns: Vec<String>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Bundled example configurations.
    ListExamples,
}

fn run_command(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Run {
            scenario,
            config,
            example,
            out,
            sweep,
            workers,
            seed,
        } => {
            if workers == Some(0) {
                return Err(CliError::Validation("--workers must be at least 1".into()));
            }
            let report = runner::run(&RunRequest {
                scenario,
                config,
                example,
                out,
                sweep,
                workers,
                seed,
            })?;
            if let [only] = &report.points[..] {
                for (k, v) in &only.summary {
                    println!("{k} = {v:e}");
                }
            } else {
                println!("{} sweep points", report.points.len());
            }
            println!("outputs in {}", report.dir.display());
            Ok(())
        }
        Command::Compare {
            trace_a,
            trace_b,
            columns,
            tol,
        } => {
            let a = compare::Table::read(&trace_a)?;
            let b = compare::Table::read(&trace_b)?;
            let c = compare::compare(&a, &b, &columns)?;
            if c.interpolated {
                println!("note: second trace interpolated onto the first trace's time grid");
            }
            let mut failed = Vec::new();
            for col in &c.columns {
                let ok = col.max_abs <= tol;
                let at = match col.at_t {
                    Some(t) => format!("row {} (t = {t:e})", col.at_row),
                    None => format!("row {}", col.at_row),
                };
                println!(
                    "{:<14} max_abs = {:.6e} at {at}  rms = {:.6e}  {}",
                    col.column,
                    col.max_abs,
                    col.rms,
                    if ok { "ok" } else { "FAIL" }
                );
                if !ok {
                    failed.push(format!("{} ({:e} at {at})", col.column, col.max_abs));
                }
            }
            if failed.is_empty() {
                println!("all within {tol:e} (worst {:e})", c.worst());
                Ok(())
            } else {
                Err(CliError::Compare(format!(
                    "above tolerance {tol:e}: {}",
                    failed.join(", ")
                )))
            }
        }
        Command::ListExamples => {
            for e in examples::ALL {
                println!("{:<24} {:<40} {}", e.name, e.file, e.description());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run_command(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
