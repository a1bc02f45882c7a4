use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use veldt::cli::{run, RunOptions, CONFIG_SCHEMA, PROBLEM_SCHEMA};

/// Variational analysis of higher-order quasi-linear elliptic functionals.
#[derive(Debug, Parser)]
#[command(name = "veldt", version)]
struct Args {
    /// Run config (JSON).
    #[arg(long, required_unless_present = "schema")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "veldt-out")]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Audit failures exit with status 2.
    #[arg(long)]
    strict: bool,
    /// Print the JSON schema of the run config (`config`) or the problem document (`problem`).
    #[arg(long, value_parser = ["config", "problem"])]
    schema: Option<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(which) = args.schema {
        print!(
            "{}",
            if which == "config" {
                CONFIG_SCHEMA
            } else {
                PROBLEM_SCHEMA
            }
        );
        return ExitCode::SUCCESS;
    }
    let opts = RunOptions {
        config: args.config.expect("clap enforces --config"),
        out: args.out,
        seed: args.seed,
        threads: args.threads.max(1),
        strict: args.strict,
    };
    let outcome = run(&opts);
    if let Some(report) = &outcome.report {
        print!("{}", report.summary());
    }
    if let Some(msg) = &outcome.message {
        eprintln!("veldt: {msg}");
    }
    ExitCode::from(outcome.exit_code as u8)
}
