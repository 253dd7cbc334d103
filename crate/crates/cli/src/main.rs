use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use markovgeom_cli::config::{Convention, Format};
use markovgeom_cli::{execute, CliError, Overrides};
use serde_json::json;

/// Identifiability, Fisher information and LAN checks for quantum Markov dynamics.
#[derive(Parser, Debug)]
#[command(name = "markovgeom", version)]
struct Args {
    /// Job configuration (JSON).
    config: PathBuf,
    /// Output format.
    #[arg(long)]
    format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<String>,
    /// QFI normalization: four_x or metric. Required for qfi and lan-check.
    #[arg(long)]
    convention: Option<Convention>,
    /// Classification tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated times in units of 1/gap.
    #[arg(long, value_delimiter = ',')]
    t_grid: Option<Vec<f64>>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::parse(e.to_string().trim_end(), json!({ "field": "argv" }))),
    };
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            return fail(&CliError::parse(
                format!("cannot read config: {e}"),
                json!({ "path": args.config.display().to_string() }),
            ))
        }
    };
    let overrides = Overrides {
        format: args.format,
        out: args.out,
        convention: args.convention,
        tol: args.tol,
        t_grid: args.t_grid,
    };
    let report = match execute(&text, &overrides) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let body = match report.render() {
        Ok(b) => b,
        Err(e) => return fail(&e),
    };
    match &report.config.options.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, body) {
                return fail(&CliError::parse(format!("cannot write report: {e}"), json!({ "path": path })));
            }
        }
        None => print!("{body}"),
    }
    ExitCode::SUCCESS
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code())
}
