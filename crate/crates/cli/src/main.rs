mod args;
mod commands;
mod config;
mod output;

use std::fs;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Format};
use commands::{dispatch, envelope, RunError};

const THREADS_VAR: &str = "CURVLAB_THREADS";

fn configure_threads() -> Result<(), RunError> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| RunError::Config(format!("{THREADS_VAR} must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| RunError::Config(format!("cannot start {threads} worker threads: {e}")))
}

fn run(cli: &Cli) -> Result<String, RunError> {
    configure_threads()?;
    let report = dispatch(&cli.command)?;
    match cli.format {
        Format::Json => Ok(output::to_json(&envelope(cli.command.name(), &report)?)),
        Format::Text => Ok(output::to_text(&envelope(cli.command.name(), &report)?)),
        Format::Csv => match &report.csv {
            Some((header, rows)) => Ok(output::to_csv(header, rows)),
            None => Err(RunError::Config(format!("{} has no CSV output", cli.command.name()))),
        },
    }
}

fn main() -> ExitCode {
    let argv = match config::expand_args(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let text = match run(&cli) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}", e.message());
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match &cli.output {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}
