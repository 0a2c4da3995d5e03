mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use qlangevin::Error;

use args::{Cli, Command};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(Error::Stability(_)) => 2,
            CliError::Core(Error::Divergence(_) | Error::NotConverged(_) | Error::ContourTooClose(_)) => 3,
            CliError::Core(_) => 1,
        }
    }
}

fn print(value: &serde_json::Value) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(value).unwrap_or_default());
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Response(a) => print(&commands::response(a)?),
        Command::Kk(a) => {
            let outcome = commands::kk(a)?;
            print(&outcome.report);
            if !outcome.passed {
                eprintln!("error: dispersion residual check failed");
                return Ok(4);
            }
        }
        Command::Stability(a) => print(&commands::stability(a)?),
        Command::Simulate(a) => {
            let a = a.resolve()?;
            let value = match a.threads {
                Some(n) => {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build()
                        .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
                    pool.install(|| commands::simulate(a))?
                }
                None => commands::simulate(a)?,
            };
            print(&value);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
