use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use dpsqkd_cli::{run, Cli, EXIT_INVALID_CONFIG};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INVALID_CONFIG as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match run(&cli) {
        Ok(outcome) => outcome,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let written = match &cli.global.out {
        Some(path) => std::fs::write(path, &outcome.text),
        None => std::io::stdout().lock().write_all(outcome.text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(EXIT_INVALID_CONFIG as u8);
    }
    ExitCode::from(outcome.status as u8)
}
