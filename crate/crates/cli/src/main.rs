use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use wgqed_cli::args::Cli;
use wgqed_cli::{run, CliError};

fn write_stdout(text: &str) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush())
        .map_err(|e| CliError::io("<stdout>".as_ref(), e))
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let invocation = cli.resolve()?;
    let config = &invocation.config;
    if invocation.print_config {
        return write_stdout(&(config.to_json_pretty() + "\n"));
    }
    let output = run(config, invocation.jobs)?;
    for m in &output.messages {
        eprintln!("{m}");
    }
    match &config.output {
        Some(path) => fs::write(path, &output.csv).map_err(|e| CliError::io(path, e))?,
        None => write_stdout(&output.csv)?,
    }
    match output.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
