use std::process::ExitCode;

use clap::Parser;
use qness_cli::{emit, execute, exit_code, Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execute(&cli.command).and_then(|out| {
        let cfg = match &cli.command {
            Command::Oracle(c) | Command::SweepT(c) | Command::Expect(c) | Command::Ising(c) => c,
        };
        emit(cfg, &out)?;
        Ok(out.exit)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
