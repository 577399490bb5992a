use std::process::ExitCode;

use anyhow::Context;
use cio_cli::{execute, Cli, CliError};
use clap::Parser;

fn run(cli: &Cli) -> anyhow::Result<u8> {
    let out = execute(cli)?;
    match &cli.out {
        Some(path) => std::fs::write(path, &out.stdout)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{}", out.stdout),
    }
    eprint!("{}", out.stderr);
    Ok(out.exit)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(
                err.downcast_ref::<CliError>()
                    .map_or(1, CliError::exit_code),
            )
        }
    }
}
