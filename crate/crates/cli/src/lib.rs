//! Command-line front end for `cio-core`: scenario and sweep files, built-in
//! presets, oracle checks and CSV/JSON output.
//!
//! Exit codes: 0 success, 2 invalid input, 3 solver nonconvergence,
//! 4 oracle gate failure.

pub mod error;
pub mod files;
pub mod presets;
pub mod report;

use std::path::PathBuf;

use cio_core::optimizer::{solve_profile, SolverConfig};
use cio_core::oracle::{grid_payoff_search, stationarity_check, GridSpec};
use cio_core::polar::sweep;
use cio_core::Scenario;
use clap::{Parser, Subcommand, ValueEnum};

pub use error::CliError;
use files::{ScenarioFile, SweepFile};
use report::{CheckRecord, RunRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "cio",
    version,
    about = "Optimal influence plans over competing ideas"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Append the finite-difference stationarity residual of the plan.
    #[arg(long, global = true)]
    pub check: bool,

    /// Override the solver seed for multi-start restarts.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a scenario file.
    Solve { path: PathBuf },
    /// Run a polar-case parameter sweep file. Emits CSV unless `--format json`.
    Sweep { path: PathBuf },
    /// Solve one of the built-in stylized scenarios.
    Preset { name: String },
    /// Compare the solver against the brute-force grid oracle (up to 4 ideas).
    Check { path: PathBuf },
}

/// A finished command: what to print and the exit code to return.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub exit: u8,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            stderr: String::new(),
            exit: 0,
        }
    }
}

/// Runs a command to completion without touching the filesystem beyond
/// reading its inputs.
pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Solve { path } => {
            let (scenario, config) = ScenarioFile::load(path)?.resolve(cli.seed)?;
            solve_report(&scenario, &config, cli)
        }
        Command::Preset { name } => {
            let preset = presets::lookup(name)?;
            let file = preset.file();
            let (scenario, config) = file.resolve(cli.seed)?;
            let mut out = solve_report(&scenario, &config, cli)?;
            if cli.format == Format::Text {
                out.stdout = format!(
                    "preset {} ({}), stylized parameters: {}\n\n{}\n{}",
                    preset.name,
                    preset.alias,
                    preset.summary,
                    file.to_toml(),
                    out.stdout
                );
            }
            Ok(out)
        }
        Command::Sweep { path } => {
            let spec = SweepFile::load(path)?.resolve(cli.seed)?;
            let table = sweep(&spec)?;
            let stdout = match cli.format {
                Format::Json => {
                    serde_json::to_string_pretty(&table).expect("sweep table serializes") + "\n"
                }
                Format::Text | Format::Csv => report::sweep_csv(&table),
            };
            Ok(Output {
                stdout,
                stderr: report::monotonicity_summary(&table),
                exit: 0,
            })
        }
        Command::Check { path } => {
            let (scenario, config) = ScenarioFile::load(path)?.resolve(cli.seed)?;
            check_report(&scenario, &config, cli.format)
        }
    }
}

fn solve_report(scenario: &Scenario, config: &SolverConfig, cli: &Cli) -> Result<Output, CliError> {
    let plan = solve_profile(scenario, config)?;
    let stationarity = if cli.check {
        Some(stationarity_check(scenario, &plan)?)
    } else {
        None
    };
    let stdout = match cli.format {
        Format::Text => report::plan_text(scenario, &plan, stationarity),
        Format::Csv => report::plan_csv(&plan, stationarity),
        Format::Json => RunRecord::new(scenario, config, &plan, stationarity).to_json(),
    };
    Ok(Output::ok(stdout))
}

fn check_report(
    scenario: &Scenario,
    config: &SolverConfig,
    format: Format,
) -> Result<Output, CliError> {
    // Refuse oversized topics before spending time on the solve.
    let grid = GridSpec::default_for(scenario)?;
    let plan = solve_profile(scenario, config)?;
    let oracle = grid_payoff_search(scenario, &grid)?;
    let record = CheckRecord::new(&plan, &oracle, stationarity_check(scenario, &plan)?);
    let stdout = match format {
        Format::Text => record.text(),
        Format::Csv => record.csv(),
        Format::Json => {
            serde_json::to_string_pretty(&record).expect("check record serializes") + "\n"
        }
    };
    let exit = if record.passed {
        0
    } else {
        CliError::OracleGate(String::new()).exit_code()
    };
    let stderr = if record.passed {
        String::new()
    } else {
        format!(
            "solver payoff is more than {} below the grid oracle\n",
            report::ORACLE_GATE
        )
    };
    Ok(Output {
        stdout,
        stderr,
        exit,
    })
}
