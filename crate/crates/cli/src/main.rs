// Copyright 2026 uscsim Contributors
// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use uscsim_cli::config::GridSection;
use uscsim_cli::{parse_config, run, Mode, Overrides, RunError, RunOptions, Status, Units};
use uscsim_core::Execution;

/// Ultrastrong-coupling quantum simulation toolkit.
#[derive(Debug, Parser)]
#[command(name = "uscsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config document (TOML). Omit to run on defaults alone.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// CSV destination; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<String>,

    /// Sweep grid in units of delta, overriding the config.
    #[arg(long, global = true, value_name = "MIN:MAX:N", allow_hyphen_values = true)]
    grid: Option<GridSection>,

    /// Leave the generation time out of the header.
    #[arg(long, global = true)]
    no_timestamp: bool,

    /// Unit convention for frequencies and rates in the config.
    #[arg(long, global = true, value_name = "angular|cyclic")]
    units: Option<Units>,

    /// Proceed past rotating-wave regime violations.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Debug, Subcommand, Clone, Copy)]
enum Command {
    /// Closed-system ground-state squeezing versus coupling.
    GroundState,
    /// Open-system output spectra at one coupling.
    Spectra,
    /// Zero-frequency output spectra versus coupling.
    Sweep,
    /// Stability margin versus coupling.
    Stability,
    /// Pump calibration, rotating-wave checks and feasibility.
    Calibrate,
    /// Fock-space ground state against the closed form.
    Oracle,
    /// Full versus rotating-wave dynamics from the vacuum.
    ValidateRwa,
}

impl From<Command> for Mode {
    fn from(c: Command) -> Mode {
        match c {
            Command::GroundState => Mode::GroundState,
            Command::Spectra => Mode::Spectra,
            Command::Sweep => Mode::Sweep,
            Command::Stability => Mode::Stability,
            Command::Calibrate => Mode::Calibrate,
            Command::Oracle => Mode::Oracle,
            Command::ValidateRwa => Mode::ValidateRwa,
        }
    }
}

fn execute(cli: &Cli) -> Result<Status, RunError> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let overrides = Overrides { units: cli.units, grid: cli.grid, output: cli.output.clone() };
    let cfg = parse_config(&text, cli.command.into(), &overrides)?;
    let timestamp = if cli.no_timestamp {
        None
    } else {
        Some(SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
    };
    let opts = RunOptions { timestamp, force: cli.force, exec: Execution::Parallel };
    let artifacts = run(&cfg, &opts)?;
    match &cfg.output.path {
        Some(path) => std::fs::write(path, &artifacts.csv)?,
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(artifacts.csv.as_bytes()).and_then(|_| out.flush()) {
                // A closed pipe (e.g. `| head`) is not a failure of the run.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
    }
    if let (Some(path), Some(text)) = (&cfg.output.ellipses, &artifacts.ellipses) {
        std::fs::write(path, text)?;
    }
    Ok(artifacts.status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(Status::Complete) => ExitCode::SUCCESS,
        Ok(Status::Flagged(msg)) => {
            eprintln!("uscsim: flagged: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("uscsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
