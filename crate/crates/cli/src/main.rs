//! `duio`: check, design, verify and simulate distributed unknown-input
//! observer networks described by scenario files.
//!
//! Exit codes: 0 success, 1 condition failure, 2 input error.

mod commands;
mod error;
mod plot;
mod report;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use duio_core::CouplingMode;

use crate::commands::Which;
use crate::error::CliResult;
use crate::report::RunReport;
use crate::scenario::Overrides;

#[derive(Parser)]
#[command(
    name = "duio",
    version,
    about = "Distributed unknown-input observer toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Coupling mode; must agree with the scenario's graph block.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// Output directory for designed scenarios, traces, plots and reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Integration step in seconds.
    #[arg(long, global = true)]
    step: Option<f64>,
    /// Simulation horizon in seconds.
    #[arg(long, global = true)]
    horizon: Option<f64>,
    /// Noise seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Relative tolerance for verifying gains.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Coupling gain as a multiple of its bound.
    #[arg(long = "safety-factor", global = true)]
    safety_factor: Option<f64>,
    /// Print the report as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check the existence conditions.
    Check { scenario: PathBuf },
    /// Synthesize gains and write them into a copy of the scenario.
    Design { scenario: PathBuf },
    /// Check the scenario's design block against the decoupling conditions.
    Verify { scenario: PathBuf },
    /// Simulate the scenario's design and write trace and plots.
    Simulate { scenario: PathBuf },
    /// Run the bundled reference scenarios.
    Reproduce {
        #[arg(value_enum)]
        which: WhichArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Undirected,
    Switching,
    Directed,
}

impl From<ModeArg> for CouplingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Undirected => CouplingMode::Undirected,
            ModeArg::Switching => CouplingMode::Switching,
            ModeArg::Directed => CouplingMode::Directed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WhichArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    All,
}

fn run(cli: &Cli) -> CliResult<RunReport> {
    let ov = Overrides {
        mode: cli.mode.map(Into::into),
        step: cli.step,
        horizon: cli.horizon,
        seed: cli.seed,
        tol: cli.tol,
        safety_factor: cli.safety_factor,
    };
    let default_out = Path::new("duio-out");
    let out = cli.out.as_deref();
    let mut report = match &cli.command {
        Command::Check { scenario } => commands::check(scenario, &ov)?,
        Command::Verify { scenario } => commands::verify(scenario, &ov)?,
        Command::Design { scenario } => {
            commands::design(scenario, &ov, out.unwrap_or(default_out))?
        }
        Command::Simulate { scenario } => {
            commands::simulate(scenario, &ov, out.unwrap_or(default_out))?
        }
        Command::Reproduce { which } => {
            let which = match which {
                WhichArg::One => Which::One,
                WhichArg::Two => Which::Two,
                WhichArg::Three => Which::Three,
                WhichArg::All => Which::All,
            };
            commands::reproduce(which, &ov, out.unwrap_or(default_out))?
        }
    };
    let write_to = match &cli.command {
        Command::Check { .. } | Command::Verify { .. } => out,
        _ => Some(out.unwrap_or(default_out)),
    };
    if let Some(dir) = write_to {
        commands::write_report(&mut report, dir)?;
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if cli.json {
                println!("{}", report.to_json());
            } else {
                println!("{report}");
            }
            ExitCode::from(if report.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("duio: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
