//! `sphshell` — embedded-antenna analysis for stratified spherical shells.
//!
//! Each subcommand runs the matching task from a scenario configuration
//! file and writes CSV outputs plus a `manifest.json` run record.

mod config;
mod expr;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::TaskSpec;
use tasks::{RunError, RunOptions};

#[derive(Parser)]
#[command(
    name = "sphshell",
    version,
    about = "Spherical scattering operators for shell-embedded antennas"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV files and the run manifest.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: one per core).
    #[arg(long)]
    threads: Option<usize>,
    /// Force this truncation degree instead of the automatic one.
    #[arg(long, value_name = "K")]
    lmax_override: Option<u32>,
    /// Tolerance for the validate task's checks.
    #[arg(long, value_name = "X", default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Dump the shell's scattering operators t, Phi, rho, Psi per (tau, l).
    Sso(RunArgs),
    /// Write the effective antenna-plus-shell GSM as an interchange file.
    Compose(RunArgs),
    /// Port S-parameters of the embedded antenna.
    Sparams(RunArgs),
    /// Realized-gain cut in the xOz plane.
    Pattern(RunArgs),
    /// Bistatic radar cross-section cut in the xOz plane.
    Rcs(RunArgs),
    /// Run the built-in consistency checks against this scenario.
    Validate(RunArgs),
    /// Sweep one material parameter, reusing the antenna GSM.
    Sweep(RunArgs),
}

impl Command {
    fn args(&self) -> &RunArgs {
        match self {
            Command::Sso(a)
            | Command::Compose(a)
            | Command::Sparams(a)
            | Command::Pattern(a)
            | Command::Rcs(a)
            | Command::Validate(a)
            | Command::Sweep(a) => a,
        }
    }

    fn task_name(&self) -> &'static str {
        match self {
            Command::Sso(_) => "sso",
            Command::Compose(_) => "compose",
            Command::Sparams(_) => "sparams",
            Command::Pattern(_) => "pattern",
            Command::Rcs(_) => "rcs",
            Command::Validate(_) => "validate",
            Command::Sweep(_) => "sweep",
        }
    }

    fn matches_task(&self, task: &TaskSpec) -> bool {
        matches!(
            (self, task),
            (Command::Sso(_), TaskSpec::Sso)
                | (Command::Compose(_), TaskSpec::Compose)
                | (Command::Sparams(_), TaskSpec::Sparams)
                | (Command::Pattern(_), TaskSpec::Pattern { .. })
                | (Command::Rcs(_), TaskSpec::Rcs { .. })
                | (Command::Validate(_), TaskSpec::Validate)
                | (Command::Sweep(_), TaskSpec::Sweep { .. })
        )
    }
}

fn execute(cli: &Cli) -> Result<Vec<PathBuf>, RunError> {
    let args = cli.command.args();
    let config = config::parse_config(&args.config)
        .map_err(|e| RunError::Config(format!("{}: {e}", args.config.display())))?;
    if !cli.command.matches_task(&config.task) {
        return Err(RunError::Config(format!(
            "subcommand `{}` does not match the config's task type",
            cli.command.task_name()
        )));
    }
    let opts = RunOptions {
        config_path: args.config.clone(),
        out: args.out.clone(),
        threads: args.threads,
        lmax_override: args.lmax_override,
        tol: args.tol,
    };
    tasks::run(&config, &opts)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outputs) => {
            for path in outputs {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
