use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use underlay_cli::{cmd_replicate, cmd_run, cmd_thresholds, CliError, Figure, RunManifest};

/// Power control with interference-channel learning for underlay cognitive radio.
#[derive(Parser)]
#[command(name = "underlay", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Config file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Master seed, overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `key=value` override, applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// One run; writes trace.csv and prints a summary.
    Run,
    /// Replication ensembles: fig3, fig8 or fig11.
    Replicate { figure: String },
    /// Interference thresholds and γ ratios of the configured ladder.
    Thresholds,
}

fn dispatch(cli: Cli) -> Result<String, CliError> {
    let manifest = RunManifest { config: cli.config, out: cli.out, overrides: cli.overrides, seed: cli.seed };
    match cli.command {
        Command::Run => cmd_run(&manifest),
        Command::Replicate { figure } => cmd_replicate(figure.parse::<Figure>()?, &manifest),
        Command::Thresholds => cmd_thresholds(&manifest),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
