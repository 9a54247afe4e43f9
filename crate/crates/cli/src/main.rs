//! magnonctl: config-driven driver for the spin-chain wavepacket toolkit.
//! Encodes launch states, reproduces the reference experiments, runs the
//! operator identity checks, and fans out sweep plans.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Format;

const AFTER_HELP: &str = "\
Exit codes: 0 success, 1 check failure, 2 config error, 3 runtime alarm.
Output root precedence: --out, config `out`, $MAGNONCTL_OUT, ./out.
Flags override config fields. Manifests are JSON; profile snapshots are
CSV unless --format json.";

#[derive(Parser)]
#[command(
    name = "magnonctl",
    version,
    about = "Spin-chain wavepacket experiments: encoding, transport, stop/relaunch",
    after_help = AFTER_HELP
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the encoder eigenproblem, print the beta table, write the state
    Encode(CommonArgs),
    /// Reproduce a reference experiment
    Figure {
        /// Which experiment: 1a, 1b, 2, or 3
        which: String,
        #[command(flatten)]
        args: CommonArgs,
    },
    /// Run one identity check and print its JSON verdict
    Check {
        /// parity-identity, sequence-identity, mapping, oracle, or diffusion-rate
        which: String,
        #[command(flatten)]
        args: CommonArgs,
    },
    /// Fan out the runs of a sweep plan concurrently
    Sweep(CommonArgs),
}

#[derive(Args)]
pub struct CommonArgs {
    /// JSON config path
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides config `out` and $MAGNONCTL_OUT)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Profile snapshot format (manifests are always JSON)
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Encode(args) => commands::cmd_encode(args),
        Cmd::Figure { which, args } => commands::cmd_figure(which, args),
        Cmd::Check { which, args } => commands::cmd_check(which, args),
        Cmd::Sweep(args) => commands::cmd_sweep(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_runtime_alarm() { 3 } else { 2 })
        }
    }
}
