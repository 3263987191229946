//! `tomokit` command-line front end.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{ReconstructArgs, TomogramArgs, VerifyArgs, WignerArgs};

#[derive(Parser, Debug)]
#[command(name = "tomokit", version, about = "Quantum and classical tomograms in a truncated Fock basis")]
struct Cli {
    /// JSON file with default values for the subcommand's options (flags win).
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a symplectic (optical) or photon-number tomogram of a state.
    Tomogram(TomogramArgs),
    /// Sample the Wigner function of a state on a phase-space grid.
    Wigner(WignerArgs),
    /// Reconstruct a state (photon) or Wigner grid (symplectic) from a tomogram file.
    Reconstruct(ReconstructArgs),
    /// Run a validation suite: kernels, homogeneity, gaussian-branch, roundtrips or all.
    Verify(VerifyArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = config::init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    let file = match cli.config.as_deref().map(config::read_config).transpose() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let result = match cli.command {
        Command::Tomogram(a) => config::merge(a, file.as_ref()).and_then(commands::tomogram),
        Command::Wigner(a) => config::merge(a, file.as_ref()).and_then(commands::wigner),
        Command::Reconstruct(a) => config::merge(a, file.as_ref()).and_then(commands::reconstruct),
        Command::Verify(a) => config::merge(a, file.as_ref()).and_then(commands::verify),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
