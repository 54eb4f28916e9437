use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pmde_cli::{load_config, run_command, CliError, Command};

/// Simulator of a polarization-mode-dispersion emulator.
#[derive(Debug, Parser)]
#[command(name = "pmde", version)]
struct Args {
    command: Command,
    /// TOML run config, or a file exported by an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for random experiments; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Validation(e.to_string().trim().to_string());
            eprintln!("{}", err.to_record());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    let result = load_config(&args.config, args.out, args.seed)
        .and_then(|cfg| run_command(args.command, &cfg));
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", err.to_record());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
