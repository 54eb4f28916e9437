//! Command-line front end: TOML run configs, the `pmde` commands and their
//! reproducible CSV/JSON exports.

pub mod commands;
pub mod config;
pub mod error;
pub mod export;

use std::fs;
use std::path::{Path, PathBuf};

pub use commands::{run_command, Command};
pub use config::{parse_config, serialize_config, RunConfig};
pub use error::{CliError, CliResult};

/// Reads a config (or an exported file carrying one) and applies command-line
/// overrides.
pub fn load_config(path: &Path, out: Option<PathBuf>, seed: Option<u64>) -> CliResult<RunConfig> {
    let text = fs::read_to_string(path)?;
    let mut cfg = parse_config(&export::config_source(&text)?)?;
    if let Some(seed) = seed {
        if seed > i64::MAX as u64 {
            return Err(CliError::Validation(format!("seed {seed} exceeds {}", i64::MAX)));
        }
        cfg.seed = seed;
    }
    if out.is_some() {
        cfg.output_dir = out;
    }
    Ok(cfg)
}
