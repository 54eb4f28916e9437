//! Deterministic CSV and JSON writers.
//!
//! Every file starts with provenance: tool version, command, seed, the SHA-256
//! of the canonical config and the config itself. CSV files carry it as `#`
//! comment lines (config lines prefixed with `#% `), JSON files as top-level
//! fields. Either kind of file can be passed back as `--config` to reproduce
//! it.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{serialize_config, RunConfig};
use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fixed float rendering: 9 significant digits in scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

/// `x` rounded to 9 significant digits, for JSON output.
pub fn round9(x: f64) -> Value {
    if x.is_finite() {
        json!(fmt_float(x).parse::<f64>().expect("formatted float parses"))
    } else {
        Value::Null
    }
}

pub fn round9_vec(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| round9(*x)).collect())
}

/// Provenance shared by all files of one run.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: String,
    pub seed: u64,
    pub config_toml: String,
    pub config_sha256: String,
}

impl Provenance {
    pub fn new(command: &str, cfg: &RunConfig) -> Self {
        let canonical = RunConfig {
            output_dir: None,
            ..cfg.clone()
        };
        let config_toml = serialize_config(&canonical);
        let config_sha256 = hex::encode(Sha256::digest(config_toml.as_bytes()));
        Self {
            command: command.to_string(),
            seed: cfg.seed,
            config_toml,
            config_sha256,
        }
    }
}

/// Tabular output with unit-suffixed column names.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, prov: &Provenance) -> String {
        let mut out = String::new();
        writeln!(out, "# pmde {VERSION}").unwrap();
        writeln!(out, "# command = {}", prov.command).unwrap();
        writeln!(out, "# seed = {}", prov.seed).unwrap();
        writeln!(out, "# config_sha256 = {}", prov.config_sha256).unwrap();
        for line in prov.config_toml.lines() {
            writeln!(out, "#% {line}").unwrap();
        }
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| fmt_float(*x)).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        out
    }
}

pub fn render_json(prov: &Provenance, data: Value) -> String {
    let doc = json!({
        "pmde_version": VERSION,
        "command": prov.command,
        "seed": prov.seed,
        "config_sha256": prov.config_sha256,
        "config_toml": prov.config_toml,
        "data": data,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
    text.push('\n');
    text
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

/// Config text to use for `--config`: the embedded config of an exported file,
/// or the text itself if it is not one.
pub fn config_source(text: &str) -> CliResult<String> {
    if text.starts_with("# pmde ") {
        let lines: Vec<&str> = text
            .lines()
            .filter_map(|l| l.strip_prefix("#% ").or_else(|| (l == "#%").then_some("")))
            .collect();
        return Ok(lines.join("\n") + "\n");
    }
    if text.trim_start().starts_with('{') {
        let doc: Value = serde_json::from_str(text)
            .map_err(|e| CliError::Validation(format!("exported JSON is unreadable: {e}")))?;
        return doc
            .get("config_toml")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| CliError::Validation("JSON file carries no config_toml field".into()));
    }
    Ok(text.to_string())
}
