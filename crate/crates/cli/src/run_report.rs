use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::commands::Outcome;
use crate::Cli;

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub command: &'static str,
    /// SHA-256 of every input file, keyed by path.
    pub inputs: BTreeMap<String, String>,
    pub config: Value,
    pub seed: u64,
    pub results: Value,
    pub wall_time: f64,
    pub version: &'static str,
}

impl RunReport {
    pub fn new(cli: &Cli, out: &Outcome, wall_time: f64) -> Self {
        let inputs = out
            .inputs
            .iter()
            .map(|p| (p.display().to_string(), hash_file(p)))
            .collect();
        Self {
            schema: femnet::io::REPORT_SCHEMA,
            command: cli.command.name(),
            inputs,
            config: serde_json::to_value(&cli.command).unwrap_or(Value::Null),
            seed: cli.seed,
            results: out.results.clone(),
            wall_time,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)
    }
}

fn hash_file(path: &Path) -> String {
    match fs::read(path) {
        Ok(bytes) => Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect(),
        Err(e) => format!("unreadable: {e}"),
    }
}
