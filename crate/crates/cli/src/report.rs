use std::path::Path;

use balgraph::prng::GENERATOR_ID;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

/// What a command hands back for the report.
pub struct Outcome {
    pub pass: bool,
    pub graph_digest: Option<String>,
    pub result: Value,
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'a str,
    config: &'a RunConfig,
    graph_digest: Option<String>,
    generator: &'static str,
    pass: bool,
    result: Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn file_digest(path: &Path) -> Result<String, CliError> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

/// Prints the report to stdout and writes it to the report path, if any.
pub fn emit(command: &str, config: &RunConfig, outcome: Outcome) -> Result<(), CliError> {
    let report = Report {
        command,
        config,
        graph_digest: outcome.graph_digest,
        generator: GENERATOR_ID,
        pass: outcome.pass,
        result: outcome.result,
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    if let Some(path) = config.report_path() {
        std::fs::write(&path, &text).map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
    }
    print!("{text}");
    Ok(())
}
