//! Run reports, scheme descriptors and file plumbing.

use std::fmt;
use std::fs;
use std::io::Write;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// How a command ended. Usage errors exit 2, failed checks exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(anyhow::Error),
    Failed(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(e) => write!(f, "error: {e:#}"),
            CliError::Failed(msg) => write!(f, "check failed: {msg}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Usage(e.into())
    }
}

pub fn usage(msg: impl fmt::Display) -> CliError {
    CliError::Usage(anyhow::anyhow!("{msg}"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: Option<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail,
        }
    }
}

/// Deterministic record of one command. Wall-clock time goes to stderr so
/// that identical runs give identical reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub seed: u64,
    pub results: Value,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl RunReport {
    pub fn new(command: &[String], seed: u64) -> Self {
        RunReport {
            command: command.to_vec(),
            inputs: Vec::new(),
            seed,
            results: Value::Null,
            checks: Vec::new(),
            passed: true,
        }
    }

    pub fn check(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Writes the report, then turns a failed check into exit code 1.
    pub fn finish(self, out: &str) -> Result<(), CliError> {
        write_output(out, &self.to_json())?;
        match self.first_failure() {
            None => Ok(()),
            Some(c) => Err(CliError::Failed(format!(
                "{}{}",
                c.name,
                c.detail
                    .as_deref()
                    .map(|d| format!(": {d}"))
                    .unwrap_or_default()
            ))),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Reads an input file and records its digest.
pub fn read_input(path: &str, inputs: &mut Vec<InputDigest>) -> Result<String, CliError> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    inputs.push(InputDigest {
        path: path.to_string(),
        sha256: sha256_hex(text.as_bytes()),
    });
    Ok(text)
}

/// Writes to `path`, or stdout for `-`.
pub fn write_output(path: &str, content: &str) -> Result<(), CliError> {
    if path == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(content.as_bytes())
            .context("writing stdout")?;
        out.flush().context("writing stdout")?;
    } else {
        fs::write(path, content).with_context(|| format!("writing {path}"))?;
    }
    Ok(())
}

/// Portable description of a multiaccess scheme: the source array plus the
/// ring parameters. Round-1 arrays are included for inspection; later rounds
/// are cyclic shifts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeDescriptor {
    pub pda: String,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub t: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub signature: (usize, usize, usize, u32),
    pub memory_ratio: String,
    pub subpacketization: usize,
    pub load: String,
    pub round1: RoundOne,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundOne {
    #[serde(rename = "C")]
    pub c: Vec<String>,
    #[serde(rename = "U")]
    pub u: Vec<String>,
    #[serde(rename = "Q")]
    pub q: Vec<String>,
    /// Per row, `(column, integer)` pairs used to fill the nulls.
    pub psi: Vec<Vec<(usize, usize)>>,
}
