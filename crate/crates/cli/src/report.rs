use std::collections::BTreeMap;
use std::fmt::Write as _;

use prequential::rational::{self, Rational};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

/// Machine-readable outcome of one command. Rationals are rendered as
/// `num/den`, floats with 12 significant digits.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub results: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            ..Default::default()
        }
    }

    pub fn input(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.inputs.insert(key.to_string(), value.to_string());
        self
    }

    /// Records a file argument by path and SHA-256 digest of its bytes.
    pub fn input_file(&mut self, key: &str, path: &str, bytes: &[u8]) -> &mut Self {
        let digest = hex::encode(Sha256::digest(bytes));
        self.input(key, format!("{path} sha256:{digest}"))
    }

    pub fn rational(&mut self, key: &str, value: &Rational) -> &mut Self {
        self.results.insert(key.to_string(), rational::render(value));
        self
    }

    pub fn float(&mut self, key: &str, value: f64) -> &mut Self {
        self.results.insert(key.to_string(), rational::render_float(value));
        self
    }

    pub fn text(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.results.insert(key.to_string(), value.to_string());
        self
    }

    /// Adds a check. `detail` explains a failure and is dropped on success.
    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) -> bool {
        let detail = if passed { String::new() } else { detail.into() };
        debug_assert!(passed || !detail.is_empty(), "FAIL without detail");
        self.checks.push(Check {
            name: name.to_string(),
            status: if passed { Status::Pass } else { Status::Fail },
            detail,
        });
        passed
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "command: {}", self.command).unwrap();
        for (k, v) in &self.inputs {
            writeln!(out, "  input  {k} = {v}").unwrap();
        }
        if let Some(seed) = self.seed {
            writeln!(out, "  seed   {seed}").unwrap();
        }
        for (k, v) in &self.results {
            writeln!(out, "  result {k} = {v}").unwrap();
        }
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
            };
            if c.detail.is_empty() {
                writeln!(out, "  {status}   {}", c.name).unwrap();
            } else {
                writeln!(out, "  {status}   {}: {}", c.name, c.detail).unwrap();
            }
        }
        out
    }
}
