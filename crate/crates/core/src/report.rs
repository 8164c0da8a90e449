//! Versioned JSON envelope shared by every emitted report.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<C, R> {
    pub schema_version: u32,
    pub command: String,
    /// Echo of the configuration that produced the report.
    pub config: C,
    /// Content hash of the serialized config.
    pub input_hash: String,
    pub pass: bool,
    pub report: R,
}

impl<C: Serialize, R> Envelope<C, R> {
    pub fn new(command: impl Into<String>, config: C, report: R, pass: bool) -> Self {
        let input_hash = content_hash(&config);
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            config,
            input_hash,
            pass,
            report,
        }
    }
}

/// SHA-256 over `"blob <len>\0" + canonical JSON`, hex encoded.
pub fn content_hash<C: Serialize>(config: &C) -> String {
    let body = serde_json::to_vec(config).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(format!("blob {}\0", body.len()).as_bytes());
    hasher.update(&body);
    hex::encode(hasher.finalize())
}

/// Rows of a square matrix as CSV, with a header naming the grid points.
pub fn matrix_csv(labels: &[f64], matrix: &[Vec<f64>]) -> String {
    let mut out = String::from("t");
    for l in labels {
        out.push_str(&format!(",{l}"));
    }
    out.push('\n');
    for (l, row) in labels.iter().zip(matrix) {
        out.push_str(&l.to_string());
        for v in row {
            out.push_str(&format!(",{v:e}"));
        }
        out.push('\n');
    }
    out
}
