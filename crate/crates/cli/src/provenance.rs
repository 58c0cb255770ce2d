//! Tool identity and configuration hashes stamped into every artifact.

use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const TOOL: &str = "nullflow";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// SHA-256 of the compact JSON encoding of `value`, in lowercase hex.
pub fn config_hash<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let bytes = serde_json::to_vec(value)?;
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        write!(hex, "{b:02x}").expect("writing to a String cannot fail");
    }
    Ok(hex)
}

/// First line of every CSV artifact.
pub fn csv_preamble(hash: &str) -> String {
    format!("# {TOOL} {VERSION} config_sha256={hash}")
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
}

impl Provenance {
    pub fn new(config_hash: String) -> Self {
        Self { tool: TOOL, version: VERSION, config_hash }
    }
}
