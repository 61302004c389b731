//! Run manifests: a JSON record of everything that determined an output
//! file, written alongside it. Re-running a command whose manifest matches
//! an earlier one byte-for-byte reproduces the outputs byte-for-byte.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use hvgnet::ingest::RatingPolicy;
use hvgnet::metrics::SweepSpec;
use hvgnet::model::Config;

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub config: Option<Config>,
    pub rating_policy: Option<RatingPolicy>,
    pub sweep: Option<SweepSpec>,
    /// Remaining command parameters that affect the output.
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub tool_version: String,
    /// Non-standard semantics in effect (for example the wall-clock window).
    pub extensions: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            inputs: Vec::new(),
            config: None,
            rating_policy: None,
            sweep: None,
            params: BTreeMap::new(),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            extensions: Vec::new(),
        }
    }

    pub fn record_input(&mut self, path: &Path, bytes: &[u8]) {
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: format!("{:x}", hasher.finalize()),
        });
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.params.insert(key.to_string(), value.to_string());
    }

    pub fn render(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }

    /// The manifest lives next to its output as `<output>.manifest.json`.
    pub fn path_for(output: &Path) -> std::path::PathBuf {
        let mut name = output.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        output.with_file_name(name)
    }
}
