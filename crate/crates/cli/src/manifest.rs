//! Run manifests: a sidecar JSON file recording everything needed to
//! reproduce a run bit-for-bit. Every command that writes output files also
//! writes `manifest.json` next to them; `seclab rerun <manifest>` replays it.
//!
//! The manifest deliberately omits the output directory and any timestamps,
//! so replaying into a fresh directory produces byte-identical files,
//! including the manifest itself.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{data, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Version of the tool that produced the run.
    pub tool_version: String,
    /// Subcommand name: analyze | simulate | attack | oracle | bound.
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<String>,
    /// Budget list exactly as given on the command line (e.g. "2,5..8").
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutations: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exhaust: Option<bool>,
    /// Path of the input stream file, for attack runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_formula: Option<bool>,
}

impl RunManifest {
    /// A manifest skeleton for `command` with every parameter unset.
    pub fn new(command: &str) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            policy: None,
            k: None,
            n: None,
            t: None,
            r: None,
            sigma2: None,
            trials: None,
            permutations: None,
            seed: None,
            exhaust: None,
            input: None,
            delta: None,
            sigma: None,
            check_formula: None,
        }
    }

    /// Pretty JSON with a trailing newline, the exact bytes written to disk.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join("manifest.json");
        fs::write(&path, self.to_json())
            .map_err(|e| data(format!("cannot write {}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| data(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| data(format!("{}: {e}", path.display())))
    }
}
