//! Run manifests written next to every output set.

use std::path::Path;

use serde::{Deserialize, Serialize};
use wallrom::metrics::Timing;

use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub wallrom: String,
    pub model_format: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub versions: Versions,
    pub timings: Vec<Timing>,
    /// Output files relative to the output directory.
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &str, config_hash: String, seed: u64) -> Self {
        Self {
            command: command.to_owned(),
            config_hash,
            seed,
            versions: Versions {
                wallrom: env!("CARGO_PKG_VERSION").to_owned(),
                model_format: wallrom::pgd::FORMAT_VERSION,
            },
            timings: Vec::new(),
            outputs: Vec::new(),
            summary: serde_json::Value::Null,
        }
    }

    /// Writes `manifest.json` in `dir` through a temporary file.
    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        wallrom::io::write_atomic(dir.join("manifest.json"), text.as_bytes())?;
        Ok(())
    }

    pub fn read(dir: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(dir.join("manifest.json")).map_err(|e| crate::error::CliError::io(dir, e))?;
        serde_json::from_str(&text).map_err(|e| wallrom::Error::Corrupt(e.to_string()).into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn write_read_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new("build", "abc".into(), 42);
        m.outputs.push("model.json".into());
        m.summary = serde_json::json!({ "modes": 12 });
        m.write(dir.path()).unwrap();
        assert_eq!(RunManifest::read(dir.path()).unwrap(), m);
        assert!(!dir.path().join("manifest.tmp~").exists());
    }
}
