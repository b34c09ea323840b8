use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{io_error, CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Record written next to every output; enough to reproduce it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    /// Fully resolved configuration, every default materialized.
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub seed: Option<u64>,
    /// Output file names, relative to the manifest's directory.
    pub outputs: Vec<String>,
    /// MAD noise estimate, for `estimate` runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_hat: Option<f64>,
}

impl RunManifest {
    pub fn new<C: Serialize>(subcommand: &str, config: &C) -> CliResult<Self> {
        Ok(Self {
            subcommand: subcommand.to_string(),
            version: wavemix::VERSION.to_string(),
            config: serde_json::to_value(config)
                .map_err(|e| CliError::Runtime(format!("cannot serialize config: {e}")))?,
            inputs: Vec::new(),
            seed: None,
            outputs: Vec::new(),
            sigma_hat: None,
        })
    }

    pub fn add_input(&mut self, path: &Path) -> CliResult<()> {
        self.inputs.push(InputDigest {
            path: path.to_path_buf(),
            sha256: digest_file(path)?,
        });
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Runtime(format!("cannot serialize manifest: {e}")))?;
        std::fs::write(&path, text + "\n").map_err(|e| io_error(&path, e))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: not a run manifest: {e}", path.display())))
    }

    /// Fails if any recorded input no longer has its recorded digest.
    pub fn verify_inputs(&self) -> CliResult<()> {
        for input in &self.inputs {
            let now = digest_file(&input.path)?;
            if now != input.sha256 {
                return Err(CliError::Usage(format!(
                    "{} changed since the manifest was written (sha256 {now}, recorded {})",
                    input.path.display(),
                    input.sha256
                )));
            }
        }
        Ok(())
    }
}

pub fn digest_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| io_error(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
