//! Run manifests: everything needed to repeat a command, written beside its
//! outputs as pretty JSON.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toposz::pipeline::PipelineConfig;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Compress,
    Decompress,
    Eval,
    Synth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub xi: f64,
    pub eps: f64,
    pub m: u8,
    pub max_iterations: usize,
}

impl RunConfig {
    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            xi: self.xi,
            eps: self.eps,
            m: self.m,
            max_iterations: self.max_iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Command,
    /// Raw field for compress / eval / synth output, stream for decompress.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// Existing stream to evaluate instead of compressing the input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stream: Option<PathBuf>,
    #[serde(default)]
    pub dims: Vec<usize>,
    #[serde(default)]
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfg: Option<RunConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep_xi: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep_eps: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Primary output; the remaining artifacts are derived from it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Every file the run writes, for reference.
    #[serde(default)]
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            input: None,
            stream: None,
            dims: Vec::new(),
            rank: 0,
            cfg: None,
            sweep_xi: Vec::new(),
            sweep_eps: Vec::new(),
            seed: None,
            out: None,
            outputs: Vec::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}

/// `dir/name.ext` becomes `dir/name.<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(suffix)
}

pub fn manifest_path(out: &Path) -> PathBuf {
    sibling(out, "manifest.json")
}
