//! The run-summary JSON written next to every command's data files. It
//! holds the fully resolved configuration, so `lanchester rerun` can
//! reproduce the artifacts from it alone.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::CliError;
use crate::formats::{write_json, DataFormat};

pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Simulate,
    Optimize,
    Sweep,
    Heatmap,
    Casestudy,
    Meanfield,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Optimize => "optimize",
            Command::Sweep => "sweep",
            Command::Heatmap => "heatmap",
            Command::Casestudy => "casestudy",
            Command::Meanfield => "meanfield",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Command,
    pub config_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Worker threads; 0 lets the pool pick.
    pub workers: usize,
    pub format: DataFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub tool: String,
    pub version: String,
    pub manifest: RunManifest,
    pub config: Config,
    pub elapsed_seconds: f64,
    /// Data files written, relative to the output directory.
    pub artifacts: Vec<String>,
    /// Command-specific results: termination reasons, terminal means,
    /// utilities, winners.
    pub results: serde_json::Value,
}

impl RunSummary {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let raw = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&raw).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        write_json(&dir.join(SUMMARY_FILE), self)
    }
}
