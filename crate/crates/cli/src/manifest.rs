use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use quic_core::data::PRNG_NAME;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize, Debug)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to rerun a job: how it was invoked, the resolved
/// configuration, and digests of what went in and came out.
#[derive(Serialize, Debug)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command_line: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub prng: &'static str,
    pub platform: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn start(config: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command_line: std::env::args().collect(),
            config,
            seed,
            prng: PRNG_NAME,
            platform: platform(),
            started_unix: unix_now(),
            finished_unix: 0.0,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(digest(path)?);
        Ok(())
    }

    /// Writes `manifest.json` into `dir`, recording digests of `outputs`.
    pub fn finish(mut self, dir: &Path, outputs: &[PathBuf]) -> Result<()> {
        self.finished_unix = unix_now();
        for p in outputs {
            self.outputs.push(digest(p)?);
        }
        let text = serde_json::to_string_pretty(&self)?;
        write(&dir.join("manifest.json"), &(text + "\n"))
    }
}

pub fn platform() -> String {
    format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS)
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn digest(path: &Path) -> Result<FileDigest> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}
