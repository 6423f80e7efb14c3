//! Run manifests embedded in every report.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Everything needed to rerun a command. Two runs with equal manifests
/// produce identical reports apart from `timings_ms`.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub flags: Value,
    pub seeds: BTreeMap<&'static str, u64>,
    pub inputs: Vec<InputDigest>,
    pub threads: usize,
    pub timings_ms: BTreeMap<&'static str, f64>,
}

impl RunManifest {
    pub fn new(command: &str, flags: &impl Serialize) -> Result<Self> {
        Ok(RunManifest {
            tool: "hcpart",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            flags: serde_json::to_value(flags)?,
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            threads: rayon::current_num_threads(),
            timings_ms: BTreeMap::new(),
        })
    }

    pub fn seed(&mut self, name: &'static str, seed: u64) {
        self.seeds.insert(name, seed);
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(InputDigest {
            path: path.to_path_buf(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(())
    }

    pub fn timed<T>(&mut self, name: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.record(name, start.elapsed().as_secs_f64() * 1e3);
        out
    }

    pub fn record(&mut self, name: &'static str, millis: f64) {
        self.timings_ms.insert(name, millis);
    }
}

#[derive(Serialize)]
pub struct Report<'a, R: Serialize> {
    pub manifest: &'a RunManifest,
    pub result: &'a R,
}

/// Prints the report to stdout and, when asked, writes the same JSON to a file.
pub fn emit<R: Serialize>(manifest: &RunManifest, result: &R, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(&Report { manifest, result })?;
    println!("{text}");
    if let Some(path) = path {
        fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
