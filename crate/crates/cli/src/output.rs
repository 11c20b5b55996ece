//! Run manifests, artifact writing and failure classification.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

/// Failures are either the caller's fault (bad flags, missing files) or a
/// domain error reported by the library.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Domain(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Domain(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    /// One line: `error[usage]: ...` or `error[domain]: ...`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (tag, err) = match self {
            Failure::Usage(e) => ("usage", e),
            Failure::Domain(e) => ("domain", e),
        };
        let msg = format!("{err:#}").replace(['\n', '\r'], " ");
        write!(f, "error[{tag}]: {msg}")
    }
}

pub trait Classify<T> {
    fn usage(self) -> Result<T, Failure>;
    fn domain(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Usage(e.into()))
    }

    fn domain(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Domain(e.into()))
    }
}

pub fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .usage()
}

/// Everything needed to repeat a run. No timestamps, so identical argv gives
/// an identical file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub params: serde_json::Value,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub seed: Option<u64>,
}

/// Collects artifacts for one run under `dir`, then writes `manifest.json`.
pub struct Run {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Run {
    pub fn new(dir: &Path, subcommand: &str) -> Self {
        Self {
            dir: dir.to_path_buf(),
            manifest: RunManifest {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                subcommand: subcommand.to_string(),
                params: serde_json::Value::Null,
                inputs: Vec::new(),
                outputs: Vec::new(),
                seed: None,
            },
        }
    }

    pub fn params(&mut self, params: serde_json::Value) {
        self.manifest.params = params;
    }

    pub fn seed(&mut self, seed: u64) {
        self.manifest.seed = Some(seed);
    }

    pub fn input(&mut self, path: &Path) {
        self.manifest.inputs.push(path.display().to_string());
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, Failure> {
        fs::create_dir_all(&self.dir)
            .with_context(|| format!("cannot create output directory {}", self.dir.display()))
            .usage()?;
        let path = self.dir.join(name);
        fs::write(&path, contents)
            .with_context(|| format!("cannot write {}", path.display()))
            .usage()?;
        self.manifest.outputs.push(path.display().to_string());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, Failure> {
        let text = serde_json::to_string_pretty(value).domain()? + "\n";
        self.write(name, &text)
    }

    pub fn finish(mut self) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(&self.manifest).domain()? + "\n";
        self.write("manifest.json", &text).map(|_| ())
    }
}
