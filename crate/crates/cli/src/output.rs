//! Artifact directory with a manifest tying every file to the config hash.

use std::fs;
use std::io;
use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

/// Environment variable naming the root under which run directories are created.
pub const OUTPUT_ROOT_VAR: &str = "FILAMENT_OUT";

const MODULES: [&str; 7] = ["lattice", "spectrum", "operator", "nash_moser", "bifurcation", "dynamics", "orbits"];

#[derive(Debug, Serialize)]
struct ArtifactEntry {
    path: String,
    sha256: String,
    config_hash: String,
}

#[derive(Debug, Serialize)]
struct ModuleVersion {
    module: String,
    version: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    status: &'a str,
    config_hash: &'a str,
    config: &'a RunConfig,
    cli_version: &'a str,
    modules: Vec<ModuleVersion>,
    artifacts: &'a [ArtifactEntry],
}

pub struct RunDir {
    dir: PathBuf,
    command: String,
    config_hash: String,
    artifacts: Vec<ArtifactEntry>,
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunDir {
    pub fn create(command: &str, config: &RunConfig) -> io::Result<Self> {
        let config_hash = config.hash();
        let dir = match &config.output {
            Some(p) => p.clone(),
            None => {
                let root = std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"));
                root.join(format!("{command}-{}", &config_hash[..12]))
            }
        };
        fs::create_dir_all(&dir)?;
        Ok(RunDir { dir, command: command.to_string(), config_hash, artifacts: Vec::new() })
    }

    fn record(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.artifacts.push(ArtifactEntry {
            path: name.to_string(),
            sha256: digest(bytes),
            config_hash: self.config_hash.clone(),
        });
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(io::Error::other)?;
        bytes.push(b'\n');
        self.record(name, &bytes)
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row).map_err(io::Error::other)?;
        }
        let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
        self.record(name, &bytes)
    }

    pub fn finish(self, config: &RunConfig, status: &str) -> io::Result<PathBuf> {
        // the manifest records the hashed form, so identical configs give identical manifests
        let config = &RunConfig { output: None, ..config.clone() };
        let manifest = Manifest {
            command: &self.command,
            status,
            config_hash: &self.config_hash,
            config,
            cli_version: env!("CARGO_PKG_VERSION"),
            modules: MODULES
                .iter()
                .map(|m| ModuleVersion { module: format!("filament_core::{m}"), version: filament_core::VERSION.into() })
                .collect(),
            artifacts: &self.artifacts,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(io::Error::other)?;
        bytes.push(b'\n');
        fs::write(self.dir.join("manifest.json"), bytes)?;
        Ok(self.dir)
    }
}
