use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance of one command run; written as `manifest.json` in the output
/// directory after every other output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub tool_version: String,
    /// Fully resolved configuration (model, sampler, study...).
    pub config: serde_json::Value,
    pub config_digest: String,
    pub seed: u64,
    pub inputs: Vec<FileDigest>,
    /// Every file in the output directory except the manifest, relative paths.
    pub outputs: Vec<FileDigest>,
    pub wall_clock_seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<FileDigest, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(FileDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) })
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|e| CliError::io(dir, e)))
        .collect::<Result<_, _>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_files(root, &p, out)?;
        } else if p.strip_prefix(root).map_or(true, |rel| rel != Path::new(MANIFEST_FILE)) {
            out.push(p);
        }
    }
    Ok(())
}

/// Digests of every file under `dir` except the manifest, sorted by path.
pub fn output_digests(dir: &Path) -> Result<Vec<FileDigest>, CliError> {
    let mut files = Vec::new();
    collect_files(dir, dir, &mut files)?;
    files
        .iter()
        .map(|p| {
            let mut d = file_digest(p)?;
            d.path = p.strip_prefix(dir).expect("under dir").display().to_string();
            Ok(d)
        })
        .collect()
}

/// Collects what a manifest needs while a command runs.
pub struct ManifestBuilder {
    command: String,
    started: Instant,
    inputs: Vec<FileDigest>,
}

impl ManifestBuilder {
    pub fn start(command: &str) -> Self {
        ManifestBuilder { command: command.into(), started: Instant::now(), inputs: Vec::new() }
    }

    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        self.inputs.push(file_digest(path)?);
        Ok(())
    }

    pub fn finish<C: Serialize>(self, out: &Path, config: &C, seed: u64) -> Result<RunManifest, CliError> {
        let config = serde_json::to_value(config).expect("config serialises");
        let config_digest = sha256_hex(config.to_string().as_bytes());
        let manifest = RunManifest {
            schema_version: SCHEMA_VERSION,
            command: self.command,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            config_digest,
            seed,
            inputs: self.inputs,
            outputs: output_digests(out)?,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
        };
        let path = out.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    }
}

impl RunManifest {
    pub fn read(dir: &Path) -> Result<RunManifest, CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}
