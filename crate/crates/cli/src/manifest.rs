//! Run manifests: one per command invocation, written alongside the outputs.

use sha2::{Digest, Sha256};
use std::io;
use std::path::{Path, PathBuf};

/// Record of a single CLI run. The scenario (and data) hashes make reruns
/// auditable; identical inputs give identical manifests up to `duration_ms`.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    /// Resolved input paths with their SHA-256 content hashes.
    pub inputs: Vec<(PathBuf, String)>,
    pub outputs: Vec<PathBuf>,
    pub duration_ms: u128,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            duration_ms: 0,
        }
    }

    /// Resolves `path` and records it with its content hash.
    pub fn add_input(&mut self, path: &Path) -> io::Result<()> {
        let resolved = std::fs::canonicalize(path)?;
        let hash = sha256_file(&resolved)?;
        self.inputs.push((resolved, hash));
        Ok(())
    }

    pub fn add_output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command: {}\n", self.command));
        out.push_str(&format!("tool_version: {}\n", self.tool_version));
        for (path, hash) in &self.inputs {
            out.push_str(&format!("input: {}\n", path.display()));
            out.push_str(&format!("input_sha256: {hash}\n"));
        }
        for path in &self.outputs {
            out.push_str(&format!("output: {}\n", path.display()));
        }
        out.push_str(&format!("duration_ms: {}\n", self.duration_ms));
        out
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.to_text())
    }
}

/// SHA-256 of a file's bytes, hex-encoded. Content-based, so it is stable
/// across platforms for identical files.
pub fn sha256_file(path: &Path) -> io::Result<String> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}
