//! Atomic artifact writes and per-run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

/// Writes through a temporary file in the target directory and renames it
/// into place, so a final path never holds a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    // temporary files are created owner-only
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_hash: String,
    config: &'a RunConfig,
    inputs: &'a [FileRecord],
    artifacts: &'a [FileRecord],
}

/// Tracks what one command read and wrote.
pub struct Run<'a> {
    command: String,
    config: &'a RunConfig,
    inputs: Vec<FileRecord>,
    artifacts: Vec<FileRecord>,
}

impl<'a> Run<'a> {
    pub fn new(command: &str, config: &'a RunConfig) -> Self {
        Run {
            command: command.to_string(),
            config,
            inputs: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        self.config.output_dir.join(name)
    }

    fn display(&self, path: &Path) -> String {
        match path.strip_prefix(&self.config.output_dir) {
            Ok(rel) => rel.display().to_string(),
            Err(_) => path.display().to_string(),
        }
    }

    /// Reads an input file and records its hash.
    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.push(FileRecord {
            path: self.display(path),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    /// Reads an artifact of an earlier command, naming that command when
    /// the artifact is missing.
    pub fn read_upstream(&mut self, name: &str, producer: &str) -> Result<Vec<u8>, CliError> {
        let path = self.out_path(name);
        if !path.is_file() {
            return Err(CliError::data(format!(
                "missing {}: run `tempotopic {producer}` first",
                path.display()
            )));
        }
        self.read(&path)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.out_path(name);
        write_atomic(&path, bytes).map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
        self.artifacts.push(FileRecord {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::data(e.to_string()))?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    pub fn artifacts(&self) -> &[FileRecord] {
        &self.artifacts
    }

    /// Writes `<command>.manifest.json` and returns the artifact list.
    pub fn finish(self) -> Result<Vec<FileRecord>, CliError> {
        let manifest = Manifest {
            command: &self.command,
            config_hash: self.config.hash(),
            config: self.config,
            inputs: &self.inputs,
            artifacts: &self.artifacts,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::data(e.to_string()))?;
        bytes.push(b'\n');
        let path = self.out_path(&format!("{}.manifest.json", self.command));
        write_atomic(&path, &bytes).map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
        Ok(self.artifacts)
    }
}
