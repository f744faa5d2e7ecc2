//! Artifact emission: CSV tables and a checksum manifest.
//!
//! Every file the pipeline writes is registered with a [`Reporter`]; the
//! manifest then lists each artifact with its SHA-256, plus the hash of the
//! configuration and the seed, so a run can be verified byte-for-byte.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Collects written artifacts and emits `manifest.txt`.
pub struct Reporter {
    out_dir: PathBuf,
    entries: Vec<(String, String)>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    format!("{:x}", h.finalize())
}

impl Reporter {
    pub fn new(out_dir: &Path) -> Result<Self> {
        fs::create_dir_all(out_dir)
            .map_err(|e| CliError::Io(format!("creating {}: {e}", out_dir.display())))?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            entries: Vec::new(),
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    /// Writes one artifact and records its checksum.
    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        fs::write(&path, contents)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
        self.entries.push((name.to_string(), sha256_hex(contents)));
        Ok(path)
    }

    /// Writes a CSV table: `header` then one comma-joined row per record.
    pub fn write_csv(&mut self, name: &str, header: &str, rows: &[Vec<String>]) -> Result<PathBuf> {
        let mut text = String::from(header);
        text.push('\n');
        for row in rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        self.write(name, text.as_bytes())
    }

    /// Emits the manifest: config hash, seed, then `name sha256` per
    /// artifact in write order.
    pub fn finish(mut self, config_json: &str, seed: u64) -> Result<PathBuf> {
        let mut text = String::new();
        text.push_str(&format!("config_sha256 {}\n", sha256_hex(config_json.as_bytes())));
        text.push_str(&format!("seed {seed}\n"));
        self.entries.sort();
        for (name, hash) in &self.entries {
            text.push_str(&format!("{name} {hash}\n"));
        }
        let path = self.out_dir.join("manifest.txt");
        fs::write(&path, text)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
        Ok(path)
    }
}
