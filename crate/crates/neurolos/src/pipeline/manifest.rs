//! `run_manifest.json`: config hash, versions, per-stage records and an
//! inventory of every file under the output root.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::io::{read_json, write_json};

pub const MANIFEST: &str = "run_manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    /// Hash of the config and of every upstream output the stage read.
    pub fingerprint: String,
    pub seconds: f64,
    /// Output files of the stage, relative to the root, with their hashes.
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub neurolos: String,
    pub mart_schema: u32,
    pub model_format: u32,
}

impl Default for Versions {
    fn default() -> Self {
        Versions {
            neurolos: env!("CARGO_PKG_VERSION").to_string(),
            mart_schema: neurolos_core::marts::MART_SCHEMA_VERSION,
            model_format: crate::io::models::MODEL_VERSION,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_sha256: String,
    pub versions: Versions,
    pub stages: BTreeMap<String, StageRecord>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn load(root: &Path) -> Result<Option<RunManifest>> {
        let path = root.join(MANIFEST);
        if !path.is_file() {
            return Ok(None);
        }
        read_json(&path).map(Some)
    }

    /// Refreshes the inventory from disk and writes the manifest.
    pub fn save(&mut self, root: &Path) -> Result<()> {
        self.files = inventory(root)?;
        write_json(&root.join(MANIFEST), self)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let mut f = std::fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let mut h = Sha256::new();
    std::io::copy(&mut f, &mut h).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(h.finalize()))
}

/// Files below `dir`, sorted, as paths relative to `root` with `/` separators.
pub fn list_files(root: &Path, dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        if !d.is_dir() {
            continue;
        }
        for entry in std::fs::read_dir(&d).with_context(|| format!("listing {}", d.display()))? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap_or(&path);
                let name = rel
                    .components()
                    .map(|c| c.as_os_str().to_string_lossy())
                    .collect::<Vec<_>>()
                    .join("/");
                out.push((name, path));
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn hash_files(root: &Path, dir: &Path) -> Result<BTreeMap<String, String>> {
    list_files(root, dir)?
        .into_iter()
        .map(|(name, path)| Ok((name, file_sha256(&path)?)))
        .collect()
}

fn inventory(root: &Path) -> Result<Vec<FileEntry>> {
    list_files(root, root)?
        .into_iter()
        .filter(|(name, _)| name != MANIFEST)
        .map(|(path, full)| {
            Ok(FileEntry {
                bytes: std::fs::metadata(&full)?.len(),
                sha256: file_sha256(&full)?,
                path,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inventory_lists_every_file_but_itself() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("a/b")).unwrap();
        std::fs::write(dir.path().join("a/b/x.txt"), "x").unwrap();
        std::fs::write(dir.path().join("top.csv"), "").unwrap();
        let mut m = RunManifest::default();
        m.save(dir.path()).unwrap();
        let names: Vec<&str> = m.files.iter().map(|f| f.path.as_str()).collect();
        assert_eq!(names, ["a/b/x.txt", "top.csv"]);
        assert_eq!(m.files[0].sha256, sha256_hex(b"x"));
        assert_eq!(RunManifest::load(dir.path()).unwrap().unwrap(), m);
    }
}
