use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Output directory that records a hash and line count for each file it
/// writes, then closes with `manifest.txt`.
#[derive(Debug)]
pub struct Bundle {
    dir: PathBuf,
    entries: BTreeMap<String, String>,
}

impl Bundle {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Bundle {
            dir: dir.to_owned(),
            entries: BTreeMap::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, data).map_err(|e| Error::io(&path, e))?;
        let lines = data.iter().filter(|&&b| b == b'\n').count();
        self.entries.insert(format!("output.{name}.sha256"), sha256_hex(data));
        self.entries.insert(format!("output.{name}.lines"), lines.to_string());
        Ok(())
    }

    pub fn text(&mut self, name: &str, s: &str) -> Result<()> {
        self.bytes(name, s.as_bytes())
    }

    pub fn file<F>(&mut self, name: &str, fill: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<()>,
    {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        self.bytes(name, &buf)
    }

    pub fn csv<F>(&mut self, name: &str, fill: F) -> Result<()>
    where
        F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> Result<()>,
    {
        self.file(name, |buf| {
            let mut w = csv::Writer::from_writer(buf);
            fill(&mut w)?;
            w.flush()?;
            Ok(())
        })
    }

    /// Writes `manifest.txt` from `extra` plus the per-file entries.
    pub fn finish(mut self, extra: BTreeMap<String, String>) -> Result<BTreeMap<String, String>> {
        self.entries.extend(extra);
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k}={v}");
        }
        let path = self.dir.join("manifest.txt");
        std::fs::write(&path, s).map_err(|e| Error::io(&path, e))?;
        Ok(self.entries)
    }
}

/// Reads a `key=value` manifest.
pub fn read_manifest(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .collect())
}
