//! Artifact emission: CSVs and snapshots under the output directory plus a
//! manifest listing every artifact with its content hash, the config hash and
//! the seed. No timestamps, so reruns of the same config hash identically.

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub struct OutputSink {
    dir: PathBuf,
    artifacts: BTreeMap<String, String>,
    config_hash: String,
    seed: u64,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

impl OutputSink {
    pub fn new(dir: &Path, config_text: &str, seed: u64) -> Result<OutputSink> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(OutputSink {
            dir: dir.to_path_buf(),
            artifacts: BTreeMap::new(),
            config_hash: sha256_hex(config_text.as_bytes()),
            seed,
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.artifacts
            .insert(name.to_string(), sha256_hex(contents.as_bytes()));
        Ok(path)
    }

    /// Writes the manifest and returns its hash.
    pub fn finalize(self) -> Result<String> {
        let mut m = String::new();
        m.push_str(&format!("config_sha256 {}\n", self.config_hash));
        m.push_str(&format!("seed {}\n", self.seed));
        for (name, hash) in &self.artifacts {
            m.push_str(&format!("{hash}  {name}\n"));
        }
        let manifest_hash = sha256_hex(m.as_bytes());
        fs::write(self.dir.join("manifest.txt"), &m)?;
        Ok(manifest_hash)
    }
}
