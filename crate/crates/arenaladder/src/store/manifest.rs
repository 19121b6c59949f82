//! Run manifest (`manifest.toml`): identity of the run, its fully resolved
//! configuration and a digest for every artifact it wrote.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_text, write_text, StoreError, StoreResult};
use crate::config::RunConfig;
use crate::digest::sha256_hex;

pub const MANIFEST_FORMAT: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Artifact {
    /// Relative to the run directory.
    pub path: String,
    pub digest: String,
}

/// One component of an output mixture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaEntry {
    pub side: String,
    pub policy: String,
    pub path: String,
    /// Exact weight, `num/den`.
    pub weight: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub format: u32,
    pub run_id: String,
    /// Seconds since the Unix epoch.
    pub created: u64,
    pub command: String,
    pub algorithm: String,
    pub seed: u64,
    /// Resolved configuration in config-file syntax.
    pub config: String,
    #[serde(default)]
    pub artifacts: Vec<Artifact>,
    /// Output mixtures over saved policies, per side.
    #[serde(default)]
    pub meta: Vec<MetaEntry>,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn save(&self, run_dir: &Path) -> StoreResult<PathBuf> {
        let path = run_dir.join(MANIFEST_FILE);
        write_text(&path, &self.to_text())?;
        Ok(path)
    }

    /// Loads `manifest.toml` from a run directory (or the file itself),
    /// checks its format, re-parses the config snapshot and verifies every
    /// artifact digest.
    pub fn load(path: &Path) -> StoreResult<(RunManifest, PathBuf)> {
        let file = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
        let dir = file.parent().map(Path::to_path_buf).unwrap_or_default();
        let text = read_text(&file)?;
        let expected = format!("format = {MANIFEST_FORMAT}");
        match text.lines().next() {
            Some(l) if l == expected => {}
            Some(l) if l.starts_with("format") => {
                return Err(StoreError::Version { path: file, reason: format!("found `{l}`, this build reads `{expected}`") })
            }
            _ => return Err(super::malformed(&file, 1, format!("expected `{expected}`"))),
        }
        let manifest: RunManifest = toml::from_str(&text).map_err(|e| super::malformed(&file, 0, e.to_string()))?;
        let config = RunConfig::from_toml(&manifest.config).map_err(|e| super::malformed(&file, 0, format!("config snapshot: {e}")))?;
        if config.to_toml() != manifest.config {
            return Err(super::malformed(&file, 0, "config snapshot does not reload to itself"));
        }
        for a in &manifest.artifacts {
            let p = dir.join(&a.path);
            let bytes = std::fs::read(&p).map_err(super::io_err(&p))?;
            let found = sha256_hex(&bytes);
            if found != a.digest {
                return Err(StoreError::Digest { path: p, expected: a.digest.clone(), found });
            }
        }
        Ok((manifest, dir))
    }
}
