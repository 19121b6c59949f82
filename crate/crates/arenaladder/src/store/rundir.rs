//! Run directories: `<root>/<id>/{manifest.toml, policies/, payoff.csv,
//! matches.log, replays/}`.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use super::manifest::{Artifact, MetaEntry, RunManifest, MANIFEST_FORMAT};
use super::{io_err, write_text, StoreResult};
use crate::digest::sha256_hex;

/// Environment variable overriding the runs root.
pub const RUNS_ENV: &str = "ARENALADDER_RUNS";

pub fn runs_root() -> PathBuf {
    std::env::var_os(RUNS_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"))
}

#[derive(Debug)]
pub struct RunDir {
    pub id: String,
    pub path: PathBuf,
    artifacts: Vec<Artifact>,
    meta: Vec<MetaEntry>,
}

impl RunDir {
    /// Creates `<root>/<base_id>`, or `<base_id>-2`, `-3`, ... when taken.
    pub fn create(root: &Path, base_id: &str) -> StoreResult<RunDir> {
        std::fs::create_dir_all(root).map_err(io_err(root))?;
        let mut n = 1;
        loop {
            let id = if n == 1 { base_id.to_string() } else { format!("{base_id}-{n}") };
            let path = root.join(&id);
            match std::fs::create_dir(&path) {
                Ok(()) => {
                    for sub in ["policies", "replays"] {
                        let p = path.join(sub);
                        std::fs::create_dir(&p).map_err(io_err(&p))?;
                    }
                    return Ok(RunDir { id, path, artifacts: Vec::new(), meta: Vec::new() });
                }
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => n += 1,
                Err(e) => return Err(io_err(&path)(e)),
            }
        }
    }

    pub fn file(&self, rel: &str) -> PathBuf {
        self.path.join(rel)
    }

    /// Writes an artifact and indexes its digest.
    pub fn write(&mut self, rel: &str, text: &str) -> StoreResult<PathBuf> {
        let path = self.file(rel);
        write_text(&path, text)?;
        self.index(rel)?;
        Ok(path)
    }

    /// Indexes (or re-indexes) a file already written under the run.
    pub fn index(&mut self, rel: &str) -> StoreResult<()> {
        let path = self.file(rel);
        let bytes = std::fs::read(&path).map_err(io_err(&path))?;
        let digest = sha256_hex(&bytes);
        match self.artifacts.iter_mut().find(|a| a.path == rel) {
            Some(a) => a.digest = digest,
            None => self.artifacts.push(Artifact { path: rel.to_string(), digest }),
        }
        Ok(())
    }

    pub fn add_meta(&mut self, entry: MetaEntry) {
        self.meta.push(entry);
    }

    pub fn artifacts(&self) -> &[Artifact] {
        &self.artifacts
    }

    /// Writes `manifest.toml` and returns its path.
    pub fn finish(&self, command: &str, algorithm: &str, seed: u64, config: String) -> StoreResult<PathBuf> {
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut artifacts = self.artifacts.clone();
        artifacts.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = RunManifest {
            format: MANIFEST_FORMAT,
            run_id: self.id.clone(),
            created,
            command: command.to_string(),
            algorithm: algorithm.to_string(),
            seed,
            config,
            artifacts,
            meta: self.meta.clone(),
        };
        manifest.save(&self.path)
    }
}
