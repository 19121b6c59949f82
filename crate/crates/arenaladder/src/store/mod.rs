//! Versioned text artifacts of a run: policy checkpoints, match logs, payoff
//! caches, replays and the run manifest, all under one run directory.

mod checkpoint;
mod manifest;
mod matchlog;
mod payoff_cache;
mod replay;
mod rundir;

pub use checkpoint::{fmt_prob, load_policy, read_policy, save_policy, write_policy, Checkpoint, POLICY_FORMAT};
pub use manifest::{Artifact, MetaEntry, RunManifest, MANIFEST_FILE, MANIFEST_FORMAT};
pub use matchlog::{append_match, read_matches, MatchLog, MatchRecord, MATCH_FORMAT};
pub use payoff_cache::{PayoffCache, PayoffEntry, PAYOFF_FORMAT};
pub use replay::{load_replay, record_replay, save_replay, Replay, ReplayCheck, REPLAY_FORMAT};
pub use rundir::{runs_root, RunDir, RUNS_ENV};

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: version mismatch: {reason}", path.display())]
    Version { path: PathBuf, reason: String },
    #[error("{}: digest mismatch: expected {expected}, found {found}", path.display())]
    Digest { path: PathBuf, expected: String, found: String },
    #[error("{}:{line}: malformed record: {reason}", path.display())]
    Malformed { path: PathBuf, line: usize, reason: String },
    #[error(transparent)]
    Core(#[from] arenaladder_core::Error),
}

pub type StoreResult<T> = Result<T, StoreError>;

pub(crate) fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

pub(crate) fn read_text(path: &Path) -> StoreResult<String> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// Writes through a sibling temporary file and a rename, so readers never
/// see a half-written artifact.
pub(crate) fn write_text(path: &Path, text: &str) -> StoreResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, text).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub(crate) fn malformed(path: &Path, line: usize, reason: impl Into<String>) -> StoreError {
    StoreError::Malformed { path: path.to_path_buf(), line, reason: reason.into() }
}

/// Checks the leading format-version line `"<kind> <version>"`.
pub(crate) fn check_header(path: &Path, first: Option<&str>, kind: &str, version: u32) -> StoreResult<()> {
    let expected = format!("{kind} {version}");
    match first {
        Some(l) if l == expected => Ok(()),
        Some(l) if l.split_whitespace().next() == Some(kind) => {
            Err(StoreError::Version { path: path.to_path_buf(), reason: format!("found `{l}`, this build reads `{expected}`") })
        }
        Some(l) => Err(malformed(path, 1, format!("expected `{expected}`, found `{l}`"))),
        None => Err(malformed(path, 1, "empty file")),
    }
}
