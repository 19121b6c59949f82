//! Content digests for artifacts and engine configurations.

use arenaladder_core::engine::EngineConfig;
use sha2::{Digest, Sha256};

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of the canonical text of an engine configuration. Checkpoints,
/// payoff caches and replays are tagged with it.
pub fn config_digest(config: &EngineConfig) -> String {
    sha256_hex(config.to_text().as_bytes())
}
