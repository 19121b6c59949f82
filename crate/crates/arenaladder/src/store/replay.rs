//! Replay files: the engine config and seed, then the joint action of every
//! step by canonical name.
//!
//! ```text
//! arenaladder-replay 1
//! seed <u64>
//! config-digest <digest of the config text below>
//! config-lines <n>
//! <n lines of `key = value` engine config>
//! steps <s>
//! <t> <a_left> <a_right>                    (s lines, t = 0..s-1)
//! final <sha256 of the final state's canonical text>
//! ```

use std::path::Path;

use arenaladder_core::engine::{advance, EngineConfig, GameState, TransAction};
use arenaladder_core::game::Outcome;

use super::{check_header, malformed, read_text, write_text, StoreError, StoreResult};
use crate::config::engine_from_text;
use crate::digest::{config_digest, sha256_hex};

pub const REPLAY_FORMAT: u32 = 1;
const KIND: &str = "arenaladder-replay";

#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub seed: u64,
    pub config: EngineConfig,
    pub actions: Vec<[TransAction; 2]>,
    /// Digest of the recorded final state.
    pub final_digest: String,
}

/// Result of re-simulating a replay.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayCheck {
    pub final_state: GameState,
    pub final_digest: String,
    pub outcome: Option<Outcome>,
    pub steps: usize,
    pub matches: bool,
}

pub fn state_digest(state: &GameState) -> String {
    sha256_hex(state.canonical_text().as_bytes())
}

impl Replay {
    /// Runs the recorded actions from the initial state.
    pub fn simulate(&self) -> arenaladder_core::Result<GameState> {
        let legal = self.config.legal_actions();
        let mut state = GameState::reset(&self.config)?;
        for pair in &self.actions {
            for a in pair {
                if !legal.contains(a) {
                    return Err(arenaladder_core::Error::IllegalAction { action: a.name() });
                }
            }
            state = advance(&state, pair[0], pair[1], &self.config)?;
        }
        Ok(state)
    }

    pub fn check(&self) -> arenaladder_core::Result<ReplayCheck> {
        let final_state = self.simulate()?;
        let final_digest = state_digest(&final_state);
        let outcome = if final_state.terminal { final_state.winner } else { None };
        Ok(ReplayCheck {
            matches: final_digest == self.final_digest,
            final_digest,
            outcome,
            steps: self.actions.len(),
            final_state,
        })
    }

    pub fn to_text(&self) -> String {
        let config_text = self.config.to_text();
        let mut out = format!(
            "{KIND} {REPLAY_FORMAT}\nseed {}\nconfig-digest {}\nconfig-lines {}\n{config_text}steps {}\n",
            self.seed,
            config_digest(&self.config),
            config_text.lines().count(),
            self.actions.len()
        );
        for (t, [l, r]) in self.actions.iter().enumerate() {
            out.push_str(&format!("{t} {} {}\n", l.name(), r.name()));
        }
        out.push_str(&format!("final {}\n", self.final_digest));
        out
    }
}

/// Replay of an action sequence; the final digest comes from simulating it.
pub fn record_replay(config: &EngineConfig, seed: u64, actions: Vec<[TransAction; 2]>) -> arenaladder_core::Result<Replay> {
    let mut replay = Replay { seed, config: config.clone(), actions, final_digest: String::new() };
    replay.final_digest = state_digest(&replay.simulate()?);
    Ok(replay)
}

pub fn save_replay(path: &Path, replay: &Replay) -> StoreResult<()> {
    write_text(path, &replay.to_text())
}

fn kv<'a>(path: &Path, lines: &[&'a str], i: usize, key: &str) -> StoreResult<&'a str> {
    let l = lines.get(i).ok_or_else(|| malformed(path, i + 1, format!("missing `{key}` line")))?;
    match l.split_once(' ') {
        Some((k, v)) if k == key => Ok(v),
        _ => Err(malformed(path, i + 1, format!("expected `{key} <value>`"))),
    }
}

pub fn load_replay(path: &Path) -> StoreResult<Replay> {
    let text = read_text(path)?;
    let lines: Vec<&str> = text.lines().collect();
    check_header(path, lines.first().copied(), KIND, REPLAY_FORMAT)?;
    let seed: u64 = kv(path, &lines, 1, "seed")?.parse().map_err(|_| malformed(path, 2, "bad seed"))?;
    let digest = kv(path, &lines, 2, "config-digest")?.to_string();
    let n: usize = kv(path, &lines, 3, "config-lines")?.parse().map_err(|_| malformed(path, 4, "bad line count"))?;
    if lines.len() < 4 + n {
        return Err(malformed(path, lines.len() + 1, "truncated config"));
    }
    let config_text: String = lines[4..4 + n].iter().map(|l| format!("{l}\n")).collect();
    let config = engine_from_text(&config_text).map_err(|e| malformed(path, 5, e.to_string()))?;
    let found = config_digest(&config);
    if found != digest {
        return Err(StoreError::Digest { path: path.to_path_buf(), expected: digest, found });
    }
    let steps: usize = kv(path, &lines, 4 + n, "steps")?.parse().map_err(|_| malformed(path, 5 + n, "bad step count"))?;
    let mut actions = Vec::with_capacity(steps);
    for t in 0..steps {
        let i = 5 + n + t;
        let l = lines.get(i).ok_or_else(|| malformed(path, i + 1, format!("expected {steps} steps, found {t}")))?;
        let f: Vec<&str> = l.split(' ').collect();
        if f.len() != 3 || f[0].parse::<usize>().ok() != Some(t) {
            return Err(malformed(path, i + 1, format!("expected `{t} <a_left> <a_right>`")));
        }
        let parse = |s: &str| TransAction::parse(s).ok_or_else(|| malformed(path, i + 1, format!("unknown action `{s}`")));
        actions.push([parse(f[1])?, parse(f[2])?]);
    }
    let at = 5 + n + steps;
    let final_digest = kv(path, &lines, at, "final")?.to_string();
    if at + 1 != lines.len() {
        return Err(malformed(path, at + 2, "trailing content"));
    }
    Ok(Replay { seed, config, actions, final_digest })
}
