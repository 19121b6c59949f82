//! Payoff cache: exact win rates keyed by `(row policy, column policy,
//! engine config digest)`, so entries survive across runs of one config and
//! are dropped when the config changes.
//!
//! ```text
//! arenaladder-payoff 1
//! <config digest> <row PolicyId> <col PolicyId> <num>/<den> <matches> <exact|sampled>
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use arenaladder_core::metagame::{Cell, PayoffMatrix};
use arenaladder_core::num::Q;
use arenaladder_core::policy::PolicyId;

use super::{check_header, malformed, read_text, write_text, StoreResult};

pub const PAYOFF_FORMAT: u32 = 1;
const KIND: &str = "arenaladder-payoff";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PayoffEntry {
    Known(Cell),
    Unknown,
}

type Key = (String, PolicyId, PolicyId);

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PayoffCache {
    entries: BTreeMap<Key, Cell>,
}

impl PayoffCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, row: &PolicyId, col: &PolicyId, digest: &str, cell: Cell) {
        self.entries.insert((digest.to_string(), row.clone(), col.clone()), cell);
    }

    pub fn lookup(&self, row: &PolicyId, col: &PolicyId, digest: &str) -> PayoffEntry {
        match self.entries.get(&(digest.to_string(), row.clone(), col.clone())) {
            Some(c) => PayoffEntry::Known(c.clone()),
            None => PayoffEntry::Unknown,
        }
    }

    /// Stores every known entry of `matrix`.
    pub fn record(&mut self, matrix: &PayoffMatrix, digest: &str) {
        for (i, r) in matrix.rows().iter().enumerate() {
            for (j, c) in matrix.cols().iter().enumerate() {
                if let Some(cell) = matrix.get(i, j) {
                    self.insert(r, c, digest, cell.clone());
                }
            }
        }
    }

    /// Fills unknown entries of `matrix` from the cache; returns how many.
    pub fn fill(&self, matrix: &mut PayoffMatrix, digest: &str) -> StoreResult<usize> {
        let mut filled = 0;
        for (i, j) in matrix.unknown() {
            let (r, c) = (matrix.rows()[i].clone(), matrix.cols()[j].clone());
            if let PayoffEntry::Known(cell) = self.lookup(&r, &c, digest) {
                matrix.set(i, j, cell)?;
                filled += 1;
            }
        }
        Ok(filled)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{KIND} {PAYOFF_FORMAT}\n");
        for ((digest, r, c), cell) in &self.entries {
            out.push_str(&format!(
                "{digest} {r} {c} {} {} {}\n",
                cell.win_rate,
                cell.matches,
                if cell.exact { "exact" } else { "sampled" }
            ));
        }
        out
    }

    pub fn save(&self, path: &Path) -> StoreResult<()> {
        write_text(path, &self.to_text())
    }

    /// Loads the cache, dropping entries of any config other than
    /// `current_digest`. Returns the cache and the number dropped.
    pub fn load(path: &Path, current_digest: &str) -> StoreResult<(PayoffCache, usize)> {
        let text = read_text(path)?;
        let lines: Vec<&str> = text.lines().collect();
        check_header(path, lines.first().copied(), KIND, PAYOFF_FORMAT)?;
        let mut cache = PayoffCache::new();
        let mut dropped = 0;
        for (k, l) in lines.iter().enumerate().skip(1) {
            let line = k + 1;
            let f: Vec<&str> = l.split(' ').collect();
            if f.len() != 6 {
                return Err(malformed(path, line, format!("expected 6 fields, found {}", f.len())));
            }
            let row = PolicyId::parse(f[1]).map_err(|e| malformed(path, line, e.to_string()))?;
            let col = PolicyId::parse(f[2]).map_err(|e| malformed(path, line, e.to_string()))?;
            let win_rate: Q = f[3].parse().map_err(|_| malformed(path, line, format!("bad win rate `{}`", f[3])))?;
            let matches: u64 = f[4].parse().map_err(|_| malformed(path, line, format!("bad match count `{}`", f[4])))?;
            let exact = match f[5] {
                "exact" => true,
                "sampled" => false,
                other => return Err(malformed(path, line, format!("bad kind `{other}`"))),
            };
            if f[0] != current_digest {
                dropped += 1;
                continue;
            }
            cache.insert(&row, &col, f[0], Cell { win_rate, matches, exact });
        }
        Ok((cache, dropped))
    }
}
