//! Append-only match log.
//!
//! ```text
//! arenaladder-matches 1
//! match=<n> left=<PolicyId> right=<PolicyId> seed=<u64> outcome=<left|right|draw> hp=<l>,<r> timer=<t> steps=<n> dense=<l>,<r> tag=<tag|->
//! ```
//!
//! Each record is one line written and flushed in a single call, so a crash
//! leaves at most one partial trailing line, which the reader skips.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use arenaladder_core::game::Outcome;
use arenaladder_core::policy::PolicyId;

use super::{check_header, io_err, malformed, read_text, StoreResult};

pub const MATCH_FORMAT: u32 = 1;
const KIND: &str = "arenaladder-matches";
const FIELDS: [&str; 10] = ["match", "left", "right", "seed", "outcome", "hp", "timer", "steps", "dense", "tag"];

#[derive(Debug, Clone, PartialEq)]
pub struct MatchRecord {
    pub id: u64,
    pub left: PolicyId,
    pub right: PolicyId,
    pub seed: u64,
    pub outcome: Outcome,
    pub hp: [u16; 2],
    /// Countdown left at the end of the match.
    pub timer: u16,
    pub steps: u32,
    /// Cumulative dense reward per side.
    pub dense: [f64; 2],
    pub tag: Option<String>,
}

impl MatchRecord {
    /// The match ends when the countdown expires or a fighter is out of HP,
    /// and the higher HP wins.
    pub fn check(&self) -> Result<(), String> {
        let expected = match self.hp[0].cmp(&self.hp[1]) {
            std::cmp::Ordering::Greater => Outcome::LeftWins,
            std::cmp::Ordering::Less => Outcome::RightWins,
            std::cmp::Ordering::Equal => Outcome::Draw,
        };
        if self.outcome != expected {
            return Err(format!("outcome {} contradicts hp {},{}", self.outcome.name(), self.hp[0], self.hp[1]));
        }
        if self.timer != 0 && self.hp[0] != 0 && self.hp[1] != 0 {
            return Err(format!("match ended with timer {} and both fighters standing", self.timer));
        }
        if let Some(t) = &self.tag {
            if t.is_empty() || t == "-" || t.contains(char::is_whitespace) {
                return Err(format!("bad tag `{t}`"));
            }
        }
        Ok(())
    }

    pub fn to_line(&self) -> String {
        format!(
            "match={} left={} right={} seed={} outcome={} hp={},{} timer={} steps={} dense={},{} tag={}",
            self.id,
            self.left,
            self.right,
            self.seed,
            self.outcome.name(),
            self.hp[0],
            self.hp[1],
            self.timer,
            self.steps,
            self.dense[0],
            self.dense[1],
            self.tag.as_deref().unwrap_or("-")
        )
    }

    pub fn parse_line(line: &str) -> Result<MatchRecord, String> {
        let parts: Vec<&str> = line.split(' ').collect();
        if parts.len() != FIELDS.len() {
            return Err(format!("expected {} fields, found {}", FIELDS.len(), parts.len()));
        }
        let mut values = [""; 10];
        for (i, (part, name)) in parts.iter().zip(FIELDS).enumerate() {
            match part.split_once('=') {
                Some((k, v)) if k == name => values[i] = v,
                _ => return Err(format!("expected `{name}=` in field {}", i + 1)),
            }
        }
        let num = |i: usize| values[i].parse::<u64>().map_err(|_| format!("bad {} `{}`", FIELDS[i], values[i]));
        let pair = |i: usize| values[i].split_once(',').ok_or_else(|| format!("bad {} `{}`", FIELDS[i], values[i]));
        let (hl, hr) = pair(5)?;
        let (dl, dr) = pair(8)?;
        let bad_hp = || format!("bad hp `{}`", values[5]);
        let bad_dense = || format!("bad dense `{}`", values[8]);
        let record = MatchRecord {
            id: num(0)?,
            left: PolicyId::parse(values[1]).map_err(|e| e.to_string())?,
            right: PolicyId::parse(values[2]).map_err(|e| e.to_string())?,
            seed: num(3)?,
            outcome: Outcome::parse(values[4]).ok_or_else(|| format!("bad outcome `{}`", values[4]))?,
            hp: [hl.parse().map_err(|_| bad_hp())?, hr.parse().map_err(|_| bad_hp())?],
            timer: values[6].parse().map_err(|_| format!("bad timer `{}`", values[6]))?,
            steps: values[7].parse().map_err(|_| format!("bad steps `{}`", values[7]))?,
            dense: [dl.parse().map_err(|_| bad_dense())?, dr.parse().map_err(|_| bad_dense())?],
            tag: (values[9] != "-").then(|| values[9].to_string()),
        };
        record.check()?;
        Ok(record)
    }
}

/// Writer half of a match log; one writer per file.
#[derive(Debug)]
pub struct MatchLog {
    path: PathBuf,
    file: File,
}

impl MatchLog {
    /// Opens `path` for appending, writing the format line if the file is
    /// new or empty. An existing log of another format is refused.
    pub fn open(path: &Path) -> StoreResult<MatchLog> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let mut file = OpenOptions::new().create(true).append(true).read(true).open(path).map_err(io_err(path))?;
        let len = file.metadata().map_err(io_err(path))?.len();
        if len == 0 {
            file.write_all(format!("{KIND} {MATCH_FORMAT}\n").as_bytes()).map_err(io_err(path))?;
            file.flush().map_err(io_err(path))?;
        } else {
            let text = read_text(path)?;
            check_header(path, text.lines().next(), KIND, MATCH_FORMAT)?;
        }
        Ok(MatchLog { path: path.to_path_buf(), file })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, record: &MatchRecord) -> StoreResult<()> {
        record.check().map_err(arenaladder_core::Error::Invalid)?;
        let line = format!("{}\n", record.to_line());
        self.file.write_all(line.as_bytes()).map_err(io_err(&self.path))?;
        self.file.flush().map_err(io_err(&self.path))
    }
}

/// Opens, appends one record and closes.
pub fn append_match(path: &Path, record: &MatchRecord) -> StoreResult<()> {
    MatchLog::open(path)?.append(record)
}

/// All complete records in order. A missing or empty log has none; a final
/// line without its newline is an interrupted append and is skipped.
pub fn read_matches(path: &Path) -> StoreResult<Vec<MatchRecord>> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let mut lines: Vec<&str> = text.split('\n').collect();
    lines.pop();
    if lines.is_empty() {
        return Ok(Vec::new());
    }
    check_header(path, lines.first().copied(), KIND, MATCH_FORMAT)?;
    lines[1..]
        .iter()
        .enumerate()
        .map(|(k, l)| MatchRecord::parse_line(l).map_err(|reason| malformed(path, k + 2, reason)))
        .collect()
}
