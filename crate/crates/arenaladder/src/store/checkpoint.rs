//! Policy checkpoint files.
//!
//! ```text
//! arenaladder-policy 1
//! config <engine config digest>
//! id <PolicyId>
//! actions <n>
//! records <r>
//! digest <sha256 of every line below>
//! default <p_0> .. <p_{n-1}>
//! <observation key> <p_0> .. <p_{n-1}>      (r lines, in observation order)
//! ```
//!
//! Probabilities carry 12 significant digits and are renormalized on load.

use std::hash::Hash;
use std::path::Path;

use arenaladder_core::game::ObsKey;
use arenaladder_core::policy::{PolicyId, TabularPolicy};

use super::{check_header, malformed, read_text, write_text, StoreError, StoreResult};
use crate::digest::sha256_hex;

pub const POLICY_FORMAT: u32 = 1;
const KIND: &str = "arenaladder-policy";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint<O: Eq + Hash> {
    pub id: PolicyId,
    pub config_digest: String,
    pub policy: TabularPolicy<O>,
}

/// A probability with 12 significant digits, trailing zeros dropped.
pub fn fmt_prob(p: f64) -> String {
    let s = format!("{p:.11e}");
    let (mantissa, exp) = s.split_once('e').expect("scientific format");
    let mantissa = if mantissa.contains('.') { mantissa.trim_end_matches('0').trim_end_matches('.') } else { mantissa };
    if exp == "0" {
        mantissa.to_string()
    } else {
        format!("{mantissa}e{exp}")
    }
}

fn fmt_dist(d: &[f64]) -> String {
    d.iter().map(|&p| fmt_prob(p)).collect::<Vec<_>>().join(" ")
}

pub fn write_policy<O: ObsKey + Clone + Eq + Hash + Ord>(id: &PolicyId, config_digest: &str, policy: &TabularPolicy<O>) -> String {
    let entries = policy.entries();
    let mut body = format!("default {}\n", fmt_dist(policy.default_dist()));
    for (obs, dist) in &entries {
        body.push_str(&format!("{} {}\n", obs.key(), fmt_dist(dist)));
    }
    format!(
        "{KIND} {POLICY_FORMAT}\nconfig {config_digest}\nid {id}\nactions {}\nrecords {}\ndigest {}\n{body}",
        policy.default_dist().len(),
        entries.len(),
        sha256_hex(body.as_bytes())
    )
}

pub fn save_policy<O: ObsKey + Clone + Eq + Hash + Ord>(
    path: &Path,
    id: &PolicyId,
    config_digest: &str,
    policy: &TabularPolicy<O>,
) -> StoreResult<()> {
    write_text(path, &write_policy(id, config_digest, policy))
}

/// Loads a checkpoint; with `expected_config` set, a checkpoint written
/// under another engine configuration is a version error.
pub fn load_policy<O: ObsKey + Clone + Eq + Hash + Ord>(path: &Path, expected_config: Option<&str>) -> StoreResult<Checkpoint<O>> {
    read_policy(path, &read_text(path)?, expected_config)
}

fn parse_dist(path: &Path, line: usize, fields: &[&str], n: usize) -> StoreResult<Vec<f64>> {
    if fields.len() != n {
        return Err(malformed(path, line, format!("expected {n} probabilities, found {}", fields.len())));
    }
    let mut d = Vec::with_capacity(n);
    for f in fields {
        let p: f64 = f.parse().map_err(|_| malformed(path, line, format!("bad probability `{f}`")))?;
        if !p.is_finite() || p < 0.0 {
            return Err(malformed(path, line, format!("bad probability `{f}`")));
        }
        d.push(p);
    }
    let total: f64 = d.iter().sum();
    if !(total > 0.5 && total < 1.5) {
        return Err(malformed(path, line, format!("probabilities sum to {total}")));
    }
    d.iter_mut().for_each(|p| *p /= total);
    Ok(d)
}

pub fn read_policy<O: ObsKey + Clone + Eq + Hash + Ord>(
    path: &Path,
    text: &str,
    expected_config: Option<&str>,
) -> StoreResult<Checkpoint<O>> {
    let mut lines: Vec<&str> = text.split('\n').collect();
    // Every line is newline-terminated, so the split ends in an empty piece.
    match lines.pop() {
        Some("") => {}
        _ => return Err(malformed(path, lines.len() + 1, "truncated line")),
    }
    check_header(path, lines.first().copied(), KIND, POLICY_FORMAT)?;
    let field = |i: usize, key: &str| -> StoreResult<&str> {
        let l = lines.get(i).ok_or_else(|| malformed(path, i + 1, format!("missing `{key}` line")))?;
        match l.split_once(' ') {
            Some((k, v)) if k == key => Ok(v),
            _ => Err(malformed(path, i + 1, format!("expected `{key} <value>`"))),
        }
    };
    let config = field(1, "config")?.to_string();
    if let Some(expected) = expected_config {
        if config != expected {
            return Err(StoreError::Version {
                path: path.to_path_buf(),
                reason: format!("checkpoint written for engine config {config}, current config is {expected}"),
            });
        }
    }
    let id = PolicyId::parse(field(2, "id")?).map_err(|e| malformed(path, 3, e.to_string()))?;
    let n: usize = field(3, "actions")?.parse().map_err(|_| malformed(path, 4, "bad action count"))?;
    let records: usize = field(4, "records")?.parse().map_err(|_| malformed(path, 5, "bad record count"))?;
    let digest = field(5, "digest")?.to_string();
    if n == 0 {
        return Err(malformed(path, 4, "zero actions"));
    }
    let body = &lines[6..];
    if body.len() != records + 1 {
        return Err(malformed(path, lines.len() + 1, format!("expected {records} records, found {}", body.len().saturating_sub(1))));
    }
    let mut rows = Vec::with_capacity(records);
    let mut default = None;
    for (k, l) in body.iter().enumerate() {
        let line = 7 + k;
        let fields: Vec<&str> = l.split(' ').collect();
        let (key, probs) = fields.split_first().expect("split yields one piece");
        let dist = parse_dist(path, line, probs, n)?;
        if k == 0 {
            if *key != "default" {
                return Err(malformed(path, line, "expected the `default` record"));
            }
            default = Some(dist);
        } else {
            let obs = O::parse_key(key).ok_or_else(|| malformed(path, line, format!("bad observation key `{key}`")))?;
            rows.push((obs, dist));
        }
    }
    let body_text: String = body.iter().map(|l| format!("{l}\n")).collect();
    let found = sha256_hex(body_text.as_bytes());
    if found != digest {
        return Err(StoreError::Digest { path: path.to_path_buf(), expected: digest, found });
    }
    let mut policy = TabularPolicy::with_default(default.expect("body has a default record"))?;
    for (obs, dist) in rows {
        policy.set(obs, dist)?;
    }
    Ok(Checkpoint { id, config_digest: config, policy })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probability_format() {
        assert_eq!(fmt_prob(1.0), "1");
        assert_eq!(fmt_prob(0.0), "0");
        assert_eq!(fmt_prob(0.25), "2.5e-1");
        assert_eq!(fmt_prob(1.0 / 3.0), "3.33333333333e-1");
    }
}
