use std::fs;
use std::path::Path;

use arenaladder::digest::{config_digest, sha256_hex};
use arenaladder::store::{
    append_match, load_policy, load_replay, read_matches, record_replay, save_policy, save_replay, write_policy,
    MatchLog, MatchRecord, PayoffCache, PayoffEntry, RunDir, RunManifest, StoreError,
};
use arenaladder_core::engine::{MiniBrawl, SymbolicObs, TransAction};
use arenaladder_core::game::{MarkovGame, Outcome, Side};
use arenaladder_core::metagame::{Cell, PayoffMatrix};
use arenaladder_core::num::Q;
use arenaladder_core::policy::{PolicyId, TabularPolicy};
use arenaladder_core::presets;
use tempfile::tempdir;

fn tiny() -> MiniBrawl {
    MiniBrawl::new(presets::tiny()).unwrap()
}

fn some_policy(game: &MiniBrawl) -> TabularPolicy<SymbolicObs> {
    let n = game.num_actions();
    let mut p = TabularPolicy::uniform(n);
    let s0 = game.initial_state();
    p.set_deterministic(game.observe(&s0, Side::Left), 2);
    let s1 = game.transition(&s0, 2, 1);
    let mut probs = vec![0.0; n];
    probs[0] = 0.25;
    probs[n - 1] = 0.75;
    p.set(game.observe(&s1, Side::Left), probs).unwrap();
    p
}

#[test]
fn policy_round_trip_is_exact() {
    let game = tiny();
    let dir = tempdir().unwrap();
    let digest = config_digest(&game.config);
    let id = PolicyId::new("PSRO", Side::Left, 3);
    for policy in [TabularPolicy::uniform(game.num_actions()), some_policy(&game)] {
        let path = dir.path().join("p.policy");
        save_policy(&path, &id, &digest, &policy).unwrap();
        let c = load_policy::<SymbolicObs>(&path, Some(&digest)).unwrap();
        assert_eq!(c.id, id);
        assert_eq!(c.config_digest, digest);
        assert_eq!(c.policy, policy);
        // Saving the loaded policy reproduces the file byte for byte.
        assert_eq!(write_policy(&c.id, &digest, &c.policy), fs::read_to_string(&path).unwrap());
    }
}

#[test]
fn truncated_policy_reports_the_line() {
    let game = tiny();
    let dir = tempdir().unwrap();
    let digest = config_digest(&game.config);
    let path = dir.path().join("p.policy");
    save_policy(&path, &PolicyId::new("PSRO", Side::Left, 1), &digest, &some_policy(&game)).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, &text[..text.len() - 5]).unwrap();
    match load_policy::<SymbolicObs>(&path, Some(&digest)) {
        Err(StoreError::Malformed { line, .. }) => assert_eq!(line, text.lines().count()),
        other => panic!("expected a malformed record, got {other:?}"),
    }
}

#[test]
fn policy_from_another_config_is_a_version_error() {
    let game = tiny();
    let dir = tempdir().unwrap();
    let path = dir.path().join("p.policy");
    save_policy(&path, &PolicyId::new("PSRO", Side::Left, 1), &config_digest(&game.config), &some_policy(&game)).unwrap();
    let other = config_digest(&presets::small());
    assert!(matches!(load_policy::<SymbolicObs>(&path, Some(&other)), Err(StoreError::Version { .. })));
    // Without an expected digest the file loads.
    assert!(load_policy::<SymbolicObs>(&path, None).is_ok());
}

#[test]
fn edited_policy_body_fails_its_digest() {
    let game = tiny();
    let dir = tempdir().unwrap();
    let digest = config_digest(&game.config);
    let path = dir.path().join("p.policy");
    save_policy(&path, &PolicyId::new("PSRO", Side::Left, 1), &digest, &some_policy(&game)).unwrap();
    let text = fs::read_to_string(&path).unwrap().replace("2.5e-1", "5e-1").replace("7.5e-1", "5e-1");
    fs::write(&path, text).unwrap();
    assert!(matches!(load_policy::<SymbolicObs>(&path, Some(&digest)), Err(StoreError::Digest { .. })));
}

#[test]
fn unknown_policy_format_version_is_refused() {
    let game = tiny();
    let dir = tempdir().unwrap();
    let digest = config_digest(&game.config);
    let path = dir.path().join("p.policy");
    save_policy(&path, &PolicyId::new("PSRO", Side::Left, 1), &digest, &some_policy(&game)).unwrap();
    let text = fs::read_to_string(&path).unwrap().replacen("arenaladder-policy 1", "arenaladder-policy 9", 1);
    fs::write(&path, text).unwrap();
    assert!(matches!(load_policy::<SymbolicObs>(&path, Some(&digest)), Err(StoreError::Version { .. })));
}

fn record(id: u64) -> MatchRecord {
    MatchRecord {
        id,
        left: PolicyId::new("PSRO", Side::Left, 1),
        right: PolicyId::new("FSP", Side::Right, 2),
        seed: 17 + id,
        outcome: Outcome::LeftWins,
        hp: [5, 0],
        timer: 1,
        steps: 2,
        dense: [12.5, -3.25],
        tag: Some(String::from("round0")),
    }
}

#[test]
fn match_log_counts_and_order() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("matches.log");
    assert!(read_matches(&path).unwrap().is_empty());
    MatchLog::open(&path).unwrap();
    assert!(read_matches(&path).unwrap().is_empty());
    for id in 0..5 {
        append_match(&path, &record(id)).unwrap();
    }
    let back = read_matches(&path).unwrap();
    assert_eq!(back, (0..5).map(record).collect::<Vec<_>>());
}

#[test]
fn match_log_refuses_inconsistent_records() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("matches.log");
    let mut bad = record(0);
    bad.outcome = Outcome::RightWins;
    assert!(append_match(&path, &bad).is_err());
    let mut live = record(0);
    live.hp = [5, 3];
    assert!(append_match(&path, &live).is_err());
    assert!(read_matches(&path).unwrap().is_empty());
}

#[test]
fn corrupt_middle_line_is_located() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("matches.log");
    for id in 0..3 {
        append_match(&path, &record(id)).unwrap();
    }
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[2] = "match=1 left=garbage";
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    match read_matches(&path) {
        Err(StoreError::Malformed { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected a malformed record, got {other:?}"),
    }
}

#[test]
fn partial_trailing_line_is_dropped() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("matches.log");
    for id in 0..3 {
        append_match(&path, &record(id)).unwrap();
    }
    let mut text = fs::read_to_string(&path).unwrap();
    let last = record(3).to_line();
    text.push_str(&last[..last.len() / 2]);
    fs::write(&path, text).unwrap();
    assert_eq!(read_matches(&path).unwrap().len(), 3);
}

fn matrix() -> PayoffMatrix {
    let mut m = PayoffMatrix::new();
    m.add_row(PolicyId::new("PSRO", Side::Left, 1));
    m.add_row(PolicyId::new("PSRO", Side::Left, 3));
    m.add_col(PolicyId::new("PSRO", Side::Right, 2));
    m.set(0, 0, Cell { win_rate: Q::new(1.into(), 3.into()), matches: 0, exact: true }).unwrap();
    m.set(1, 0, Cell { win_rate: Q::new(7.into(), 10.into()), matches: 40, exact: false }).unwrap();
    m
}

#[test]
fn payoff_cache_round_trip() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("payoff.cache");
    let m = matrix();
    let mut cache = PayoffCache::new();
    cache.record(&m, "d1");
    cache.save(&path).unwrap();
    let (back, dropped) = PayoffCache::load(&path, "d1").unwrap();
    assert_eq!(dropped, 0);
    assert_eq!(back.len(), 2);
    let mut fresh = PayoffMatrix::new();
    for id in m.rows() {
        fresh.add_row(id.clone());
    }
    for id in m.cols() {
        fresh.add_col(id.clone());
    }
    assert_eq!(back.fill(&mut fresh, "d1").unwrap(), 2);
    assert_eq!(fresh, m);
}

#[test]
fn payoff_cache_unknown_and_stale_entries() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("payoff.cache");
    let mut cache = PayoffCache::new();
    cache.record(&matrix(), "old");
    cache.save(&path).unwrap();
    let row = PolicyId::new("PSRO", Side::Left, 1);
    let col = PolicyId::new("PSRO", Side::Right, 2);
    assert!(matches!(cache.lookup(&row, &PolicyId::new("PSRO", Side::Right, 9), "old"), PayoffEntry::Unknown));
    assert!(matches!(cache.lookup(&row, &col, "old"), PayoffEntry::Known(_)));
    assert!(matches!(cache.lookup(&row, &col, "new"), PayoffEntry::Unknown));
    let (back, dropped) = PayoffCache::load(&path, "new").unwrap();
    assert_eq!(dropped, 2);
    assert!(back.is_empty());
}

#[test]
fn manifest_verifies_artifacts() {
    let dir = tempdir().unwrap();
    let mut run = RunDir::create(dir.path(), "train-pop-psro-s1").unwrap();
    run.write("payoff.csv", "row,a\nb,0.5\n").unwrap();
    let config = arenaladder::config::RunConfig::layered(None, Default::default()).unwrap().to_toml();
    let path = run.finish("train-pop", "psro", 1, config.clone()).unwrap();
    let (m, root) = RunManifest::load(&path).unwrap();
    assert_eq!(root, run.path);
    assert_eq!(m.config, config);
    assert_eq!(m.artifacts.len(), 1);
    assert_eq!(m.artifacts[0].digest, sha256_hex(b"row,a\nb,0.5\n"));

    fs::write(run.file("payoff.csv"), "row,a\nb,0.6\n").unwrap();
    assert!(matches!(RunManifest::load(&run.path), Err(StoreError::Digest { .. })));

    // A second run with the same id gets a suffix.
    let again = RunDir::create(dir.path(), "train-pop-psro-s1").unwrap();
    assert_eq!(again.id, "train-pop-psro-s1-2");
}

#[test]
fn replay_resimulates_to_the_recorded_state() {
    let game = tiny();
    let dir = tempdir().unwrap();
    let a = |l: &str, r: &str| [TransAction::parse(l).unwrap(), TransAction::parse(r).unwrap()];
    let actions = vec![a("forward", "noop"), a("light_punch", "defense"), a("light_kick", "crouch")];
    let replay = record_replay(&game.config, 5, actions).unwrap();
    let path = dir.path().join("m.replay");
    save_replay(&path, &replay).unwrap();
    let back = load_replay(&path).unwrap();
    assert_eq!(back, replay);
    let check = back.check().unwrap();
    assert!(check.matches);
    assert_eq!(check.steps, 3);
    assert_eq!(check.outcome, game.outcome(&check.final_state));

    // A different action sequence under the same header no longer matches.
    let mut edited = back.clone();
    edited.actions[1] = [TransAction::Noop, TransAction::Noop];
    assert_ne!(edited.actions[1], back.actions[1]);
    assert!(!edited.check().unwrap().matches);
}

#[test]
fn replay_with_edited_config_is_refused() {
    let game = tiny();
    let dir = tempdir().unwrap();
    let replay = record_replay(&game.config, 5, vec![[TransAction::Noop, TransAction::Noop]]).unwrap();
    let path = dir.path().join("m.replay");
    save_replay(&path, &replay).unwrap();
    let text = fs::read_to_string(&path).unwrap().replacen("max_hp = 12", "max_hp = 13", 1);
    assert!(text.contains("max_hp = 13"), "config block lists max_hp");
    fs::write(&path, text).unwrap();
    assert!(matches!(load_replay(Path::new(&path)), Err(StoreError::Digest { .. })));
}
