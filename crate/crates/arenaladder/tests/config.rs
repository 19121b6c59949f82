use arenaladder::config::{parse_override, set_key, RunConfig};
use arenaladder_core::presets;
use toml::{Table, Value};

fn flags(pairs: &[&str]) -> Table {
    let mut t = Table::new();
    for p in pairs {
        let (section, key, value) = parse_override(p).unwrap();
        set_key(&mut t, &section, &key, value);
    }
    t
}

#[test]
fn defaults_file_flags_precedence() {
    let defaults = RunConfig::layered(None, Table::new()).unwrap();
    assert_eq!(defaults.run.seed, 0);
    assert_eq!(defaults.population.algo, "psro");

    let file = "[run]\nseed = 5\npreset = \"small\"\n[population]\nalgo = \"fsp\"\niters = 3\n";
    let from_file = RunConfig::layered(Some(file), Table::new()).unwrap();
    assert_eq!((from_file.run.seed, from_file.population.algo.as_str(), from_file.population.iters), (5, "fsp", 3));
    assert_eq!(from_file.engine_config().unwrap(), presets::small());

    let both = RunConfig::layered(Some(file), flags(&["run.seed=9", "population.iters=4"])).unwrap();
    assert_eq!((both.run.seed, both.population.algo.as_str(), both.population.iters), (9, "fsp", 4));
}

#[test]
fn engine_keys_override_the_preset() {
    let c = RunConfig::layered(None, flags(&["run.preset=tiny", "engine.max_hp=20", "engine.chip_fraction=\"1/5\""])).unwrap();
    let e = c.engine_config().unwrap();
    let tiny = presets::tiny();
    assert_eq!(e.max_hp, 20);
    assert_eq!(e.horizon, tiny.horizon);
    assert_ne!(e, tiny);
}

#[test]
fn snapshot_reloads_to_the_same_config() {
    let c = RunConfig::layered(None, flags(&["run.preset=tiny", "learn.step_size=\"1/4\"", "league.cycles=2"])).unwrap();
    let text = c.to_toml();
    let back = RunConfig::from_toml(&text).unwrap();
    assert_eq!(back, c);
    assert_eq!(back.to_toml(), text);
    assert_eq!(back.engine_config().unwrap(), c.engine_config().unwrap());
}

#[test]
fn invalid_settings_are_rejected() {
    for bad in [
        &["population.algo=nash++"][..],
        &["play.tick_rate=31"],
        &["play.tick_rate=0"],
        &["run.preset=huge"],
        &["learn.step_size=\"2\""],
        &["single.levels=[0]"],
        &["engine.max_hp=0"],
    ] {
        assert!(RunConfig::layered(None, flags(bad)).is_err(), "{bad:?} accepted");
    }
    assert!(RunConfig::layered(Some("[run]\nsede = 1\n"), Table::new()).is_err());
    assert!(RunConfig::layered(Some("[nosuch]\n"), Table::new()).is_err());
    assert!(parse_override("seed=1").is_err());
    assert_eq!(parse_override("play.host=localhost").unwrap().2, Value::String("localhost".into()));
}
