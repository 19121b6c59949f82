//! Run configuration: flat key-value sections layered as
//! defaults < config file < command-line flags.
//!
//! The `[engine]` section uses the exact `EngineConfig` field names and is
//! applied over the preset named by `run.preset`. Rationals are written as
//! quoted strings (`"1/10"` or `"0.1"`).

use std::path::Path;

use arenaladder_core::engine::{parse_actions, parse_damage_table, parse_rational, EngineConfig};
use arenaladder_core::exact::NODE_CAP;
use arenaladder_core::learner::{LearnConfig, RewardMode};
use arenaladder_core::metagame::{LeagueConfig, PayoffMode};
use arenaladder_core::num::{from_r64, Rational64, Q};
use arenaladder_core::presets;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::{Table, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

type ConfigResult<T> = Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> ConfigResult<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
    /// `tiny`, `small` or `default`.
    pub preset: String,
    /// Match-simulation threads; 0 uses the available parallelism.
    pub workers: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { seed: 0, preset: String::from("tiny"), workers: 0 }
    }
}

/// Field-for-field overrides of the preset's engine configuration.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arena_width: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_hp: Option<u16>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u16>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub damage_table: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chip_fraction: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub special_moves_enabled: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hard_coded_specials: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub close_range: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reward_alpha: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reward_lambda: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bonus_scale: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hp_buckets: Option<u16>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timer_buckets: Option<u16>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub actions: Option<String>,
}

impl EngineSection {
    /// Every field set from `c`.
    pub fn from_config(c: &EngineConfig) -> EngineSection {
        let text = c.to_text();
        toml::from_str(&text).expect("engine text is a complete section")
    }

    /// `base` with every set field replaced.
    pub fn apply(&self, base: &EngineConfig) -> ConfigResult<EngineConfig> {
        let mut c = base.clone();
        let rat = |s: &Option<String>, dst: &mut Rational64| -> ConfigResult<()> {
            if let Some(s) = s {
                *dst = parse_rational(s).map_err(|e| ConfigError(format!("engine: {e}")))?;
            }
            Ok(())
        };
        if let Some(v) = self.arena_width {
            c.arena_width = v;
        }
        if let Some(v) = self.max_hp {
            c.max_hp = v;
        }
        if let Some(v) = self.horizon {
            c.horizon = v;
        }
        if let Some(s) = &self.damage_table {
            c.damage_table = parse_damage_table(s).map_err(|e| ConfigError(format!("engine: {e}")))?;
        }
        rat(&self.chip_fraction, &mut c.chip_fraction)?;
        if let Some(v) = self.special_moves_enabled {
            c.special_moves_enabled = v;
        }
        if let Some(v) = self.hard_coded_specials {
            c.hard_coded_specials = v;
        }
        if let Some(v) = self.close_range {
            c.close_range = v;
        }
        rat(&self.reward_alpha, &mut c.reward_alpha)?;
        rat(&self.reward_lambda, &mut c.reward_lambda)?;
        rat(&self.bonus_scale, &mut c.bonus_scale)?;
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.hp_buckets {
            c.hp_buckets = v;
        }
        if let Some(v) = self.timer_buckets {
            c.timer_buckets = v;
        }
        if let Some(s) = &self.actions {
            c.actions = parse_actions(s).map_err(|e| ConfigError(format!("engine: {e}")))?;
        }
        c.validate().map_err(|e| ConfigError(format!("engine: {e}")))?;
        Ok(c)
    }
}

/// Parses the `key = value` text of `EngineConfig::to_text`; every field
/// must be present.
pub fn engine_from_text(text: &str) -> ConfigResult<EngineConfig> {
    let section: EngineSection = toml::from_str(text).map_err(|e| ConfigError(format!("engine: {}", e.message())))?;
    if section != EngineSection::from_config(&section.apply(&EngineConfig::default())?) {
        return err("engine: incomplete configuration");
    }
    section.apply(&EngineConfig::default())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LearnSection {
    pub budget_steps: u64,
    pub step_size: String,
    pub exploration: String,
    pub step_ratio: String,
    /// `dense` or `sparse`.
    pub reward: String,
    pub batch_episodes: u32,
    pub eval_matches: u32,
}

impl Default for LearnSection {
    fn default() -> Self {
        let d = LearnConfig::default();
        LearnSection {
            budget_steps: d.budget_steps,
            step_size: d.step_size.to_string(),
            exploration: d.exploration.to_string(),
            step_ratio: d.step_ratio.to_string(),
            reward: d.reward.name().to_string(),
            batch_episodes: d.batch_episodes,
            eval_matches: 200,
        }
    }
}

/// Policy every population and league run starts from: a Q-learner trained
/// on the left against one CPU level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PretrainSection {
    pub steps: u64,
    pub level: u8,
}

impl Default for PretrainSection {
    fn default() -> Self {
        PretrainSection { steps: 20_000, level: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SingleSection {
    /// `cpu` trains against one level, `curriculum` against all levels.
    pub mode: String,
    pub level: u8,
    pub levels: Vec<u8>,
    pub epochs: usize,
    pub eval_matches: u32,
}

impl Default for SingleSection {
    fn default() -> Self {
        SingleSection { mode: String::from("cpu"), level: 8, levels: (1..=8).collect(), epochs: 10, eval_matches: 200 }
    }
}

pub const ALGORITHMS: [&str; 5] = ["ippo", "2timescale", "fsp", "psro", "league"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PopulationSection {
    pub algo: String,
    pub iters: usize,
    /// Best-response oracle: `exact` or `rl` (trained with `[learn]`).
    pub oracle: String,
    /// Payoff entries: `exact` or `sampled`.
    pub payoff: String,
    pub matches: u32,
    /// Node cap of exact solves.
    pub cap: usize,
    /// Initial pair: `pretrained` or `uniform`.
    pub init: String,
}

impl Default for PopulationSection {
    fn default() -> Self {
        PopulationSection {
            algo: String::from("psro"),
            iters: 8,
            oracle: String::from("exact"),
            payoff: String::from("exact"),
            matches: 200,
            cap: NODE_CAP,
            init: String::from("pretrained"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LeagueSection {
    pub cycles: usize,
    pub br_budget: u64,
    pub self_play: String,
    pub pfsp_all: String,
    pub pfsp_exploiters: String,
    pub me_reset: String,
    pub me_struggle: String,
    pub recent: usize,
}

impl Default for LeagueSection {
    fn default() -> Self {
        let d = LeagueConfig::default();
        LeagueSection {
            cycles: d.cycles,
            br_budget: d.br_budget,
            self_play: d.self_play.to_string(),
            pfsp_all: d.pfsp_all.to_string(),
            pfsp_exploiters: d.pfsp_exploiters.to_string(),
            me_reset: d.me_reset.to_string(),
            me_struggle: d.me_struggle.to_string(),
            recent: d.recent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IndependentSection {
    /// Actor step multiplier of the slow (right) side under `2timescale`.
    pub slow_ratio: String,
}

impl Default for IndependentSection {
    fn default() -> Self {
        IndependentSection { slow_ratio: String::from("1/10") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TournamentSection {
    /// Checkpoint files.
    pub policies: Vec<String>,
    pub rounds: u32,
    pub k: f64,
    pub initial: f64,
}

impl Default for TournamentSection {
    fn default() -> Self {
        TournamentSection {
            policies: Vec::new(),
            rounds: 10,
            k: arenaladder_core::eval::DEFAULT_K,
            initial: arenaladder_core::eval::DEFAULT_ELO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LadderSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<String>,
    pub levels: Vec<u8>,
    pub matches: u32,
}

impl Default for LadderSection {
    fn default() -> Self {
        LadderSection { policy: None, levels: (1..=8).collect(), matches: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExploitSection {
    /// A checkpoint file, or a run directory whose output mixture is used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    /// Side the target plays; defaults to the side in its policy id.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<String>,
    pub method: String,
    pub budget_steps: u64,
    pub cap: usize,
}

impl Default for ExploitSection {
    fn default() -> Self {
        ExploitSection { target: None, side: None, method: String::from("exact"), budget_steps: 100_000, cap: NODE_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReplaySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlaySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<String>,
    pub host: String,
    pub port: u16,
    pub tick_rate: u32,
    /// Side of the human; defaults to the side opposite the checkpoint's.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub human_side: Option<String>,
    /// Directory of the browser client bundle.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assets: Option<String>,
}

impl Default for PlaySection {
    fn default() -> Self {
        PlaySection {
            checkpoint: None,
            host: String::from("127.0.0.1"),
            port: 8080,
            tick_rate: 8,
            human_side: None,
            assets: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub run: RunSection,
    pub engine: EngineSection,
    pub learn: LearnSection,
    pub pretrain: PretrainSection,
    pub single: SingleSection,
    pub population: PopulationSection,
    pub league: LeagueSection,
    pub independent: IndependentSection,
    pub tournament: TournamentSection,
    pub ladder: LadderSection,
    pub exploit: ExploitSection,
    pub replay: ReplaySection,
    pub play: PlaySection,
}

/// Recursively overlays `top` onto `base`.
pub fn merge(base: &mut Table, top: Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// A `section.key=value` override. The value is read as a TOML value and
/// falls back to a plain string.
pub fn parse_override(s: &str) -> ConfigResult<(String, String, Value)> {
    let (path, raw) = s.split_once('=').ok_or_else(|| ConfigError(format!("override `{s}` is not section.key=value")))?;
    let (section, key) =
        path.trim().split_once('.').ok_or_else(|| ConfigError(format!("override `{s}` is not section.key=value")))?;
    let raw = raw.trim();
    let value = toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((section.to_string(), key.to_string(), value))
}

/// Adds `section.key = value` to a table of overrides.
pub fn set_key(table: &mut Table, section: &str, key: &str, value: Value) {
    let entry = table.entry(section.to_string()).or_insert_with(|| Value::Table(Table::new()));
    if let Value::Table(t) = entry {
        t.insert(key.to_string(), value);
    }
}

fn ratio(section: &str, key: &str, s: &str) -> ConfigResult<Rational64> {
    parse_rational(s).map_err(|_| ConfigError(format!("{section}.{key}: malformed rational `{s}`")))
}

fn one_of(section: &str, key: &str, value: &str, valid: &[&str]) -> ConfigResult<()> {
    if valid.contains(&value) {
        Ok(())
    } else {
        err(format!("{section}.{key}: unknown value `{value}` (valid: {})", valid.join(", ")))
    }
}

impl RunConfig {
    /// Layers `file` (config-file text) and then `flags` over the defaults
    /// and resolves the engine section against the preset.
    pub fn layered(file: Option<&str>, flags: Table) -> ConfigResult<RunConfig> {
        let mut table = Table::try_from(RunConfig::default()).expect("defaults serialize");
        if let Some(text) = file {
            let t: Table = toml::from_str(text).map_err(|e| ConfigError(format!("config file: {}", e.message())))?;
            merge(&mut table, t);
        }
        merge(&mut table, flags);
        let raw: RunConfig = table.try_into().map_err(|e: toml::de::Error| ConfigError(e.message().to_string()))?;
        raw.resolve()
    }

    pub fn from_file(path: Option<&Path>, flags: Table) -> ConfigResult<RunConfig> {
        let text = match path {
            Some(p) => Some(std::fs::read_to_string(p).map_err(|e| ConfigError(format!("{}: {e}", p.display())))?),
            None => None,
        };
        RunConfig::layered(text.as_deref(), flags)
    }

    /// Parses a resolved snapshot.
    pub fn from_toml(text: &str) -> ConfigResult<RunConfig> {
        RunConfig::layered(Some(text), Table::new())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Fills the engine section from the preset and checks every value.
    fn resolve(mut self) -> ConfigResult<RunConfig> {
        let engine = self.engine_config()?;
        self.engine = EngineSection::from_config(&engine);
        self.learn_config(0)?;
        self.league_config()?;
        one_of("single", "mode", &self.single.mode, &["cpu", "curriculum"])?;
        one_of("population", "algo", &self.population.algo, &ALGORITHMS)?;
        one_of("population", "oracle", &self.population.oracle, &["exact", "rl"])?;
        one_of("population", "payoff", &self.population.payoff, &["exact", "sampled"])?;
        one_of("population", "init", &self.population.init, &["pretrained", "uniform"])?;
        one_of("exploit", "method", &self.exploit.method, &["exact", "rl"])?;
        if let Some(s) = &self.exploit.side {
            one_of("exploit", "side", s, &["left", "right"])?;
        }
        if let Some(s) = &self.play.human_side {
            one_of("play", "human_side", s, &["left", "right"])?;
        }
        if self.population.iters == 0 {
            return err("population.iters must be >= 1");
        }
        if !(1..=30).contains(&self.play.tick_rate) {
            return err(format!("play.tick_rate must lie in [1, 30], got {}", self.play.tick_rate));
        }
        for &l in self.single.levels.iter().chain(&self.ladder.levels).chain([&self.single.level, &self.pretrain.level]) {
            if !(1..=8).contains(&l) {
                return err(format!("CPU level {l} outside 1..=8"));
            }
        }
        if self.single.levels.is_empty() || self.ladder.levels.is_empty() {
            return err("level lists must not be empty");
        }
        let positive = [
            ("single.eval_matches", self.single.eval_matches as u64),
            ("population.matches", self.population.matches as u64),
            ("ladder.matches", self.ladder.matches as u64),
            ("learn.eval_matches", self.learn.eval_matches as u64),
        ];
        for (name, v) in positive {
            if v == 0 {
                return err(format!("{name} must be >= 1"));
            }
        }
        if !(self.tournament.k > 0.0 && self.tournament.k.is_finite() && self.tournament.initial.is_finite()) {
            return err("tournament.k must be positive and tournament.initial finite");
        }
        ratio("independent", "slow_ratio", &self.independent.slow_ratio)?;
        Ok(self)
    }

    pub fn engine_config(&self) -> ConfigResult<EngineConfig> {
        let base = presets::by_name(&self.run.preset)
            .ok_or_else(|| ConfigError(format!("run.preset: unknown preset `{}` (valid: tiny, small, default)", self.run.preset)))?;
        self.engine.apply(&base)
    }

    /// Learner settings with the given seed.
    pub fn learn_config(&self, seed: u64) -> ConfigResult<LearnConfig> {
        let l = &self.learn;
        one_of("learn", "reward", &l.reward, &["dense", "sparse"])?;
        let lc = LearnConfig {
            budget_steps: l.budget_steps,
            step_size: ratio("learn", "step_size", &l.step_size)?,
            exploration: ratio("learn", "exploration", &l.exploration)?,
            step_ratio: ratio("learn", "step_ratio", &l.step_ratio)?,
            seed,
            reward: RewardMode::parse(&l.reward).expect("checked"),
            batch_episodes: l.batch_episodes,
            eval_matches: l.eval_matches,
        };
        lc.validate().map_err(|e| ConfigError(format!("learn: {e}")))?;
        Ok(lc)
    }

    pub fn league_config(&self) -> ConfigResult<LeagueConfig> {
        let s = &self.league;
        let q = |key: &str, v: &str| -> ConfigResult<Q> { Ok(from_r64(ratio("league", key, v)?)) };
        let cfg = LeagueConfig {
            cycles: s.cycles,
            br_budget: s.br_budget,
            learn: self.learn_config(self.run.seed)?,
            payoff: self.payoff_mode(),
            self_play: q("self_play", &s.self_play)?,
            pfsp_all: q("pfsp_all", &s.pfsp_all)?,
            pfsp_exploiters: q("pfsp_exploiters", &s.pfsp_exploiters)?,
            me_reset: q("me_reset", &s.me_reset)?,
            me_struggle: q("me_struggle", &s.me_struggle)?,
            recent: s.recent,
            seed: self.run.seed,
        };
        cfg.validate().map_err(|e| ConfigError(format!("league: {e}")))?;
        Ok(cfg)
    }

    pub fn payoff_mode(&self) -> PayoffMode {
        match self.population.payoff.as_str() {
            "exact" => PayoffMode::Exact { cap: self.population.cap },
            _ => PayoffMode::Sampled { matches: self.population.matches },
        }
    }
}
