use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use num_rational::Rational64;
use num_traits::{One, Zero};

use super::action::{AttackKind, TransAction};
use super::special::{attack_class, MoveSpec, SpecialTable};
use crate::error::{Error, Result};

/// Damage, reach and frame data of one standard attack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AttackData {
    pub damage: u16,
    pub range: u8,
    pub startup: u8,
    pub recovery: u8,
}

/// Per-attack data indexed by [`AttackKind`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DamageTable {
    pub entries: [AttackData; 6],
}

impl Default for DamageTable {
    fn default() -> Self {
        let light = AttackData { damage: 4, range: 1, startup: 0, recovery: 1 };
        let medium = AttackData { damage: 7, range: 1, startup: 1, recovery: 2 };
        let hard = AttackData { damage: 11, range: 2, startup: 2, recovery: 3 };
        DamageTable { entries: [light, medium, hard, light, medium, hard] }
    }
}

impl DamageTable {
    pub fn get(&self, kind: AttackKind) -> &AttackData {
        &self.entries[kind.index()]
    }

    pub fn get_mut(&mut self, kind: AttackKind) -> &mut AttackData {
        &mut self.entries[kind.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EngineConfig {
    pub arena_width: u8,
    pub max_hp: u16,
    pub horizon: u16,
    pub damage_table: DamageTable,
    /// Fraction of damage taken while blocking, rounded down.
    pub chip_fraction: Rational64,
    /// Decode special moves from input sequences.
    pub special_moves_enabled: bool,
    /// Expose each special move as a single action.
    pub hard_coded_specials: bool,
    pub close_range: u8,
    pub reward_alpha: Rational64,
    pub reward_lambda: Rational64,
    pub bonus_scale: Rational64,
    pub seed: u64,
    /// Number of equal HP buckets in symbolic observations.
    pub hp_buckets: u16,
    /// Number of equal timer buckets in symbolic observations.
    pub timer_buckets: u16,
    /// Legal action set; `None` means every standard action (plus the
    /// hard-coded specials when enabled).
    pub actions: Option<Vec<TransAction>>,
    pub specials: SpecialTable,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            arena_width: 13,
            max_hp: 100,
            horizon: 200,
            damage_table: DamageTable::default(),
            chip_fraction: Rational64::new(1, 10),
            special_moves_enabled: true,
            hard_coded_specials: false,
            close_range: 1,
            reward_alpha: Rational64::one(),
            reward_lambda: Rational64::from_integer(3),
            bonus_scale: Rational64::from_integer(100),
            seed: 0,
            hp_buckets: 8,
            timer_buckets: 8,
            actions: None,
            specials: SpecialTable::default(),
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::Config(msg));
        if self.arena_width < 5 {
            return err(format!("arena_width must be >= 5, got {}", self.arena_width));
        }
        if self.arena_width > 64 {
            return err(format!("arena_width must be <= 64, got {}", self.arena_width));
        }
        if self.horizon < 1 {
            return err(String::from("horizon must be >= 1"));
        }
        if self.max_hp < 1 {
            return err(String::from("max_hp must be >= 1"));
        }
        if self.chip_fraction < Rational64::zero() || self.chip_fraction > Rational64::one() {
            return err(format!("chip_fraction must lie in [0, 1], got {}", self.chip_fraction));
        }
        if self.close_range >= self.arena_width {
            return err(format!(
                "close_range must be < arena_width ({}), got {}",
                self.arena_width, self.close_range
            ));
        }
        if self.hp_buckets < 1 || self.timer_buckets < 1 {
            return err(String::from("hp_buckets and timer_buckets must be >= 1"));
        }
        for (kind, data) in AttackKind::ALL.iter().zip(&self.damage_table.entries) {
            if data.startup > 16 || data.recovery > 16 {
                return err(format!("{} startup/recovery must be <= 16", kind.name()));
            }
        }
        if self.specials.len() > 16 {
            return err(String::from("at most 16 special moves"));
        }
        if let Some(actions) = &self.actions {
            if actions.is_empty() {
                return err(String::from("actions must not be empty"));
            }
            for (i, a) in actions.iter().enumerate() {
                self.check_action(*a)?;
                if actions[..i].contains(a) {
                    return err(format!("duplicate action {a}"));
                }
            }
        }
        Ok(())
    }

    pub fn check_action(&self, a: TransAction) -> Result<()> {
        if let TransAction::Special(id) = a {
            if !self.hard_coded_specials || id as usize >= self.specials.len() {
                return Err(Error::IllegalAction { action: a.name() });
            }
        }
        Ok(())
    }

    pub fn legal_actions(&self) -> Vec<TransAction> {
        match &self.actions {
            Some(a) => a.clone(),
            None => {
                let mut v = TransAction::standard();
                if self.hard_coded_specials {
                    v.extend((0..self.specials.len() as u8).map(TransAction::Special));
                }
                v
            }
        }
    }

    pub fn attack_spec(&self, kind: AttackKind) -> MoveSpec {
        let d = self.damage_table.get(kind);
        MoveSpec {
            damage: d.damage,
            range: d.range,
            startup: d.startup,
            recovery: d.recovery,
            class: attack_class(kind),
            invulnerable_startup: false,
        }
    }

    pub fn start_positions(&self) -> (u8, u8) {
        let q = self.arena_width / 4;
        (q, self.arena_width - 1 - q)
    }

    /// Canonical `key = value` listing of every field, one per line, in the
    /// order of the `[engine]` config section.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "arena_width = {}", self.arena_width);
        let _ = writeln!(s, "max_hp = {}", self.max_hp);
        let _ = writeln!(s, "horizon = {}", self.horizon);
        let _ = write!(s, "damage_table = \"");
        for (i, (kind, d)) in AttackKind::ALL.iter().zip(&self.damage_table.entries).enumerate() {
            if i > 0 {
                s.push(';');
            }
            let _ = write!(s, "{}:{}/{}/{}/{}", kind.name(), d.damage, d.range, d.startup, d.recovery);
        }
        s.push_str("\"\n");
        let _ = writeln!(s, "chip_fraction = \"{}\"", self.chip_fraction);
        let _ = writeln!(s, "special_moves_enabled = {}", self.special_moves_enabled);
        let _ = writeln!(s, "hard_coded_specials = {}", self.hard_coded_specials);
        let _ = writeln!(s, "close_range = {}", self.close_range);
        let _ = writeln!(s, "reward_alpha = \"{}\"", self.reward_alpha);
        let _ = writeln!(s, "reward_lambda = \"{}\"", self.reward_lambda);
        let _ = writeln!(s, "bonus_scale = \"{}\"", self.bonus_scale);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "hp_buckets = {}", self.hp_buckets);
        let _ = writeln!(s, "timer_buckets = {}", self.timer_buckets);
        match &self.actions {
            None => {
                let _ = writeln!(s, "actions = \"all\"");
            }
            Some(a) => {
                let names: Vec<String> = a.iter().map(|x| x.name()).collect();
                let _ = writeln!(s, "actions = \"{}\"", names.join(","));
            }
        }
        s
    }
}

/// Parses `"damage/range/startup/recovery"` entries separated by `;`, each
/// prefixed by the attack name (`light_punch:4/1/0/1`).
pub fn parse_damage_table(s: &str) -> Result<DamageTable> {
    let mut table = DamageTable::default();
    for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || Error::Config(format!("malformed damage_table entry `{part}`"));
        let (name, data) = part.split_once(':').ok_or_else(bad)?;
        let kind = AttackKind::ALL.iter().find(|k| k.name() == name.trim()).ok_or_else(bad)?;
        let nums: Vec<u16> = data.split('/').map(|x| x.trim().parse::<u16>()).collect::<core::result::Result<_, _>>().map_err(|_| bad())?;
        if nums.len() != 4 || nums[1] > 255 || nums[2] > 255 || nums[3] > 255 {
            return Err(bad());
        }
        *table.get_mut(*kind) = AttackData { damage: nums[0], range: nums[1] as u8, startup: nums[2] as u8, recovery: nums[3] as u8 };
    }
    Ok(table)
}

pub fn parse_rational(s: &str) -> Result<Rational64> {
    let bad = || Error::Config(format!("malformed rational `{s}`"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        Ok(Rational64::new(n, d))
    } else if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let int: i64 = if int == "-" || int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        if frac.len() > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10i64.pow(frac.len() as u32);
        let f: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let mag = int.abs() * den + f;
        Ok(Rational64::new(if neg { -mag } else { mag }, den))
    } else {
        Ok(Rational64::from_integer(s.parse().map_err(|_| bad())?))
    }
}

pub fn parse_actions(s: &str) -> Result<Option<Vec<TransAction>>> {
    if s.trim() == "all" {
        return Ok(None);
    }
    s.split(',')
        .map(|n| TransAction::parse(n.trim()).ok_or_else(|| Error::Config(format!("unknown action `{}`", n.trim()))))
        .collect::<Result<Vec<_>>>()
        .map(Some)
}
