//! Named engine configurations used by tests, examples and the CLI.

use alloc::vec;

use crate::engine::{AttackData, AttackKind, DamageTable, EngineConfig, Motion, TransAction};

/// MiniBrawl-tiny: 5 cells, 3 steps, 8 actions, lossless observations. Small
/// enough for exact best responses in milliseconds.
///
/// Every attack reaches two cells and deals a third of the HP, and the kick
/// recovers slowly enough to be punished, so no single action is safe and
/// good play has to mix.
pub fn tiny() -> EngineConfig {
    let max_hp = 12;
    let horizon = 3;
    let mut damage_table = DamageTable::default();
    *damage_table.get_mut(AttackKind::LightPunch) = AttackData { damage: 4, range: 2, startup: 0, recovery: 1 };
    *damage_table.get_mut(AttackKind::LightKick) = AttackData { damage: 4, range: 2, startup: 0, recovery: 2 };
    *damage_table.get_mut(AttackKind::MediumPunch) = AttackData { damage: 4, range: 2, startup: 1, recovery: 2 };
    EngineConfig {
        arena_width: 5,
        max_hp,
        horizon,
        damage_table,
        special_moves_enabled: false,
        hp_buckets: max_hp + 1,
        timer_buckets: horizon + 1,
        bonus_scale: num_rational::Rational64::from_integer(max_hp as i64),
        actions: Some(vec![
            TransAction::Noop,
            TransAction::Motion(Motion::Defense),
            TransAction::Motion(Motion::Forward),
            TransAction::Motion(Motion::Crouch),
            TransAction::Motion(Motion::Jump),
            TransAction::Attack(AttackKind::LightPunch),
            TransAction::Attack(AttackKind::MediumPunch),
            TransAction::Attack(AttackKind::LightKick),
        ]),
        ..EngineConfig::default()
    }
}

/// MiniBrawl-small: 7 cells, 24 steps, all standard actions, coarse
/// observation buckets. Used for the CPU curriculum.
pub fn small() -> EngineConfig {
    let max_hp = 30;
    EngineConfig {
        arena_width: 7,
        max_hp,
        horizon: 24,
        special_moves_enabled: false,
        hp_buckets: 4,
        timer_buckets: 4,
        bonus_scale: num_rational::Rational64::from_integer(max_hp as i64),
        ..EngineConfig::default()
    }
}

pub fn by_name(name: &str) -> Option<EngineConfig> {
    match name {
        "tiny" => Some(tiny()),
        "small" => Some(small()),
        "default" => Some(EngineConfig::default()),
        _ => None,
    }
}
