use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::action::{AttackKind, Motion, TransAction};

/// How an attack connects: crouching avoids punches, airborne avoids kicks and
/// projectiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HitClass {
    Punch,
    Kick,
    Projectile,
}

/// Frame data of an attack or special move. Counts are in engine steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MoveSpec {
    pub damage: u16,
    pub range: u8,
    pub startup: u8,
    pub recovery: u8,
    pub class: HitClass,
    pub invulnerable_startup: bool,
}

impl MoveSpec {
    pub fn hitstun(&self) -> u8 {
        self.recovery.max(1)
    }

    pub fn blockstun(&self) -> u8 {
        self.recovery.saturating_sub(1).max(1)
    }
}

/// One element of a special-move input sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeqItem {
    Exact(TransAction),
    AnyPunch,
    AnyKick,
}

impl SeqItem {
    pub fn matches(self, a: TransAction) -> bool {
        match (self, a) {
            (SeqItem::Exact(x), a) => x == a,
            (SeqItem::AnyPunch, TransAction::Attack(k)) => k.is_punch(),
            (SeqItem::AnyKick, TransAction::Attack(k)) => !k.is_punch(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpecialMove {
    pub name: String,
    pub sequence: Vec<SeqItem>,
    pub spec: MoveSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpecialTable {
    pub moves: Vec<SpecialMove>,
}

impl Default for SpecialTable {
    /// Projectile, rising strike and spin kick.
    fn default() -> Self {
        let crouch = SeqItem::Exact(TransAction::Motion(Motion::Crouch));
        let forward = SeqItem::Exact(TransAction::Motion(Motion::Forward));
        let back_flip = SeqItem::Exact(TransAction::Motion(Motion::BackFlip));
        SpecialTable {
            moves: vec![
                SpecialMove {
                    name: String::from("projectile"),
                    sequence: vec![crouch, forward, SeqItem::AnyPunch],
                    spec: MoveSpec {
                        damage: 6,
                        range: 0,
                        startup: 1,
                        recovery: 3,
                        class: HitClass::Projectile,
                        invulnerable_startup: false,
                    },
                },
                SpecialMove {
                    name: String::from("rising_strike"),
                    sequence: vec![forward, crouch, SeqItem::AnyPunch],
                    spec: MoveSpec {
                        damage: 12,
                        range: 1,
                        startup: 1,
                        recovery: 4,
                        class: HitClass::Punch,
                        invulnerable_startup: true,
                    },
                },
                SpecialMove {
                    name: String::from("spin_kick"),
                    sequence: vec![crouch, back_flip, SeqItem::AnyKick],
                    spec: MoveSpec {
                        damage: 8,
                        range: 3,
                        startup: 1,
                        recovery: 3,
                        class: HitClass::Kick,
                        invulnerable_startup: false,
                    },
                },
            ],
        }
    }
}

impl SpecialTable {
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }
}

/// Id of the longest special whose input sequence is a suffix of
/// `buffer ++ [next]`. Among equally long matches the lowest id wins.
pub fn match_special(table: &SpecialTable, buffer: &[TransAction], next: TransAction) -> Option<u8> {
    let mut best: Option<(usize, u8)> = None;
    for (id, mv) in table.moves.iter().enumerate() {
        let n = mv.sequence.len();
        if n == 0 || n > buffer.len() + 1 {
            continue;
        }
        let (last, head) = mv.sequence.split_last().unwrap();
        if !last.matches(next) {
            continue;
        }
        let tail = &buffer[buffer.len() + 1 - n..];
        if head.iter().zip(tail).all(|(item, a)| item.matches(*a)) && best.map_or(true, |(len, _)| n > len) {
            best = Some((n, id as u8));
        }
    }
    best.map(|(_, id)| id)
}

/// Hit class of a standard attack.
pub fn attack_class(kind: AttackKind) -> HitClass {
    if kind.is_punch() {
        HitClass::Punch
    } else {
        HitClass::Kick
    }
}
