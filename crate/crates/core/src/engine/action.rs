use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Motion {
    Defense,
    Forward,
    Jump,
    Crouch,
    BackFlip,
    FrontFlip,
    OffensiveCrouch,
    DefensiveCrouch,
}

impl Motion {
    pub const ALL: [Motion; 8] = [
        Motion::Defense,
        Motion::Forward,
        Motion::Jump,
        Motion::Crouch,
        Motion::BackFlip,
        Motion::FrontFlip,
        Motion::OffensiveCrouch,
        Motion::DefensiveCrouch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Motion::Defense => "defense",
            Motion::Forward => "forward",
            Motion::Jump => "jump",
            Motion::Crouch => "crouch",
            Motion::BackFlip => "back_flip",
            Motion::FrontFlip => "front_flip",
            Motion::OffensiveCrouch => "offensive_crouch",
            Motion::DefensiveCrouch => "defensive_crouch",
        }
    }

    /// Cells moved toward the opponent (negative = away).
    pub fn displacement(self) -> i32 {
        match self {
            Motion::Forward | Motion::OffensiveCrouch => 1,
            Motion::FrontFlip => 2,
            Motion::BackFlip => -2,
            _ => 0,
        }
    }

    pub fn is_crouch(self) -> bool {
        matches!(self, Motion::Crouch | Motion::OffensiveCrouch | Motion::DefensiveCrouch)
    }

    pub fn is_block(self) -> bool {
        matches!(self, Motion::Defense | Motion::DefensiveCrouch)
    }

    pub fn is_aerial(self) -> bool {
        matches!(self, Motion::Jump | Motion::BackFlip | Motion::FrontFlip)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttackKind {
    LightPunch,
    MediumPunch,
    HardPunch,
    LightKick,
    MediumKick,
    HardKick,
}

impl AttackKind {
    pub const ALL: [AttackKind; 6] = [
        AttackKind::LightPunch,
        AttackKind::MediumPunch,
        AttackKind::HardPunch,
        AttackKind::LightKick,
        AttackKind::MediumKick,
        AttackKind::HardKick,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_punch(self) -> bool {
        self.index() < 3
    }

    /// 0 = light, 1 = medium, 2 = hard.
    pub fn strength(self) -> usize {
        self.index() % 3
    }

    pub fn name(self) -> &'static str {
        match self {
            AttackKind::LightPunch => "light_punch",
            AttackKind::MediumPunch => "medium_punch",
            AttackKind::HardPunch => "hard_punch",
            AttackKind::LightKick => "light_kick",
            AttackKind::MediumKick => "medium_kick",
            AttackKind::HardKick => "hard_kick",
        }
    }
}

/// Categorical transformed action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransAction {
    Noop,
    Motion(Motion),
    Attack(AttackKind),
    /// Hard-coded special move, by index into the special table.
    Special(u8),
}

impl TransAction {
    /// Noop, the eight motions and the six attacks.
    pub fn standard() -> Vec<TransAction> {
        let mut v = Vec::with_capacity(15);
        v.push(TransAction::Noop);
        v.extend(Motion::ALL.iter().map(|&m| TransAction::Motion(m)));
        v.extend(AttackKind::ALL.iter().map(|&a| TransAction::Attack(a)));
        v
    }

    pub fn name(self) -> String {
        match self {
            TransAction::Noop => String::from("noop"),
            TransAction::Motion(m) => String::from(m.name()),
            TransAction::Attack(a) => String::from(a.name()),
            TransAction::Special(id) => format!("special_{id}"),
        }
    }

    pub fn parse(s: &str) -> Option<TransAction> {
        if s == "noop" {
            return Some(TransAction::Noop);
        }
        if let Some(m) = Motion::ALL.iter().find(|m| m.name() == s) {
            return Some(TransAction::Motion(*m));
        }
        if let Some(a) = AttackKind::ALL.iter().find(|a| a.name() == s) {
            return Some(TransAction::Attack(*a));
        }
        s.strip_prefix("special_").and_then(|id| id.parse().ok()).map(TransAction::Special)
    }
}

impl fmt::Display for TransAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Direction a fighter faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Facing {
    Left,
    Right,
}

impl Facing {
    pub fn flip(self) -> Facing {
        match self {
            Facing::Left => Facing::Right,
            Facing::Right => Facing::Left,
        }
    }
}

/// The 12-button arcade controller state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct HumanAction {
    pub buttons: [bool; 12],
}

impl HumanAction {
    pub const NAMES: [&'static str; 12] = ["B", "A", "MODE", "START", "UP", "DOWN", "LEFT", "RIGHT", "C", "Y", "X", "Z"];
    pub const B: usize = 0;
    pub const A: usize = 1;
    pub const MODE: usize = 2;
    pub const START: usize = 3;
    pub const UP: usize = 4;
    pub const DOWN: usize = 5;
    pub const LEFT: usize = 6;
    pub const RIGHT: usize = 7;
    pub const C: usize = 8;
    pub const Y: usize = 9;
    pub const X: usize = 10;
    pub const Z: usize = 11;

    pub fn pressed(names: &[&str]) -> HumanAction {
        let mut h = HumanAction::default();
        for n in names {
            if let Some(i) = Self::NAMES.iter().position(|b| b == n) {
                h.buttons[i] = true;
            }
        }
        h
    }
}

/// Attack buttons in priority order.
const ATTACK_BUTTONS: [(usize, AttackKind); 6] = [
    (HumanAction::X, AttackKind::LightPunch),
    (HumanAction::Y, AttackKind::MediumPunch),
    (HumanAction::Z, AttackKind::HardPunch),
    (HumanAction::A, AttackKind::LightKick),
    (HumanAction::B, AttackKind::MediumKick),
    (HumanAction::C, AttackKind::HardKick),
];

/// Maps a controller state to a transformed action, relative to `facing`.
///
/// Attack buttons win over directions (first pressed in the order
/// X, Y, Z, A, B, C). Opposite directions cancel. MODE and START are ignored.
pub fn encode_action(h: &HumanAction, facing: Facing) -> TransAction {
    if let Some(&(_, kind)) = ATTACK_BUTTONS.iter().find(|(b, _)| h.buttons[*b]) {
        return TransAction::Attack(kind);
    }
    let b = &h.buttons;
    let right = b[HumanAction::RIGHT] as i32 - b[HumanAction::LEFT] as i32;
    let vertical = b[HumanAction::UP] as i32 - b[HumanAction::DOWN] as i32;
    let toward = match facing {
        Facing::Right => right,
        Facing::Left => -right,
    };
    let motion = match (vertical, toward) {
        (0, 0) => return TransAction::Noop,
        (0, 1) => Motion::Forward,
        (0, _) => Motion::Defense,
        (1, 0) => Motion::Jump,
        (1, 1) => Motion::FrontFlip,
        (1, _) => Motion::BackFlip,
        (_, 0) => Motion::Crouch,
        (_, 1) => Motion::OffensiveCrouch,
        (_, _) => Motion::DefensiveCrouch,
    };
    TransAction::Motion(motion)
}
