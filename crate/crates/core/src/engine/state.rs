use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use arrayvec::ArrayVec;

use super::action::{AttackKind, Facing, TransAction};
use super::config::EngineConfig;
use crate::error::Result;
use crate::game::{Outcome, Side};
use crate::seed::splitmix64;

pub const BUFFER_LEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Neutral,
    Startup,
    Active,
    Recovery,
    Hitstun,
    Blockstun,
    Airborne,
    Crouching,
}

impl Phase {
    pub const ALL: [Phase; 8] = [
        Phase::Neutral,
        Phase::Startup,
        Phase::Active,
        Phase::Recovery,
        Phase::Hitstun,
        Phase::Blockstun,
        Phase::Airborne,
        Phase::Crouching,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Neutral => "neutral",
            Phase::Startup => "startup",
            Phase::Active => "active",
            Phase::Recovery => "recovery",
            Phase::Hitstun => "hitstun",
            Phase::Blockstun => "blockstun",
            Phase::Airborne => "airborne",
            Phase::Crouching => "crouching",
        }
    }

    pub fn parse(s: &str) -> Option<Phase> {
        Phase::ALL.iter().copied().find(|p| p.name() == s)
    }

    /// Whether a fighter in this phase accepts a new action.
    pub fn actionable(self) -> bool {
        matches!(self, Phase::Neutral | Phase::Crouching)
    }
}

/// Attack or special move waiting out its startup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PendingMove {
    Attack(AttackKind),
    Special(u8),
}

impl PendingMove {
    pub fn name(self) -> String {
        match self {
            PendingMove::Attack(a) => String::from(a.name()),
            PendingMove::Special(id) => alloc::format!("special_{id}"),
        }
    }

    pub fn parse(s: &str) -> Option<PendingMove> {
        match TransAction::parse(s)? {
            TransAction::Attack(a) => Some(PendingMove::Attack(a)),
            TransAction::Special(id) => Some(PendingMove::Special(id)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FighterState {
    pub pos: u8,
    pub hp: u16,
    pub phase: Phase,
    /// Steps left in the current phase. For `Startup` this counts down to the
    /// active step; neutral and crouching postures keep 0.
    pub phase_frames: u8,
    pub pending: Option<PendingMove>,
    pub facing: Facing,
    pub input_buffer: ArrayVec<TransAction, BUFFER_LEN>,
}

impl FighterState {
    pub fn new(pos: u8, hp: u16, facing: Facing) -> Self {
        FighterState {
            pos,
            hp,
            phase: Phase::Neutral,
            phase_frames: 0,
            pending: None,
            facing,
            input_buffer: ArrayVec::new(),
        }
    }

    pub fn push_input(&mut self, a: TransAction) {
        if self.input_buffer.is_full() {
            self.input_buffer.remove(0);
        }
        self.input_buffer.push(a);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Projectile {
    pub pos: u8,
    /// +1 travels toward higher cells, -1 toward lower cells.
    pub dir: i8,
    pub owner: Side,
    pub damage: u16,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GameState {
    pub fighters: [FighterState; 2],
    pub timer: u16,
    /// Kept sorted so equal positions hash equally.
    pub projectiles: Vec<Projectile>,
    pub terminal: bool,
    pub winner: Option<Outcome>,
    pub rng_state: u64,
}

impl GameState {
    pub fn reset(config: &EngineConfig) -> Result<GameState> {
        config.validate()?;
        let (l, r) = config.start_positions();
        Ok(GameState {
            fighters: [
                FighterState::new(l, config.max_hp, Facing::Right),
                FighterState::new(r, config.max_hp, Facing::Left),
            ],
            timer: config.horizon,
            projectiles: Vec::new(),
            terminal: false,
            winner: None,
            rng_state: splitmix64(config.seed),
        })
    }

    pub fn fighter(&self, side: Side) -> &FighterState {
        &self.fighters[side.index()]
    }

    /// Mirror image: sides swapped and positions reflected.
    pub fn mirror(&self, config: &EngineConfig) -> GameState {
        let w = config.arena_width;
        let flip = |f: &FighterState| FighterState {
            pos: w - 1 - f.pos,
            facing: f.facing.flip(),
            ..f.clone()
        };
        let mut projectiles: Vec<Projectile> = self
            .projectiles
            .iter()
            .map(|p| Projectile { pos: w - 1 - p.pos, dir: -p.dir, owner: p.owner.opponent(), damage: p.damage })
            .collect();
        projectiles.sort_unstable();
        GameState {
            fighters: [flip(&self.fighters[1]), flip(&self.fighters[0])],
            timer: self.timer,
            projectiles,
            terminal: self.terminal,
            winner: self.winner.map(|o| Outcome::from_winner(o.winner().map(Side::opponent))),
            rng_state: self.rng_state,
        }
    }

    /// Canonical text serialization, used for digests and replays.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        for (side, f) in Side::BOTH.iter().zip(&self.fighters) {
            let _ = write!(
                s,
                "{} pos={} hp={} phase={} frames={} pending={} facing={} buffer=",
                side.name(),
                f.pos,
                f.hp,
                f.phase.name(),
                f.phase_frames,
                f.pending.map(|p| p.name()).unwrap_or_else(|| String::from("-")),
                match f.facing {
                    Facing::Left => "left",
                    Facing::Right => "right",
                },
            );
            let names: Vec<String> = f.input_buffer.iter().map(|a| a.name()).collect();
            s.push_str(&names.join(","));
            s.push('\n');
        }
        let _ = write!(s, "timer={} projectiles=", self.timer);
        for (i, p) in self.projectiles.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{}:{}:{}:{}", p.pos, p.dir, p.owner.name(), p.damage);
        }
        let _ = writeln!(
            s,
            " terminal={} winner={} rng={:016x}",
            self.terminal,
            self.winner.map(|o| o.name()).unwrap_or("-"),
            self.rng_state
        );
        s
    }

    /// Checks the structural invariants against `config`.
    pub fn check_invariants(&self, config: &EngineConfig) -> core::result::Result<(), String> {
        let w = config.arena_width;
        for f in &self.fighters {
            if f.pos >= w {
                return Err(alloc::format!("fighter outside arena at {}", f.pos));
            }
            if f.hp > config.max_hp {
                return Err(alloc::format!("hp {} above max", f.hp));
            }
            if f.phase.actionable() && f.phase_frames != 0 {
                return Err(alloc::format!("{} with {} frames", f.phase.name(), f.phase_frames));
            }
            if !f.phase.actionable() && f.phase_frames == 0 && !self.terminal {
                return Err(alloc::format!("{} with 0 frames", f.phase.name()));
            }
        }
        if self.fighters[0].pos >= self.fighters[1].pos {
            return Err(String::from("fighters overlap or crossed"));
        }
        if self.timer > config.horizon {
            return Err(String::from("timer above horizon"));
        }
        let ko = self.fighters.iter().any(|f| f.hp == 0);
        if self.terminal != (self.timer == 0 || ko) {
            return Err(String::from("terminal flag inconsistent"));
        }
        if self.projectiles.iter().any(|p| p.pos >= w) {
            return Err(String::from("projectile outside arena"));
        }
        Ok(())
    }
}
