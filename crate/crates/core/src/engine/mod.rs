//! MiniBrawl: a deterministic two-fighter game on a one-dimensional arena.
//!
//! Every rule works on integers; rewards are exact rationals.

pub mod action;
pub mod config;
pub mod minibrawl;
pub mod observe;
pub mod reward;
pub mod rules;
pub mod special;
pub mod state;

pub use action::{encode_action, AttackKind, Facing, HumanAction, Motion, TransAction};
pub use config::{parse_actions, parse_damage_table, parse_rational, AttackData, DamageTable, EngineConfig};
pub use minibrawl::MiniBrawl;
pub use observe::{enumerate_observations, observe, observe_symbolic, render_grid, GridObs, ObsMode, Observation, PhaseView, SymbolicObs};
pub use reward::dense_reward;
pub use rules::{advance, step, StepResult};
pub use special::{match_special, HitClass, MoveSpec, SeqItem, SpecialMove, SpecialTable};
pub use state::{FighterState, GameState, PendingMove, Phase, Projectile};

use crate::error::Result;

pub fn reset(config: &EngineConfig) -> Result<GameState> {
    GameState::reset(config)
}
