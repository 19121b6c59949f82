//! One simultaneous step of MiniBrawl.
//!
//! Order of resolution: special decoding, phase bookkeeping, movement (retreats
//! first, then advances shared symmetrically over the gap), melee hits,
//! projectiles, then damage, stun, timer and the terminal check.

use num_rational::Rational64;

use super::action::{AttackKind, Motion, TransAction};
use super::config::EngineConfig;
use super::reward::dense_reward;
use super::special::{match_special, HitClass, MoveSpec};
use super::state::{GameState, PendingMove, Phase, Projectile};
use crate::error::{Error, Result};
use crate::game::{Outcome, Side};
use crate::seed::splitmix64;

pub const PROJECTILE_HITSTUN: u8 = 2;
pub const PROJECTILE_BLOCKSTUN: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepResult {
    pub state: GameState,
    pub sparse: [i32; 2],
    pub dense: [Rational64; 2],
    pub terminal: bool,
}

/// What a fighter does during the step being resolved.
#[derive(Debug, Clone, Copy, Default)]
struct Conduct {
    crouching: bool,
    blocking: bool,
    standing_guard: bool,
    airborne: bool,
    invulnerable: bool,
    /// Cells moved toward the opponent (negative = retreat).
    displacement: i32,
    strike: Option<(PendingMove, MoveSpec)>,
    next_phase: Option<(Phase, u8)>,
    next_pending: Option<PendingMove>,
}

pub fn move_spec(config: &EngineConfig, m: PendingMove) -> MoveSpec {
    match m {
        PendingMove::Attack(k) => config.attack_spec(k),
        PendingMove::Special(id) => config.specials.moves[id as usize].spec,
    }
}

fn after_active(spec: &MoveSpec) -> (Phase, u8) {
    if spec.recovery == 0 {
        (Phase::Neutral, 0)
    } else {
        (Phase::Active, spec.recovery)
    }
}

fn count_down(phase: Phase, frames: u8) -> (Phase, u8) {
    if frames <= 1 {
        (Phase::Neutral, 0)
    } else {
        (phase, frames - 1)
    }
}

fn start_move(config: &EngineConfig, m: PendingMove, c: &mut Conduct) {
    let spec = move_spec(config, m);
    c.invulnerable = spec.invulnerable_startup;
    if spec.startup == 0 {
        c.strike = Some((m, spec));
        c.next_phase = Some(after_active(&spec));
    } else {
        c.next_phase = Some((Phase::Startup, spec.startup));
        c.next_pending = Some(m);
    }
}

/// Decides the fighter's conduct for this step and updates its input buffer.
fn conduct(state: &mut GameState, side: Side, action: TransAction, config: &EngineConfig) -> Conduct {
    let f = &mut state.fighters[side.index()];
    let mut c = Conduct::default();
    if f.phase.actionable() {
        let mut action = action;
        if config.special_moves_enabled {
            let decoded = match action {
                TransAction::Attack(_) => match_special(&config.specials, &f.input_buffer, action),
                _ => None,
            };
            match decoded {
                Some(id) => {
                    f.input_buffer.clear();
                    action = TransAction::Special(id);
                }
                None => f.push_input(action),
            }
        }
        match action {
            TransAction::Noop => {
                c.crouching = f.phase == Phase::Crouching;
                c.next_phase = Some((f.phase, 0));
            }
            TransAction::Motion(m) => {
                c.crouching = m.is_crouch();
                c.blocking = m.is_block();
                c.standing_guard = m == Motion::Defense;
                c.airborne = m.is_aerial();
                c.displacement = m.displacement();
                c.next_phase = Some(if m.is_aerial() {
                    (Phase::Airborne, 1)
                } else if m.is_crouch() {
                    (Phase::Crouching, 0)
                } else {
                    (Phase::Neutral, 0)
                });
            }
            TransAction::Attack(k) => start_move(config, PendingMove::Attack(k), &mut c),
            TransAction::Special(id) => start_move(config, PendingMove::Special(id), &mut c),
        }
        return c;
    }
    let frames = f.phase_frames;
    match f.phase {
        Phase::Startup => {
            let m = f.pending.expect("startup without a pending move");
            let spec = move_spec(config, m);
            c.invulnerable = spec.invulnerable_startup;
            if frames <= 1 {
                c.strike = Some((m, spec));
                c.next_phase = Some(after_active(&spec));
            } else {
                c.next_phase = Some((Phase::Startup, frames - 1));
                c.next_pending = Some(m);
            }
        }
        Phase::Active | Phase::Recovery => c.next_phase = Some(count_down(Phase::Recovery, frames)),
        Phase::Hitstun => c.next_phase = Some(count_down(Phase::Hitstun, frames)),
        Phase::Blockstun => {
            c.blocking = true;
            c.next_phase = Some(count_down(Phase::Blockstun, frames));
        }
        Phase::Airborne => {
            c.airborne = true;
            c.next_phase = Some(count_down(Phase::Airborne, frames));
        }
        Phase::Neutral | Phase::Crouching => unreachable!(),
    }
    c
}

/// Splits the free cells `gap` between two advancing fighters. A fighter
/// asking for at most half the gap always gets its full request.
pub fn allocate_advance(gap: i32, a: i32, b: i32) -> (i32, i32) {
    if a + b <= gap {
        (a, b)
    } else if 2 * a <= gap {
        (a, gap - a)
    } else if 2 * b <= gap {
        (gap - b, b)
    } else {
        (gap / 2, gap / 2)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Impact {
    damage: u32,
    hitstun: u8,
    blockstun: u8,
}

impl Impact {
    fn hit(&mut self, damage: u16, stun: u8) {
        self.damage += damage as u32;
        self.hitstun = self.hitstun.max(stun);
    }

    fn block(&mut self, damage: u16, stun: u8) {
        self.damage += damage as u32;
        self.blockstun = self.blockstun.max(stun);
    }
}

fn chip(config: &EngineConfig, damage: u16) -> u16 {
    let v = Rational64::from_integer(damage as i64) * config.chip_fraction;
    v.floor().to_integer() as u16
}

/// Advances `state` by one step without computing rewards.
pub fn advance(state: &GameState, a_left: TransAction, a_right: TransAction, config: &EngineConfig) -> Result<GameState> {
    if state.terminal {
        return Err(Error::TerminalStep);
    }
    config.check_action(a_left)?;
    config.check_action(a_right)?;
    let mut next = state.clone();
    let conducts = [conduct(&mut next, Side::Left, a_left, config), conduct(&mut next, Side::Right, a_right, config)];

    // Movement: retreats clamp at the walls, then advances share the gap.
    let w = config.arena_width as i32;
    let mut lp = next.fighters[0].pos as i32;
    let mut rp = next.fighters[1].pos as i32;
    let (dl, dr) = (conducts[0].displacement, conducts[1].displacement);
    if dl < 0 {
        lp = (lp + dl).max(0);
    }
    if dr < 0 {
        rp = (rp - dr).min(w - 1);
    }
    let (al, ar) = allocate_advance(rp - lp - 1, dl.max(0), dr.max(0));
    lp += al;
    rp -= ar;
    next.fighters[0].pos = lp as u8;
    next.fighters[1].pos = rp as u8;
    let dist = rp - lp;

    let mut impact = [Impact::default(); 2];
    let mut spawned: [Option<Projectile>; 2] = [None, None];
    for side in Side::BOTH {
        let (i, j) = (side.index(), side.opponent().index());
        let Some((m, spec)) = conducts[i].strike else { continue };
        let toward: i32 = if side == Side::Left { 1 } else { -1 };
        if spec.class == HitClass::Projectile {
            let pos = if side == Side::Left { lp + toward } else { rp + toward };
            spawned[i] = Some(Projectile { pos: pos as u8, dir: toward as i8, owner: side, damage: spec.damage });
            continue;
        }
        let target = &conducts[j];
        let avoided = target.invulnerable
            || (target.crouching && spec.class == HitClass::Punch)
            || (target.airborne && spec.class == HitClass::Kick);
        if dist > spec.range as i32 || avoided {
            continue;
        }
        let throw = m == PendingMove::Attack(AttackKind::MediumPunch)
            && dist <= config.close_range as i32
            && target.standing_guard;
        if target.blocking && !throw {
            impact[j].block(chip(config, spec.damage), spec.blockstun());
        } else {
            impact[j].hit(spec.damage, spec.hitstun());
        }
    }

    // Projectiles: advance, spawn, annihilate opposing pairs, then hit.
    let mut flying: alloc::vec::Vec<(i32, Projectile)> =
        next.projectiles.iter().map(|p| (p.pos as i32 + p.dir as i32, *p)).collect();
    flying.extend(spawned.iter().flatten().map(|p| (p.pos as i32, *p)));
    let mut alive = alloc::vec![true; flying.len()];
    for a in 0..flying.len() {
        for b in 0..flying.len() {
            if flying[a].1.dir > 0 && flying[b].1.dir < 0 && flying[a].0 >= flying[b].0 {
                alive[a] = false;
                alive[b] = false;
            }
        }
    }
    let mut projectiles = alloc::vec::Vec::new();
    for (k, (pos, p)) in flying.into_iter().enumerate() {
        if !alive[k] {
            continue;
        }
        let target = p.owner.opponent();
        let tpos = if target == Side::Left { lp } else { rp };
        let reached = if p.dir > 0 { pos >= tpos } else { pos <= tpos };
        if reached {
            let c = &conducts[target.index()];
            if c.airborne || c.invulnerable {
                continue;
            }
            if c.blocking {
                impact[target.index()].block(chip(config, p.damage), PROJECTILE_BLOCKSTUN);
            } else {
                impact[target.index()].hit(p.damage, PROJECTILE_HITSTUN);
            }
            continue;
        }
        if (0..w).contains(&pos) {
            projectiles.push(Projectile { pos: pos as u8, ..p });
        }
    }
    projectiles.sort_unstable();
    next.projectiles = projectiles;

    for side in Side::BOTH {
        let i = side.index();
        let f = &mut next.fighters[i];
        let c = &conducts[i];
        let (phase, frames) = c.next_phase.expect("conduct decides the next phase");
        f.phase = phase;
        f.phase_frames = frames;
        f.pending = c.next_pending;
        let imp = impact[i];
        f.hp = f.hp.saturating_sub(imp.damage.min(u16::MAX as u32) as u16);
        if imp.hitstun > 0 {
            f.phase = Phase::Hitstun;
            f.phase_frames = imp.hitstun;
            f.pending = None;
        } else if imp.blockstun > 0 {
            f.phase = Phase::Blockstun;
            f.phase_frames = imp.blockstun;
            f.pending = None;
        }
    }

    next.timer -= 1;
    next.rng_state = splitmix64(next.rng_state);
    let (hl, hr) = (next.fighters[0].hp, next.fighters[1].hp);
    if next.timer == 0 || hl == 0 || hr == 0 {
        next.terminal = true;
        next.winner = Some(match hl.cmp(&hr) {
            core::cmp::Ordering::Greater => Outcome::LeftWins,
            core::cmp::Ordering::Less => Outcome::RightWins,
            core::cmp::Ordering::Equal => Outcome::Draw,
        });
    }
    Ok(next)
}

/// Advances one step and reports sparse and dense rewards for both sides.
pub fn step(state: &GameState, a_left: TransAction, a_right: TransAction, config: &EngineConfig) -> Result<StepResult> {
    let next = advance(state, a_left, a_right, config)?;
    let sparse = match next.winner {
        Some(o) if next.terminal => [o.sparse(Side::Left), o.sparse(Side::Right)],
        _ => [0, 0],
    };
    let dense = [
        dense_reward(state, &next, Side::Left, config),
        dense_reward(state, &next, Side::Right, config),
    ];
    let terminal = next.terminal;
    Ok(StepResult { state: next, sparse, dense, terminal })
}
