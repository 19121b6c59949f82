use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::HashSet;
use rustc_hash::FxBuildHasher;

use super::config::EngineConfig;
use super::rules::advance;
use super::state::{FighterState, GameState, PendingMove, Phase};
use crate::error::{Error, Result};
use crate::game::{ObsKey, Side};

/// Default cap on the number of states visited by [`enumerate_observations`].
pub const ENUMERATION_CAP: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObsMode {
    Symbolic,
    Grid,
}

impl ObsMode {
    pub fn parse(s: &str) -> Option<ObsMode> {
        match s {
            "symbolic" => Some(ObsMode::Symbolic),
            "grid" => Some(ObsMode::Grid),
            _ => None,
        }
    }
}

/// Visible part of a fighter's phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhaseView {
    pub phase: Phase,
    pub frames: u8,
    pub pending: Option<PendingMove>,
}

impl PhaseView {
    fn of(f: &FighterState) -> PhaseView {
        PhaseView { phase: f.phase, frames: f.phase_frames, pending: f.pending }
    }

    fn key(&self) -> String {
        format!(
            "{}:{}:{}",
            self.phase.name(),
            self.frames,
            self.pending.map(|p| p.name()).unwrap_or_else(|| String::from("-"))
        )
    }

    fn parse(s: &str) -> Option<PhaseView> {
        let mut it = s.split(':');
        let phase = Phase::parse(it.next()?)?;
        let frames = it.next()?.parse().ok()?;
        let pending = match it.next()? {
            "-" => None,
            p => Some(PendingMove::parse(p)?),
        };
        it.next().is_none().then_some(PhaseView { phase, frames, pending })
    }
}

/// Side-relative symbolic observation. Positions are reflected for the right
/// side so both viewpoints see themselves on the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolicObs {
    pub own_pos: u8,
    pub opp_pos: u8,
    pub own_hp_bucket: u16,
    pub opp_hp_bucket: u16,
    pub own_phase: PhaseView,
    pub opp_phase: PhaseView,
    pub timer_bucket: u16,
    /// Distance to the nearest projectile fired by the opponent.
    pub nearest_projectile_offset: Option<u8>,
}

impl ObsKey for SymbolicObs {
    fn key(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.own_pos,
            self.opp_pos,
            self.own_hp_bucket,
            self.opp_hp_bucket,
            self.own_phase.key(),
            self.opp_phase.key(),
            self.timer_bucket,
            self.nearest_projectile_offset.map(|d| format!("{d}")).unwrap_or_else(|| String::from("-"))
        )
    }

    fn parse_key(key: &str) -> Option<Self> {
        let parts: Vec<&str> = key.split(',').collect();
        if parts.len() != 8 {
            return None;
        }
        Some(SymbolicObs {
            own_pos: parts[0].parse().ok()?,
            opp_pos: parts[1].parse().ok()?,
            own_hp_bucket: parts[2].parse().ok()?,
            opp_hp_bucket: parts[3].parse().ok()?,
            own_phase: PhaseView::parse(parts[4])?,
            opp_phase: PhaseView::parse(parts[5])?,
            timer_bucket: parts[6].parse().ok()?,
            nearest_projectile_offset: match parts[7] {
                "-" => None,
                d => Some(d.parse().ok()?),
            },
        })
    }
}

/// Absolute text render: row 0 holds the fighters, row 1 projectiles, row 2
/// the two HP bars growing inward from the walls.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridObs {
    pub width: u8,
    pub cells: Vec<u8>,
}

impl GridObs {
    pub const ROWS: usize = 3;

    pub fn row(&self, r: usize) -> &[u8] {
        let w = self.width as usize;
        &self.cells[r * w..(r + 1) * w]
    }

    pub fn row_text(&self, r: usize) -> String {
        self.row(r).iter().map(|&c| c as char).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Observation {
    Symbolic(SymbolicObs),
    Grid(GridObs),
}

/// `value` in `[0, max]` mapped onto `n` equal buckets.
pub fn bucket(value: u16, max: u16, n: u16) -> u16 {
    ((value as u32 * n as u32) / (max as u32 + 1)) as u16
}

pub fn observe_symbolic(state: &GameState, side: Side, config: &EngineConfig) -> SymbolicObs {
    let w = config.arena_width;
    let own = state.fighter(side);
    let opp = state.fighter(side.opponent());
    let rel = |p: u8| if side == Side::Left { p } else { w - 1 - p };
    let nearest = state
        .projectiles
        .iter()
        .filter(|p| p.owner != side)
        .map(|p| p.pos.abs_diff(own.pos))
        .min();
    SymbolicObs {
        own_pos: rel(own.pos),
        opp_pos: rel(opp.pos),
        own_hp_bucket: bucket(own.hp, config.max_hp, config.hp_buckets),
        opp_hp_bucket: bucket(opp.hp, config.max_hp, config.hp_buckets),
        own_phase: PhaseView::of(own),
        opp_phase: PhaseView::of(opp),
        timer_bucket: bucket(state.timer, config.horizon, config.timer_buckets),
        nearest_projectile_offset: nearest,
    }
}

pub fn render_grid(state: &GameState, config: &EngineConfig) -> GridObs {
    let w = config.arena_width as usize;
    let mut cells = alloc::vec![b'.'; w * GridObs::ROWS];
    cells[state.fighters[0].pos as usize] = b'L';
    cells[state.fighters[1].pos as usize] = b'R';
    for p in &state.projectiles {
        let c = &mut cells[w + p.pos as usize];
        *c = if *c != b'.' {
            b'*'
        } else if p.dir > 0 {
            b'>'
        } else {
            b'<'
        };
    }
    let half = w / 2;
    let bar = |hp: u16| (hp as usize * half).div_ceil(config.max_hp as usize);
    for i in 0..bar(state.fighters[0].hp) {
        cells[2 * w + i] = b'=';
    }
    for i in 0..bar(state.fighters[1].hp) {
        cells[3 * w - 1 - i] = b'=';
    }
    GridObs { width: config.arena_width, cells }
}

pub fn observe(state: &GameState, side: Side, mode: ObsMode, config: &EngineConfig) -> Observation {
    match mode {
        ObsMode::Symbolic => Observation::Symbolic(observe_symbolic(state, side, config)),
        ObsMode::Grid => Observation::Grid(render_grid(state, config)),
    }
}

/// Every symbolic observation (from either side) of every state reachable
/// under the legal action set, sorted.
pub fn enumerate_observations(config: &EngineConfig, mode: ObsMode) -> Result<Vec<SymbolicObs>> {
    enumerate_observations_capped(config, mode, ENUMERATION_CAP)
}

pub fn enumerate_observations_capped(config: &EngineConfig, mode: ObsMode, cap: usize) -> Result<Vec<SymbolicObs>> {
    if mode != ObsMode::Symbolic {
        return Err(Error::UnsupportedMode(String::from("grid observations cannot be enumerated")));
    }
    let start = GameState::reset(config)?;
    let actions = config.legal_actions();
    let mut seen: HashSet<GameState, FxBuildHasher> = HashSet::default();
    let mut obs: HashSet<SymbolicObs, FxBuildHasher> = HashSet::default();
    let mut queue = VecDeque::new();
    seen.insert(start.clone());
    queue.push_back(start);
    while let Some(s) = queue.pop_front() {
        for side in Side::BOTH {
            obs.insert(observe_symbolic(&s, side, config));
        }
        if s.terminal {
            continue;
        }
        for &a in &actions {
            for &b in &actions {
                let n = advance(&s, a, b, config)?;
                if !seen.contains(&n) {
                    if seen.len() >= cap {
                        return Err(Error::Capacity { size: seen.len() + 1, cap });
                    }
                    seen.insert(n.clone());
                    queue.push_back(n);
                }
            }
        }
    }
    let mut out: Vec<SymbolicObs> = obs.into_iter().collect();
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_hp_bucket() {
        assert_eq!(bucket(100, 100, 8), 7);
        assert_eq!(bucket(0, 100, 8), 0);
        assert_eq!(bucket(12, 100, 8), 0);
        assert_eq!(bucket(13, 100, 8), 1);
        let cfg = EngineConfig::default();
        let s = GameState::reset(&cfg).unwrap();
        let o = observe_symbolic(&s, Side::Left, &cfg);
        assert_eq!((o.own_hp_bucket, o.opp_hp_bucket), (7, 7));
    }

    #[test]
    fn grid_shape() {
        let cfg = EngineConfig::default();
        let s = GameState::reset(&cfg).unwrap();
        let Observation::Grid(g) = observe(&s, Side::Left, ObsMode::Grid, &cfg) else { panic!() };
        assert_eq!(g.cells.len(), 13 * 3);
        assert_eq!(g.row_text(0), "...L.....R...");
        assert_eq!(g.row_text(2), "======.======");
    }

    #[test]
    fn mirrored_views_agree() {
        let cfg = EngineConfig::default();
        let mut s = GameState::reset(&cfg).unwrap();
        s.fighters[0].pos = 1;
        s.fighters[1].hp = 40;
        let m = s.mirror(&cfg);
        assert_eq!(observe_symbolic(&s, Side::Left, &cfg), observe_symbolic(&m, Side::Right, &cfg));
        assert_eq!(observe_symbolic(&s, Side::Right, &cfg), observe_symbolic(&m, Side::Left, &cfg));
    }

    #[test]
    fn keys_round_trip() {
        let cfg = EngineConfig::default();
        let mut s = GameState::reset(&cfg).unwrap();
        s.fighters[1].phase = Phase::Startup;
        s.fighters[1].phase_frames = 2;
        s.fighters[1].pending = Some(PendingMove::Special(2));
        for side in Side::BOTH {
            let o = observe_symbolic(&s, side, &cfg);
            assert_eq!(SymbolicObs::parse_key(&o.key()), Some(o));
        }
        assert_eq!(SymbolicObs::parse_key("1,2,3"), None);
    }

    #[test]
    fn grid_cannot_be_enumerated() {
        let cfg = EngineConfig::default();
        assert!(matches!(enumerate_observations(&cfg, ObsMode::Grid), Err(Error::UnsupportedMode(_))));
    }
}
