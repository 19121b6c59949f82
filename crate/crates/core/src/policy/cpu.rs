use alloc::vec;
use alloc::vec::Vec;
use core::ops::RangeInclusive;


use super::Policy;
use crate::engine::observe::SymbolicObs;
use crate::engine::rules::move_spec;
use crate::engine::special::HitClass;
use crate::engine::state::Phase;
use crate::engine::{EngineConfig, Motion, TransAction};
use crate::error::{Error, Result};
use crate::num::{q, to_f64, Q};

pub const CPU_LEVELS: RangeInclusive<u8> = 1..=8;

/// Behaviour parameters of a CPU level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpuParams {
    pub reaction_prob: Q,
    pub aggression: Q,
    pub special_prob: Q,
    pub block_prob: Q,
}

impl CpuParams {
    pub fn for_level(level: u8) -> Result<CpuParams> {
        if !CPU_LEVELS.contains(&level) {
            return Err(Error::CpuLevel(level));
        }
        let l = level as i64;
        Ok(CpuParams {
            reaction_prob: q(1 + l, 10),
            aggression: q(30 + 7 * l, 100),
            special_prob: q(l, 20),
            block_prob: q(l, 10),
        })
    }

    pub fn as_array(&self) -> [&Q; 4] {
        [&self.reaction_prob, &self.aggression, &self.special_prob, &self.block_prob]
    }
}

/// Scripted opponent. Each step it reacts to the opponent's phase with
/// probability `reaction_prob` (guarding against an attack about to land,
/// punishing an exposed opponent), otherwise closes in and attacks with
/// probability `aggression`, otherwise plays a random motion.
#[derive(Debug, Clone)]
pub struct ScriptedCpu {
    pub level: u8,
    pub params: CpuParams,
    config: EngineConfig,
    actions: Vec<TransAction>,
}

pub fn cpu_policy(level: u8, config: &EngineConfig) -> Result<ScriptedCpu> {
    Ok(ScriptedCpu {
        level,
        params: CpuParams::for_level(level)?,
        config: config.clone(),
        actions: config.legal_actions(),
    })
}

/// Arithmetic the script needs, so it can run exactly or in floating point.
trait Weight: Clone + PartialEq {
    fn ratio(n: i64, d: i64) -> Self;
    fn from_q(v: &Q) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
}

impl Weight for Q {
    fn ratio(n: i64, d: i64) -> Self {
        q(n, d)
    }
    fn from_q(v: &Q) -> Self {
        v.clone()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
}

impl Weight for f64 {
    fn ratio(n: i64, d: i64) -> Self {
        n as f64 / d as f64
    }
    fn from_q(v: &Q) -> Self {
        to_f64(v)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
}

fn uniform_over<W: Weight>(n: usize, idx: &[usize]) -> Vec<W> {
    let mut d = vec![W::ratio(0, 1); n];
    for &i in idx {
        d[i] = W::ratio(1, idx.len() as i64);
    }
    d
}

fn add_scaled<W: Weight>(acc: &mut [W], d: &[W], w: &W) {
    if *w == W::ratio(0, 1) {
        return;
    }
    for (a, x) in acc.iter_mut().zip(d) {
        *a = a.plus(&x.times(w));
    }
}

impl ScriptedCpu {
    fn find(&self, a: TransAction) -> Option<usize> {
        self.actions.iter().position(|&x| x == a)
    }

    fn all(&self) -> Vec<usize> {
        (0..self.actions.len()).collect()
    }

    fn motions(&self) -> Vec<usize> {
        let m: Vec<usize> = (0..self.actions.len()).filter(|&i| matches!(self.actions[i], TransAction::Motion(_))).collect();
        if m.is_empty() {
            self.all()
        } else {
            m
        }
    }

    /// Standard attacks and hard-coded specials that reach `dist`.
    fn in_range(&self, dist: u8) -> (Vec<usize>, Vec<usize>) {
        let mut attacks = Vec::new();
        let mut specials = Vec::new();
        for (i, a) in self.actions.iter().enumerate() {
            match *a {
                TransAction::Attack(k) => {
                    if self.config.damage_table.get(k).range >= dist {
                        attacks.push(i);
                    }
                }
                TransAction::Special(id) => {
                    let spec = self.config.specials.moves[id as usize].spec;
                    if spec.class == HitClass::Projectile || spec.range >= dist {
                        specials.push(i);
                    }
                }
                _ => {}
            }
        }
        (attacks, specials)
    }

    fn approach<W: Weight>(&self) -> Vec<W> {
        let n = self.actions.len();
        match self.find(TransAction::Motion(Motion::Forward)) {
            Some(i) => uniform_over(n, &[i]),
            None => uniform_over(n, &self.motions()),
        }
    }

    fn aggressive<W: Weight>(&self, dist: u8) -> Vec<W> {
        let n = self.actions.len();
        let (attacks, specials) = self.in_range(dist);
        match (attacks.is_empty(), specials.is_empty()) {
            (true, true) => self.approach(),
            (false, true) => uniform_over(n, &attacks),
            (true, false) => uniform_over(n, &specials),
            (false, false) => {
                let sp = W::from_q(&self.params.special_prob);
                let mut d = vec![W::ratio(0, 1); n];
                add_scaled(&mut d, &uniform_over(n, &specials), &sp);
                add_scaled(&mut d, &uniform_over(n, &attacks), &W::ratio(1, 1).minus(&sp));
                d
            }
        }
    }

    fn reactive<W: Weight>(&self, obs: &SymbolicObs, dist: u8) -> Vec<W> {
        let n = self.actions.len();
        let opp = &obs.opp_phase;
        let threat = match (opp.phase, opp.pending) {
            (Phase::Startup, Some(m)) if opp.frames == 1 => {
                let spec = move_spec(&self.config, m);
                spec.class == HitClass::Projectile || spec.range >= dist
            }
            _ => false,
        } || obs.nearest_projectile_offset.is_some_and(|d| d <= 2);
        let exposed = matches!(opp.phase, Phase::Active | Phase::Recovery | Phase::Hitstun | Phase::Blockstun);
        if threat {
            let guard = self.find(TransAction::Motion(Motion::Defense));
            let bp = W::from_q(&self.params.block_prob);
            let mut d = vec![W::ratio(0, 1); n];
            match guard {
                Some(g) => {
                    d[g] = bp.clone();
                    add_scaled(&mut d, &self.aggressive(dist), &W::ratio(1, 1).minus(&bp));
                }
                None => d = self.aggressive(dist),
            }
            d
        } else if exposed {
            let (attacks, _) = self.in_range(dist);
            if attacks.is_empty() {
                self.aggressive(dist)
            } else {
                uniform_over(n, &attacks)
            }
        } else {
            self.aggressive(dist)
        }
    }

    fn mix<W: Weight>(&self, obs: &SymbolicObs) -> Vec<W> {
        let n = self.actions.len();
        if !obs.own_phase.phase.actionable() {
            return uniform_over(n, &[0]);
        }
        let dist = obs.opp_pos.saturating_sub(obs.own_pos);
        let reaction = W::from_q(&self.params.reaction_prob);
        let aggression = W::from_q(&self.params.aggression);
        let one = W::ratio(1, 1);
        let rest = one.minus(&reaction);
        let mut d = vec![W::ratio(0, 1); n];
        add_scaled(&mut d, &self.reactive(obs, dist), &reaction);
        add_scaled(&mut d, &self.aggressive(dist), &rest.times(&aggression));
        add_scaled(&mut d, &uniform_over(n, &self.motions()), &rest.times(&one.minus(&aggression)));
        d
    }

    /// Exact action distribution at `obs`.
    pub fn distribution(&self, obs: &SymbolicObs) -> Vec<Q> {
        self.mix(obs)
    }
}

impl Policy<SymbolicObs> for ScriptedCpu {
    fn num_actions(&self) -> usize {
        self.actions.len()
    }

    fn probs(&self, obs: &SymbolicObs) -> Vec<f64> {
        self.mix(obs)
    }

    fn exact_probs(&self, obs: &SymbolicObs) -> Vec<Q> {
        self.distribution(obs)
    }
}
