//! League training: per side one main agent (MA), one main exploiter (ME)
//! and two league exploiters (LE0, LE1), scheduled by self-play and
//! prioritized fictitious self-play (PFSP).

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::hash::Hash;

use num_traits::{One, Signed, Zero};

use super::nash::solve_nash;
use super::payoff::{Member, PayoffMatrix, PayoffMode};
use crate::error::{Error, Result};
use crate::game::{MarkovGame, Side};
use crate::learner::{LearnConfig, QLearner};
use crate::num::{q, sum, Q};
use crate::policy::{MetaStrategy, MixturePolicy, PolicyId, SharedPolicy};
use crate::seed::derive;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    MainAgent,
    MainExploiter,
    LeagueExploiter(u8),
}

impl Role {
    /// Training order within a cycle.
    pub const ALL: [Role; 4] = [Role::MainAgent, Role::MainExploiter, Role::LeagueExploiter(0), Role::LeagueExploiter(1)];

    pub fn name(self) -> String {
        match self {
            Role::MainAgent => String::from("MA"),
            Role::MainExploiter => String::from("ME"),
            Role::LeagueExploiter(i) => format!("LE{i}"),
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        Role::ALL.into_iter().find(|r| r.name() == s)
    }

    fn index(self) -> u64 {
        match self {
            Role::MainAgent => 0,
            Role::MainExploiter => 1,
            Role::LeagueExploiter(i) => 2 + i as u64,
        }
    }

    pub fn is_exploiter(self) -> bool {
        self != Role::MainAgent
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeagueConfig {
    pub cycles: usize,
    /// Training steps per role per cycle.
    pub br_budget: u64,
    pub learn: LearnConfig,
    pub payoff: PayoffMode,
    /// MA mixture: self-play, PFSP over all checkpoints, PFSP over exploiters.
    pub self_play: Q,
    pub pfsp_all: Q,
    pub pfsp_exploiters: Q,
    /// ME resets to the pretrained policy at or above this win rate vs MA.
    pub me_reset: Q,
    /// ME adds recent MA checkpoints below this win rate.
    pub me_struggle: Q,
    /// How many recent MA checkpoints a struggling ME trains against.
    pub recent: usize,
    pub seed: u64,
}

impl Default for LeagueConfig {
    fn default() -> Self {
        LeagueConfig {
            cycles: 3,
            br_budget: 20_000,
            learn: LearnConfig::default(),
            payoff: PayoffMode::Sampled { matches: 200 },
            self_play: q(35, 100),
            pfsp_all: q(1, 2),
            pfsp_exploiters: q(15, 100),
            me_reset: q(7, 10),
            me_struggle: q(1, 5),
            recent: 3,
            seed: 0,
        }
    }
}

impl LeagueConfig {
    pub fn validate(&self) -> Result<()> {
        if self.br_budget == 0 {
            return Err(Error::Config(String::from("br_budget must be >= 1")));
        }
        let parts = [&self.self_play, &self.pfsp_all, &self.pfsp_exploiters];
        if parts.iter().any(|p| p.is_negative()) || !(&self.self_play + &self.pfsp_all + &self.pfsp_exploiters).is_one() {
            return Err(Error::Config(String::from("main-agent mixture weights must be nonnegative and sum to 1")));
        }
        for t in [&self.me_reset, &self.me_struggle] {
            if t.is_negative() || *t > Q::one() {
                return Err(Error::Config(format!("threshold {t} outside [0, 1]")));
            }
        }
        self.learn.validate()
    }
}

pub struct LeagueAgent<O: Eq + Hash> {
    pub role: Role,
    pub side: Side,
    pub learner: QLearner<O>,
    /// Policy currently being trained, named by its step count.
    pub current: Member<O>,
    pub checkpoints: Vec<Member<O>>,
    /// Steps trained within the league, across resets.
    pub trained_steps: u64,
    pub resets: u32,
}

pub struct LeagueRoster<O: Eq + Hash> {
    /// Agents per side, in [`Role::ALL`] order.
    pub agents: [Vec<LeagueAgent<O>>; 2],
}

impl<O: Eq + Hash> LeagueRoster<O> {
    pub fn agent(&self, side: Side, role: Role) -> Result<&LeagueAgent<O>> {
        self.agents[side.index()].iter().find(|a| a.role == role).ok_or_else(|| Error::Role(role.name()))
    }

    fn agent_mut(&mut self, side: Side, role: Role) -> Result<&mut LeagueAgent<O>> {
        self.agents[side.index()].iter_mut().find(|a| a.role == role).ok_or_else(|| Error::Role(role.name()))
    }

    /// Checkpoints of `side` already present in the payoff matrix, filtered
    /// by role.
    fn historical(&self, side: Side, p: &PayoffMatrix, keep: impl Fn(Role) -> bool) -> Vec<Member<O>> {
        let mut out = Vec::new();
        for a in self.agents[side.index()].iter().filter(|a| keep(a.role)) {
            for m in &a.checkpoints {
                let known = match side {
                    Side::Left => p.row_index(&m.0).is_some(),
                    Side::Right => p.col_index(&m.0).is_some(),
                };
                if known {
                    out.push(m.clone());
                }
            }
        }
        out
    }
}

/// PFSP weights `(1 − p)²`, normalized; uniform when all are zero.
pub fn pfsp_weights(win_rates: &[Q]) -> Result<Vec<Q>> {
    if win_rates.is_empty() {
        return Err(Error::Empty("PFSP candidate set"));
    }
    if win_rates.iter().any(|p| p.is_negative() || *p > Q::one()) {
        return Err(Error::Invalid(String::from("win rates must lie in [0, 1]")));
    }
    let raw: Vec<Q> = win_rates.iter().map(|p| (Q::one() - p) * (Q::one() - p)).collect();
    let total = sum(&raw);
    if total.is_zero() {
        return Ok(alloc::vec![q(1, win_rates.len() as i64); win_rates.len()]);
    }
    Ok(raw.into_iter().map(|w| w / &total).collect())
}

/// Win rates of `learner`'s latest checkpoint against `candidates`; `None`
/// when the learner has no checkpoint in the matrix yet.
fn learner_win_rates<O: Eq + Hash>(
    learner: &LeagueAgent<O>,
    candidates: &[Member<O>],
    p: &PayoffMatrix,
) -> Result<Option<Vec<Q>>> {
    let Some((me, _)) = learner.checkpoints.last() else { return Ok(None) };
    let present = match learner.side {
        Side::Left => p.row_index(me).is_some(),
        Side::Right => p.col_index(me).is_some(),
    };
    if !present {
        return Ok(None);
    }
    let mut out = Vec::with_capacity(candidates.len());
    for (opp, _) in candidates {
        let w = p.win_rate_of(me, learner.side, opp).ok_or_else(|| {
            let (row, col) = match learner.side {
                Side::Left => (p.row_index(me), p.col_index(opp)),
                Side::Right => (p.row_index(opp), p.col_index(me)),
            };
            Error::UnknownPayoff { row: row.unwrap_or(usize::MAX), col: col.unwrap_or(usize::MAX) }
        })?;
        out.push(w);
    }
    Ok(Some(out))
}

fn pfsp_over<O: Eq + Hash>(learner: &LeagueAgent<O>, candidates: &[Member<O>], p: &PayoffMatrix) -> Result<Vec<Q>> {
    match learner_win_rates(learner, candidates, p)? {
        Some(rates) => pfsp_weights(&rates),
        None => Ok(alloc::vec![q(1, candidates.len() as i64); candidates.len()]),
    }
}

/// Merges duplicate ids, drops zero weights and builds the mixture.
fn build_mixture<O>(parts: Vec<(Member<O>, Q)>) -> Result<MixturePolicy<O>> {
    let mut components: Vec<Member<O>> = Vec::new();
    let mut weights: Vec<Q> = Vec::new();
    for (m, w) in parts {
        if w.is_zero() {
            continue;
        }
        match components.iter().position(|c| c.0 == m.0) {
            Some(i) => weights[i] += w,
            None => {
                components.push(m);
                weights.push(w);
            }
        }
    }
    MixturePolicy::new(components, MetaStrategy::new(weights)?)
}

/// Opponent mixture for the learner `(side, role)` this cycle.
pub fn league_step<O: Eq + Hash>(
    roster: &LeagueRoster<O>,
    side: Side,
    role: Role,
    p: &PayoffMatrix,
    cfg: &LeagueConfig,
) -> Result<MixturePolicy<O>> {
    let learner = roster.agent(side, role)?;
    let opp = side.opponent();
    let opp_ma = roster.agent(opp, Role::MainAgent)?;
    let mut parts: Vec<(Member<O>, Q)> = Vec::new();
    match role {
        Role::MainAgent => {
            let all = roster.historical(opp, p, |_| true);
            let exploiters = roster.historical(opp, p, Role::is_exploiter);
            let mut self_share = cfg.self_play.clone();
            for (set, share) in [(&all, &cfg.pfsp_all), (&exploiters, &cfg.pfsp_exploiters)] {
                if set.is_empty() {
                    self_share += share;
                    continue;
                }
                for (m, w) in set.iter().zip(pfsp_over(learner, set, p)?) {
                    parts.push((m.clone(), w * share));
                }
            }
            parts.push((opp_ma.current.clone(), self_share));
        }
        Role::MainExploiter => {
            let rate = match (learner.checkpoints.last(), opp_ma.checkpoints.last()) {
                (Some((me, _)), Some((ma, _))) => p.win_rate_of(me, side, ma),
                _ => None,
            };
            let struggling = rate.is_some_and(|r| r < cfg.me_struggle);
            let mut set = alloc::vec![opp_ma.current.clone()];
            if struggling {
                let n = opp_ma.checkpoints.len();
                set.extend(opp_ma.checkpoints[n.saturating_sub(cfg.recent)..].iter().cloned());
            }
            let w = q(1, set.len() as i64);
            parts.extend(set.into_iter().map(|m| (m, w.clone())));
        }
        Role::LeagueExploiter(_) => {
            let all = roster.historical(opp, p, |_| true);
            if all.is_empty() {
                let current: Vec<Member<O>> = roster.agents[opp.index()].iter().map(|a| a.current.clone()).collect();
                let w = q(1, current.len() as i64);
                parts.extend(current.into_iter().map(|m| (m, w.clone())));
            } else {
                let weights = pfsp_over(learner, &all, p)?;
                parts.extend(all.into_iter().zip(weights));
            }
        }
    }
    build_mixture(parts)
}

/// Result of a league run.
pub struct LeagueRun<O: Eq + Hash> {
    pub roster: LeagueRoster<O>,
    /// Left checkpoints as rows, right checkpoints as columns.
    pub payoff: PayoffMatrix,
    /// The pretrained policy every agent starts from.
    pub initial: SharedPolicy<O>,
    /// `(cycle, side)` of every main-exploiter reset.
    pub resets: Vec<(usize, Side)>,
    /// Matrix shape after each cycle.
    pub shapes: Vec<(usize, usize)>,
}

impl<O: Eq + Hash> LeagueRun<O> {
    /// Both sides' checkpoints mixed under the Nash pair of the payoff
    /// matrix.
    pub fn nash_mixtures(&self) -> Result<[MixturePolicy<O>; 2]> {
        let nash = solve_nash(&self.payoff)?;
        let pop = |side: Side| -> Vec<Member<O>> {
            let ids = match side {
                Side::Left => self.payoff.rows(),
                Side::Right => self.payoff.cols(),
            };
            ids.iter()
                .map(|id| {
                    self.roster.agents[side.index()]
                        .iter()
                        .flat_map(|a| a.checkpoints.iter())
                        .find(|m| &m.0 == id)
                        .expect("every matrix id is a checkpoint")
                        .clone()
                })
                .collect()
        };
        Ok([
            MixturePolicy::new(pop(Side::Left), nash.row_strategy)?,
            MixturePolicy::new(pop(Side::Right), nash.col_strategy)?,
        ])
    }
}

fn agent_config(cfg: &LeagueConfig, side: Side, role: Role, resets: u32) -> LearnConfig {
    LearnConfig { seed: derive(cfg.seed, &[side.index() as u64, role.index(), resets as u64]), ..cfg.learn.clone() }
}

/// Runs `cfg.cycles` league cycles. Every agent starts as a copy of
/// `pretrained`. All opponent mixtures of a cycle are fixed from the roster
/// as it stood when the cycle began, so opponents are frozen while they are
/// trained against; the roles then train in [`Role::ALL`] order, left
/// before right, each for `br_budget` steps, and each snapshots a
/// checkpoint. The payoff matrix then gains
/// the new checkpoints and only the new entries are estimated. A main
/// exploiter whose latest checkpoint wins at least `me_reset` against the
/// opposite main agent restarts from the pretrained learner.
pub fn run_league<G: MarkovGame>(game: &G, pretrained: &QLearner<G::Obs>, cfg: &LeagueConfig) -> Result<LeagueRun<G::Obs>> {
    cfg.validate()?;
    let initial: SharedPolicy<G::Obs> = Arc::new(pretrained.greedy());
    let fresh = |side: Side, role: Role, resets: u32| {
        let mut learner = pretrained.clone();
        learner.config = agent_config(cfg, side, role, resets);
        learner
    };
    let mut roster = LeagueRoster {
        agents: [Side::Left, Side::Right].map(|side| {
            Role::ALL
                .iter()
                .map(|&role| LeagueAgent {
                    role,
                    side,
                    learner: fresh(side, role, 0),
                    current: (PolicyId::new(&role.name(), side, 0), initial.clone()),
                    checkpoints: Vec::new(),
                    trained_steps: 0,
                    resets: 0,
                })
                .collect()
        }),
    };
    let mut payoff = PayoffMatrix::new();
    let mut resets = Vec::new();
    let mut shapes = Vec::new();
    let mut pending = Vec::new();
    for cycle in 1..=cfg.cycles {
        let mut schedule = Vec::with_capacity(2 * Role::ALL.len());
        for role in Role::ALL {
            for side in [Side::Left, Side::Right] {
                schedule.push((role, side, league_step(&roster, side, role, &payoff, cfg)?));
            }
        }
        for (role, side, mixture) in schedule {
            let agent = roster.agent_mut(side, role)?;
            let before = agent.learner.steps;
            agent.learner.train(game, &mixture, side, cfg.br_budget, cycle as u64);
            agent.trained_steps += agent.learner.steps - before;
            let id = PolicyId::new(&role.name(), side, agent.trained_steps);
            agent.current = (id.clone(), Arc::new(agent.learner.greedy()));
            agent.checkpoints.push(agent.current.clone());
            pending.push((side, id));
        }
        for (side, id) in pending.drain(..) {
            match side {
                Side::Left => payoff.add_row(id),
                Side::Right => payoff.add_col(id),
            };
        }
        let populations = [Side::Left, Side::Right].map(|side| {
            let ids = match side {
                Side::Left => payoff.rows(),
                Side::Right => payoff.cols(),
            };
            ids.iter()
                .map(|id| {
                    roster.agents[side.index()]
                        .iter()
                        .flat_map(|a| a.checkpoints.iter())
                        .find(|m| &m.0 == id)
                        .expect("every matrix id is a checkpoint")
                        .clone()
                })
                .collect::<Vec<_>>()
        });
        payoff.refresh(game, &populations[0], &populations[1], cfg.payoff, cfg.seed)?;
        shapes.push(payoff.shape());
        for side in [Side::Left, Side::Right] {
            let ma = roster.agent(side.opponent(), Role::MainAgent)?.current.0.clone();
            let me = roster.agent(side, Role::MainExploiter)?;
            let rate = payoff.win_rate_of(&me.current.0, side, &ma);
            if rate.is_some_and(|r| r >= cfg.me_reset) {
                let agent = roster.agent_mut(side, Role::MainExploiter)?;
                agent.resets += 1;
                agent.learner = fresh(side, Role::MainExploiter, agent.resets);
                agent.current = (PolicyId::new("Init", side, 0), initial.clone());
                resets.push((cycle, side));
            }
        }
    }
    Ok(LeagueRun { roster, payoff, initial, resets, shapes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pfsp_examples() {
        let w = pfsp_weights(&[Q::one(), q(1, 2), Q::zero()]).unwrap();
        assert_eq!(w, alloc::vec![Q::zero(), q(1, 5), q(4, 5)]);
        let w = pfsp_weights(&[Q::one(), Q::one()]).unwrap();
        assert_eq!(w, alloc::vec![q(1, 2), q(1, 2)]);
        assert!(pfsp_weights(&[]).is_err());
        assert!(pfsp_weights(&[q(3, 2)]).is_err());
    }

    #[test]
    fn role_names() {
        for r in Role::ALL {
            assert_eq!(Role::parse(&r.name()), Some(r));
        }
        assert_eq!(Role::parse("LE2"), None);
    }
}
