//! CPU ladders and the inverse-win-rate curriculum over CPU levels.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::arena::score_stats;
use crate::engine::{MiniBrawl, SymbolicObs};
use crate::error::{Error, Result};
use crate::game::{MarkovGame, Side};
use crate::learner::{evaluate_response, LearnConfig, QLearner};
use crate::num::{q, sum, to_f64, Q};
use crate::policy::{cpu_policy, MetaStrategy, MixturePolicy, Policy, PolicyId, SharedPolicy, TabularPolicy};
use crate::seed::derive;

/// Score of one policy against one CPU level.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderEntry {
    pub level: u8,
    pub win_rate: f64,
    pub stderr: f64,
    pub matches: u32,
}

fn cpu_mixture(game: &MiniBrawl, level: u8, side: Side) -> Result<MixturePolicy<SymbolicObs>> {
    let cpu: SharedPolicy<SymbolicObs> = Arc::new(cpu_policy(level, &game.config)?);
    Ok(MixturePolicy::single(PolicyId::cpu(level, side), cpu))
}

/// Win rate (draws count 1/2) of `policy` on the left against each CPU
/// level, over `matches` seeded matches per level.
pub fn cpu_ladder(
    game: &MiniBrawl,
    policy: &dyn Policy<SymbolicObs>,
    levels: &[u8],
    matches: u32,
    seed: u64,
) -> Result<Vec<LadderEntry>> {
    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        let cpu = cpu_policy(level, &game.config)?;
        let results = crate::arena::play_matches(game, policy, &cpu, matches as usize, derive(seed, &[level as u64]));
        let (win_rate, stderr) = score_stats(&results, Side::Left);
        out.push(LadderEntry { level, win_rate, stderr, matches });
    }
    Ok(out)
}

/// Schedule weights proportional to `1 − p`, uniform when they all vanish.
pub fn curriculum_weights(win_rates: &[Q]) -> Result<MetaStrategy> {
    if win_rates.is_empty() {
        return Err(Error::Empty("win-rate vector"));
    }
    if win_rates.iter().any(|p| p.is_negative() || *p > Q::one()) {
        return Err(Error::Invalid(String::from("win rates must lie in [0, 1]")));
    }
    let raw: Vec<Q> = win_rates.iter().map(|p| Q::one() - p).collect();
    let total = sum(&raw);
    if total.is_zero() {
        return Ok(MetaStrategy::uniform(win_rates.len()));
    }
    MetaStrategy::new(raw.into_iter().map(|w| w / &total).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurriculumState {
    pub levels: Vec<u8>,
    pub win_rates: Vec<Q>,
    pub schedule: MetaStrategy,
}

/// One row of the training curves.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub epoch: usize,
    pub level: u8,
    pub win_rate: f64,
    pub schedule_weight: f64,
}

pub struct CurriculumRun {
    pub policy: TabularPolicy<SymbolicObs>,
    pub curves: Vec<CurvePoint>,
    /// State at the start of each epoch.
    pub schedules: Vec<CurriculumState>,
    /// Ladder of the final policy.
    pub final_ladder: Vec<LadderEntry>,
}

impl CurriculumRun {
    pub fn curves_csv(&self) -> String {
        let mut out = String::from("epoch,level,win_rate,schedule_weight\n");
        for c in &self.curves {
            out.push_str(&alloc::format!("{},{},{:.6},{:.6}\n", c.epoch, c.level, c.win_rate, c.schedule_weight));
        }
        out
    }
}

/// Trains a left-side Q-learner against CPU opponents. Each epoch measures
/// the current greedy policy against every level over `eval_matches`
/// matches, sets the schedule with [`curriculum_weights`], and trains for
/// `lc.budget_steps` steps against the CPU mixture under that schedule.
pub fn full_game_train(
    game: &MiniBrawl,
    levels: &[u8],
    lc: &LearnConfig,
    epochs: usize,
    eval_matches: u32,
) -> Result<CurriculumRun> {
    if levels.is_empty() {
        return Err(Error::Empty("level list"));
    }
    if eval_matches == 0 {
        return Err(Error::Invalid(String::from("eval_matches must be >= 1")));
    }
    let mut learner = QLearner::new(game.num_actions(), lc.clone())?;
    let cpus: Vec<(PolicyId, SharedPolicy<SymbolicObs>)> = levels
        .iter()
        .map(|&l| Ok((PolicyId::cpu(l, Side::Right), Arc::new(cpu_policy(l, &game.config)?) as SharedPolicy<SymbolicObs>)))
        .collect::<Result<_>>()?;
    let mut curves = Vec::new();
    let mut schedules = Vec::new();
    for epoch in 0..epochs {
        let policy = learner.greedy();
        let mut win_rates = Vec::with_capacity(levels.len());
        for (i, &level) in levels.iter().enumerate() {
            let opp = cpu_mixture(game, level, Side::Right)?;
            let seed = derive(lc.seed, &[0xc0, epoch as u64, i as u64]);
            let r = evaluate_response(game, policy.clone(), &opp, Side::Left, eval_matches, seed, learner.steps);
            let twice = libm::round(r.score * 2.0 * eval_matches as f64) as i64;
            win_rates.push(q(twice, 2 * eval_matches as i64));
        }
        let schedule = curriculum_weights(&win_rates)?;
        for ((&level, p), w) in levels.iter().zip(&win_rates).zip(schedule.weights()) {
            curves.push(CurvePoint { epoch, level, win_rate: to_f64(p), schedule_weight: to_f64(w) });
        }
        let mixture = MixturePolicy::new(cpus.clone(), schedule.clone())?;
        learner.train(game, &mixture, Side::Left, lc.budget_steps, epoch as u64);
        schedules.push(CurriculumState { levels: levels.to_vec(), win_rates, schedule });
    }
    let policy = learner.greedy();
    let final_ladder = cpu_ladder(game, &policy, levels, eval_matches, derive(lc.seed, &[0xf1]))?;
    Ok(CurriculumRun { policy, curves, schedules, final_ladder })
}
