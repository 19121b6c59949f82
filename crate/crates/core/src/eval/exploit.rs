//! Exploitability of a fixed policy or mixture, measured by the win rate of
//! a best response against it.

use alloc::string::String;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact::{exact_best_response, winrate_from_value};
use crate::game::{MarkovGame, Side};
use crate::learner::{evaluate_response, LearnConfig, QLearner};
use crate::num::{rationalize, Q, MAX_DENOMINATOR};
use crate::policy::{MixturePolicy, PolicyId};
use crate::seed::derive;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExploitMethod {
    Exact,
    Rl,
}

impl ExploitMethod {
    pub fn name(self) -> &'static str {
        match self {
            ExploitMethod::Exact => "exact",
            ExploitMethod::Rl => "rl",
        }
    }

    pub fn parse(s: &str) -> Option<ExploitMethod> {
        match s {
            "exact" => Some(ExploitMethod::Exact),
            "rl" => Some(ExploitMethod::Rl),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExploitReport {
    pub target: PolicyId,
    /// Side the target plays; the exploiter takes the other one.
    pub side: Side,
    /// Exploiter score against the target (wins plus half the draws).
    pub exploit_winrate: Q,
    /// Exploiter value on the ±1 scale; the symmetric game value is 0.
    pub exploit_gap: Q,
    pub method: ExploitMethod,
    pub matches: u64,
    pub stderr: Q,
}

impl ExploitReport {
    /// One `key=value` record per line.
    pub fn to_text(&self) -> String {
        alloc::format!(
            "target={}\nside={}\nmethod={}\nexploit_winrate={}\nexploit_gap={}\nmatches={}\nstderr={}\n",
            self.target.name(),
            self.side.name(),
            self.method.name(),
            self.exploit_winrate,
            self.exploit_gap,
            self.matches,
            self.stderr
        )
    }
}

/// Stopping rule of the learned exploiter: train in windows of
/// `window_steps`, evaluate after each, and stop once the best evaluated win
/// rate has not improved by `min_improvement` for `patience` windows, or
/// when the step budget is spent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    pub window_steps: u64,
    pub patience: u32,
    pub min_improvement: f64,
}

impl Plateau {
    pub fn for_budget(budget: u64) -> Plateau {
        Plateau { window_steps: (budget / 10).max(1), patience: 3, min_improvement: 0.01 }
    }
}

/// Exploitability of `target` playing `side`. The exact method solves the
/// best response by dynamic programming (capped at `cap` nodes). The learned
/// method trains a Q-learning exploiter under `plateau`, keeps the best
/// window's greedy policy and reports a fresh evaluation of it over
/// `lc.eval_matches` matches.
pub fn exploitability<G: MarkovGame>(
    game: &G,
    target_id: PolicyId,
    target: &MixturePolicy<G::Obs>,
    side: Side,
    method: ExploitMethod,
    lc: &LearnConfig,
    cap: usize,
) -> Result<ExploitReport> {
    let responder = side.opponent();
    match method {
        ExploitMethod::Exact => {
            let br = exact_best_response(game, target, responder, cap)?;
            Ok(ExploitReport {
                target: target_id,
                side,
                exploit_winrate: winrate_from_value(&br.value),
                exploit_gap: br.value,
                method,
                matches: 0,
                stderr: Q::zero(),
            })
        }
        ExploitMethod::Rl => {
            let plateau = Plateau::for_budget(lc.budget_steps);
            rl_exploit(game, target_id, target, side, lc, plateau)
        }
    }
}

pub fn rl_exploit<G: MarkovGame>(
    game: &G,
    target_id: PolicyId,
    target: &MixturePolicy<G::Obs>,
    side: Side,
    lc: &LearnConfig,
    plateau: Plateau,
) -> Result<ExploitReport> {
    if lc.eval_matches == 0 {
        return Err(Error::Invalid(String::from("the learned exploiter needs at least one evaluation match")));
    }
    let responder = side.opponent();
    let mut learner = QLearner::new(game.num_actions(), lc.clone())?;
    let mut best = evaluate_response(game, learner.greedy(), target, responder, lc.eval_matches, derive(lc.seed, &[1, 0]), 0);
    let mut stale = 0u32;
    let mut window = 0u64;
    while learner.steps < lc.budget_steps && stale < plateau.patience {
        let steps = plateau.window_steps.min(lc.budget_steps - learner.steps);
        learner.train(game, target, responder, steps, window);
        window += 1;
        let r = evaluate_response(game, learner.greedy(), target, responder, lc.eval_matches, derive(lc.seed, &[1, window]), learner.steps);
        if r.score >= best.score + plateau.min_improvement {
            stale = 0;
        } else {
            stale += 1;
        }
        if r.score > best.score {
            best = r;
        }
    }
    let fresh = evaluate_response(game, best.policy, target, responder, lc.eval_matches, derive(lc.seed, &[2]), best.steps);
    let matches = lc.eval_matches as u64;
    let wins2: u64 = libm::round((fresh.win_prob * 2.0 + fresh.draw_prob) * matches as f64) as u64;
    let exploit_winrate = Q::new(wins2.into(), (2 * matches).into());
    let exploit_gap = &exploit_winrate * Q::from_integer(2.into()) - Q::from_integer(1.into());
    Ok(ExploitReport {
        target: target_id,
        side,
        exploit_winrate,
        exploit_gap,
        method: ExploitMethod::Rl,
        matches,
        stderr: rationalize(fresh.stderr, MAX_DENOMINATOR),
    })
}
