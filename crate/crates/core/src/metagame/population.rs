//! The alternating population loop behind FSP and PSRO.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::nash::{solve_nash, solve_uniform};
use super::payoff::{Member, PayoffMatrix, PayoffMode};
use crate::error::{Error, Result};
use crate::exact::exact_best_response;
use crate::game::{MarkovGame, Side};
use crate::learner::{rl_best_response, LearnConfig};
use crate::policy::{MetaStrategy, MixturePolicy, PolicyId, TabularPolicy};
use crate::seed::derive;

/// Produces a policy for `side` that responds to `opponent`.
pub trait BrOracle<G: MarkovGame>: Sync {
    fn respond(&self, game: &G, opponent: &MixturePolicy<G::Obs>, side: Side, iteration: usize) -> Result<TabularPolicy<G::Obs>>;
}

/// Dynamic-programming best response.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactOracle {
    pub cap: usize,
}

impl<G: MarkovGame> BrOracle<G> for ExactOracle {
    fn respond(&self, game: &G, opponent: &MixturePolicy<G::Obs>, side: Side, _iteration: usize) -> Result<TabularPolicy<G::Obs>> {
        Ok(exact_best_response(game, opponent, side, self.cap)?.policy)
    }
}

/// Q-learning best response; each call trains from scratch on a seed derived
/// from the configured one and the iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RlOracle {
    pub config: LearnConfig,
}

impl<G: MarkovGame> BrOracle<G> for RlOracle {
    fn respond(&self, game: &G, opponent: &MixturePolicy<G::Obs>, side: Side, iteration: usize) -> Result<TabularPolicy<G::Obs>> {
        let lc = LearnConfig { seed: derive(self.config.seed, &[iteration as u64, side.index() as u64]), ..self.config.clone() };
        Ok(rl_best_response(game, opponent, side, &lc)?.policy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetaSolver {
    /// Uniform over the population.
    Fsp,
    /// Nash of the payoff matrix.
    Psro,
}

impl MetaSolver {
    pub fn name(self) -> &'static str {
        match self {
            MetaSolver::Fsp => "fsp",
            MetaSolver::Psro => "psro",
        }
    }

    pub fn parse(s: &str) -> Option<MetaSolver> {
        match s {
            "fsp" => Some(MetaSolver::Fsp),
            "psro" => Some(MetaSolver::Psro),
            _ => None,
        }
    }

    fn role(self) -> &'static str {
        match self {
            MetaSolver::Fsp => "FSP",
            MetaSolver::Psro => "PSRO",
        }
    }
}

/// State after iteration `t` of the loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationRecord {
    pub t: usize,
    /// Side whose population grew.
    pub extended: Side,
    /// `[|μ|, |ν|]` after the iteration.
    pub sizes: [usize; 2],
    /// `[ρ_μ, ρ_ν]` after the iteration.
    pub meta: [MetaStrategy; 2],
}

pub struct PopulationRun<O> {
    /// `[μ, ν]`: left and right populations in insertion order.
    pub populations: [Vec<Member<O>>; 2],
    pub meta: [MetaStrategy; 2],
    pub history: Vec<IterationRecord>,
    /// Payoff matrix after each iteration (index 0 is the initial one).
    pub payoffs: Vec<PayoffMatrix>,
}

impl<O> PopulationRun<O> {
    /// The population of `side` as a mixture under its meta-strategy.
    pub fn mixture(&self, side: Side) -> Result<MixturePolicy<O>> {
        let i = side.index();
        MixturePolicy::new(self.populations[i].clone(), self.meta[i].clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PopulationConfig {
    pub solver: MetaSolver,
    pub iterations: usize,
    pub payoff: PayoffMode,
    pub seed: u64,
}

/// Runs `iterations` steps of the alternating loop from the initial pair
/// `(μ⁰, ν⁰)`. Odd `t` adds a left best response to the right mixture under
/// `ρ_ν`; even `t` adds a right best response to the left mixture under
/// `ρ_μ`. After each step the payoff matrix is refreshed for the new entries
/// only and the meta-strategies are recomputed: FSP resets the extended
/// side to uniform, PSRO replaces both with the Nash pair.
pub fn population_loop<G: MarkovGame, B: BrOracle<G> + ?Sized>(
    game: &G,
    config: &PopulationConfig,
    oracle: &B,
    initial: [Member<G::Obs>; 2],
) -> Result<PopulationRun<G::Obs>> {
    if config.iterations == 0 {
        return Err(Error::Invalid(String::from("the population loop needs at least one iteration")));
    }
    let [mu0, nu0] = initial;
    let mut payoff = PayoffMatrix::new();
    payoff.add_row(mu0.0.clone());
    payoff.add_col(nu0.0.clone());
    let mut run = PopulationRun {
        populations: [alloc::vec![mu0], alloc::vec![nu0]],
        meta: [MetaStrategy::point(1, 0), MetaStrategy::point(1, 0)],
        history: Vec::new(),
        payoffs: Vec::new(),
    };
    payoff.refresh(game, &run.populations[0], &run.populations[1], config.payoff, config.seed)?;
    run.payoffs.push(payoff.clone());

    for t in 1..=config.iterations {
        let side = if t % 2 == 0 { Side::Right } else { Side::Left };
        let opponent = run.mixture(side.opponent())?;
        let policy = oracle.respond(game, &opponent, side, t).map_err(|e| match e {
            Error::Capacity { .. } => Error::IterationCapacity { iteration: t, source: alloc::boxed::Box::new(e) },
            other => other,
        })?;
        let id = PolicyId::new(config.solver.role(), side, t as u64);
        match side {
            Side::Left => payoff.add_row(id.clone()),
            Side::Right => payoff.add_col(id.clone()),
        };
        run.populations[side.index()].push((id, Arc::new(policy)));
        payoff.refresh(game, &run.populations[0], &run.populations[1], config.payoff, config.seed)?;
        match config.solver {
            MetaSolver::Fsp => run.meta[side.index()] = solve_uniform(run.populations[side.index()].len())?,
            MetaSolver::Psro => {
                let nash = solve_nash(&payoff)?;
                run.meta = [nash.row_strategy, nash.col_strategy];
            }
        }
        run.history.push(IterationRecord {
            t,
            extended: side,
            sizes: [run.populations[0].len(), run.populations[1].len()],
            meta: run.meta.clone(),
        });
        run.payoffs.push(payoff.clone());
    }
    Ok(run)
}
