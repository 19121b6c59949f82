//! Elo ratings and round-robin tournaments.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::arena::{par_map, play_episode, Episode};
use crate::error::{Error, Result};
use crate::game::{MarkovGame, Outcome, Side};
use crate::metagame::Member;
use crate::policy::PolicyId;
use crate::seed::{derive, rng};

pub const DEFAULT_ELO: f64 = 1000.0;
pub const DEFAULT_K: f64 = 32.0;

/// Expected score of a player rated `elo_a` against one rated `elo_b`.
pub fn elo_expected(elo_a: f64, elo_b: f64) -> f64 {
    1.0 / (1.0 + libm::pow(10.0, (elo_b - elo_a) / 400.0))
}

/// Ratings after one game; `outcome` is from `a`'s point of view as the
/// left side (draws score 1/2). The change is computed once and applied with
/// opposite signs, so the sum is preserved.
pub fn elo_update(elo_a: f64, elo_b: f64, outcome: Outcome, k: f64) -> (f64, f64) {
    let score = outcome.score2(Side::Left) as f64 / 2.0;
    let delta = k * (score - elo_expected(elo_a, elo_b));
    (elo_a + delta, elo_b - delta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EloRecord {
    /// Left and right players.
    pub ids: [PolicyId; 2],
    pub outcome: Outcome,
    pub pre: [f64; 2],
    pub post: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatingTable {
    pub ratings: BTreeMap<PolicyId, f64>,
    pub matches: BTreeMap<PolicyId, u64>,
    pub k: f64,
    pub history: Vec<EloRecord>,
}

impl RatingTable {
    pub fn new(ids: impl IntoIterator<Item = PolicyId>, initial: f64, k: f64) -> Result<Self> {
        if !(k > 0.0) {
            return Err(Error::Invalid(alloc::format!("Elo k must be positive, got {k}")));
        }
        let ratings: BTreeMap<PolicyId, f64> = ids.into_iter().map(|id| (id, initial)).collect();
        let matches = ratings.keys().map(|id| (id.clone(), 0)).collect();
        Ok(RatingTable { ratings, matches, k, history: Vec::new() })
    }

    pub fn rating(&self, id: &PolicyId) -> Option<f64> {
        self.ratings.get(id).copied()
    }

    pub fn total(&self) -> f64 {
        self.ratings.values().sum()
    }

    /// Applies one result with `left` on the left side.
    pub fn record(&mut self, left: &PolicyId, right: &PolicyId, outcome: Outcome) -> Result<()> {
        let missing = |id: &PolicyId| Error::Invalid(alloc::format!("{id} is not rated"));
        let a = self.rating(left).ok_or_else(|| missing(left))?;
        let b = self.rating(right).ok_or_else(|| missing(right))?;
        let (a2, b2) = elo_update(a, b, outcome, self.k);
        self.ratings.insert(left.clone(), a2);
        self.ratings.insert(right.clone(), b2);
        *self.matches.get_mut(left).expect("rated") += 1;
        *self.matches.get_mut(right).expect("rated") += 1;
        self.history.push(EloRecord { ids: [left.clone(), right.clone()], outcome, pre: [a, b], post: [a2, b2] });
        Ok(())
    }

    /// `(id, rating, matches)` sorted by rating, highest first; ties by id.
    pub fn sorted(&self) -> Vec<(PolicyId, f64, u64)> {
        let mut rows: Vec<(PolicyId, f64, u64)> =
            self.ratings.iter().map(|(id, r)| (id.clone(), *r, self.matches[id])).collect();
        rows.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
        rows
    }

    pub fn to_table(&self) -> String {
        let mut out = String::from("policy,elo,matches\n");
        for (id, r, m) in self.sorted() {
            out.push_str(&alloc::format!("{},{:.3},{}\n", id.name(), r, m));
        }
        out
    }
}

/// One scheduled tournament match and its episode.
#[derive(Debug, Clone, PartialEq)]
pub struct TournamentMatch<S> {
    pub round: u64,
    /// Population indices of the left and right players.
    pub players: [usize; 2],
    /// Seed of the match's random stream.
    pub seed: u64,
    pub episode: Episode<S>,
}

/// Round-robin schedule: every round plays each ordered pair `(i, j)`,
/// `i ≠ j`, once with `i` on the left. Matches are simulated concurrently,
/// each from a stream derived from `(seed, round, i, j)`, and returned in
/// schedule order.
pub fn play_tournament<G: MarkovGame>(
    game: &G,
    pop: &[Member<G::Obs>],
    rounds: u32,
    seed: u64,
) -> Result<Vec<TournamentMatch<G::State>>> {
    if pop.len() < 2 {
        return Err(Error::Invalid(String::from("a tournament needs at least two players")));
    }
    let mut schedule = Vec::new();
    for r in 0..rounds as u64 {
        for i in 0..pop.len() {
            for j in 0..pop.len() {
                if i != j {
                    schedule.push((r, i, j));
                }
            }
        }
    }
    Ok(par_map(schedule.len(), |s| {
        let (round, i, j) = schedule[s];
        let match_seed = derive(seed, &[round, i as u64, j as u64]);
        let episode = play_episode(game, pop[i].1.as_ref(), pop[j].1.as_ref(), &mut rng(match_seed));
        TournamentMatch { round, players: [i, j], seed: match_seed, episode }
    }))
}

/// Ratings from played matches, updated sequentially in the given order.
pub fn rate_matches<S>(pop_ids: &[PolicyId], matches: &[TournamentMatch<S>], initial: f64, k: f64) -> Result<RatingTable> {
    let mut table = RatingTable::new(pop_ids.iter().cloned(), initial, k)?;
    if table.ratings.len() != pop_ids.len() {
        return Err(Error::Invalid(String::from("duplicate policy ids in the tournament")));
    }
    for m in matches {
        let [i, j] = m.players;
        let (a, b) = (pop_ids.get(i), pop_ids.get(j));
        let (Some(a), Some(b)) = (a, b) else {
            return Err(Error::Invalid(alloc::format!("match between unknown players {i} and {j}")));
        };
        table.record(a, b, m.episode.result.outcome)?;
    }
    Ok(table)
}

/// [`play_tournament`] followed by [`rate_matches`] from [`DEFAULT_ELO`].
pub fn run_tournament<G: MarkovGame>(
    game: &G,
    pop: &[Member<G::Obs>],
    rounds: u32,
    k: f64,
    seed: u64,
) -> Result<RatingTable> {
    let matches = play_tournament(game, pop, rounds, seed)?;
    let ids: Vec<PolicyId> = pop.iter().map(|m| m.0.clone()).collect();
    rate_matches(&ids, &matches, DEFAULT_ELO, k)
}
