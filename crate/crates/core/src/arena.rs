//! Match simulation between policies, with seeded parallel fan-out.

use alloc::vec::Vec;

use crate::game::{MarkovGame, Outcome, Side};
use crate::policy::{MixturePolicy, Policy};
use crate::seed::{derived_rng, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub outcome: Outcome,
    pub steps: u32,
    /// Cumulative shaped reward per side.
    pub shaped: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode<S> {
    pub result: MatchResult,
    pub final_state: S,
    pub actions: Vec<[usize; 2]>,
}

/// Plays one episode; both sides draw from `rng`, left first.
pub fn play_episode<G: MarkovGame>(
    game: &G,
    left: &dyn Policy<G::Obs>,
    right: &dyn Policy<G::Obs>,
    rng: &mut Rng,
) -> Episode<G::State> {
    let mut state = game.initial_state();
    let mut shaped = [0.0; 2];
    let mut actions = Vec::new();
    loop {
        if let Some(outcome) = game.outcome(&state) {
            let steps = actions.len() as u32;
            return Episode { result: MatchResult { outcome, steps, shaped }, final_state: state, actions };
        }
        let a = left.act(&game.observe(&state, Side::Left), rng);
        let b = right.act(&game.observe(&state, Side::Right), rng);
        let next = game.transition(&state, a, b);
        let r = game.shaped_rewards(&state, &next);
        shaped[0] += r[0];
        shaped[1] += r[1];
        actions.push([a, b]);
        state = next;
    }
}

pub fn play_match<G: MarkovGame>(game: &G, left: &dyn Policy<G::Obs>, right: &dyn Policy<G::Obs>, rng: &mut Rng) -> MatchResult {
    play_episode(game, left, right, rng).result
}

/// Match `index` between two mixtures: components are drawn once, then the
/// episode is played, all from a stream derived from `(seed, index)`.
pub fn play_mixture_match<G: MarkovGame>(
    game: &G,
    left: &MixturePolicy<G::Obs>,
    right: &MixturePolicy<G::Obs>,
    seed: u64,
    index: u64,
) -> ([usize; 2], MatchResult) {
    let mut rng = derived_rng(seed, &[index]);
    let i = left.draw(&mut rng);
    let j = right.draw(&mut rng);
    let r = play_match(game, left.components[i].1.as_ref(), right.components[j].1.as_ref(), &mut rng);
    ([i, j], r)
}

/// `f(0..n)` collected in index order, run on the rayon pool when available.
pub fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "std")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "std"))]
    {
        (0..n).map(f).collect()
    }
}

/// `n` seeded matches between fixed policies; match `k` uses the stream
/// derived from `(seed, k)`.
pub fn play_matches<G: MarkovGame>(
    game: &G,
    left: &dyn Policy<G::Obs>,
    right: &dyn Policy<G::Obs>,
    n: usize,
    seed: u64,
) -> Vec<MatchResult>
where
    G::Obs: Sync,
{
    par_map(n, |k| {
        let mut rng = derived_rng(seed, &[k as u64]);
        play_match(game, left, right, &mut rng)
    })
}

/// Mean score of `side` (win 1, draw 1/2) and its standard error.
pub fn score_stats(results: &[MatchResult], side: Side) -> (f64, f64) {
    let n = results.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let scores: Vec<f64> = results.iter().map(|r| r.outcome.score2(side) as f64 / 2.0).collect();
    let mean = scores.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, libm::sqrt(var / n as f64))
}
