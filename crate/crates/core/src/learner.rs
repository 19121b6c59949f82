//! Budgeted tabular learners: an ε-greedy Q-learning best response and the
//! independent self-play baselines (symmetric and two-timescale).
//!
//! Tables are indexed by observation only (no step index), so they are a
//! stationary approximation of the finite-horizon problem. Episodes within a
//! batch are generated in parallel against a frozen table; updates are then
//! applied in episode order, so results depend only on the seed.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::hash::Hash;

use hashbrown::HashMap;
use num_rational::Rational64;
use num_traits::{One, Zero};
use rand::Rng as _;
use rustc_hash::FxBuildHasher;

use crate::arena::{par_map, play_mixture_match, score_stats, MatchResult};
use crate::error::{Error, Result};
use crate::game::{MarkovGame, Side};
use crate::policy::{MixturePolicy, TabularPolicy};
use crate::seed::{derived_rng, Rng};

type FxMap<K, V> = HashMap<K, V, FxBuildHasher>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RewardMode {
    /// Shaped per-step reward.
    Dense,
    /// ±1 at the end of the episode only.
    Sparse,
}

impl RewardMode {
    pub fn name(self) -> &'static str {
        match self {
            RewardMode::Dense => "dense",
            RewardMode::Sparse => "sparse",
        }
    }

    pub fn parse(s: &str) -> Option<RewardMode> {
        match s {
            "dense" => Some(RewardMode::Dense),
            "sparse" => Some(RewardMode::Sparse),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LearnConfig {
    /// Environment steps to train for.
    pub budget_steps: u64,
    pub step_size: Rational64,
    /// ε of the ε-greedy behaviour policy.
    pub exploration: Rational64,
    /// Multiplies the actor step size in the independent learners.
    pub step_ratio: Rational64,
    pub seed: u64,
    pub reward: RewardMode,
    /// Episodes generated per update batch.
    pub batch_episodes: u32,
    /// Matches used to estimate the win rate of a learned response.
    pub eval_matches: u32,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig {
            budget_steps: 20_000,
            step_size: Rational64::new(1, 10),
            exploration: Rational64::new(1, 10),
            step_ratio: Rational64::one(),
            seed: 0,
            reward: RewardMode::Dense,
            batch_episodes: 1,
            eval_matches: 1000,
        }
    }
}

fn r64(v: Rational64) -> f64 {
    *v.numer() as f64 / *v.denom() as f64
}

impl LearnConfig {
    pub fn validate(&self) -> Result<()> {
        let zero = Rational64::zero();
        let one = Rational64::one();
        if self.step_size <= zero || self.step_size > one {
            return Err(Error::Config(format!("step_size must lie in (0, 1], got {}", self.step_size)));
        }
        if self.exploration < zero || self.exploration > one {
            return Err(Error::Config(format!("exploration must lie in [0, 1], got {}", self.exploration)));
        }
        if self.step_ratio <= zero {
            return Err(Error::Config(format!("step_ratio must be positive, got {}", self.step_ratio)));
        }
        if self.batch_episodes == 0 {
            return Err(Error::Config(String::from("batch_episodes must be >= 1")));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        r64(self.step_size)
    }

    pub fn epsilon(&self) -> f64 {
        r64(self.exploration)
    }

    pub fn ratio(&self) -> f64 {
        r64(self.step_ratio)
    }
}

/// One responder transition; `next` is `None` at the end of the episode.
#[derive(Debug, Clone)]
struct Transition<O> {
    obs: O,
    action: usize,
    reward: f64,
    next: Option<O>,
}

fn argmax_lowest(v: &[f64]) -> usize {
    let mut arg = 0;
    for i in 1..v.len() {
        if v[i] > v[arg] {
            arg = i;
        }
    }
    arg
}

fn argmax_random(v: &[f64], rng: &mut Rng) -> usize {
    let best = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = (0..v.len()).filter(|&i| v[i] == best).collect();
    ties[rng.gen_range(0..ties.len())]
}

/// ε-greedy tabular Q-learning with γ = 1 and zero-initialised values.
#[derive(Debug, Clone)]
pub struct QLearner<O: Eq + Hash> {
    num_actions: usize,
    q: FxMap<O, Vec<f64>>,
    pub config: LearnConfig,
    /// Environment steps consumed so far.
    pub steps: u64,
    pub episodes: u64,
}

impl<O: Clone + Eq + Hash + Ord + Send + Sync> QLearner<O> {
    pub fn new(num_actions: usize, config: LearnConfig) -> Result<Self> {
        config.validate()?;
        Ok(QLearner { num_actions, q: FxMap::default(), config, steps: 0, episodes: 0 })
    }

    pub fn values(&self, obs: &O) -> Option<&[f64]> {
        self.q.get(obs).map(Vec::as_slice)
    }

    fn behave(&self, obs: &O, eps: f64, rng: &mut Rng) -> usize {
        if rng.gen::<f64>() < eps {
            return rng.gen_range(0..self.num_actions);
        }
        match self.q.get(obs) {
            Some(v) => argmax_random(v, rng),
            None => rng.gen_range(0..self.num_actions),
        }
    }

    fn episode<G: MarkovGame<Obs = O>>(
        &self,
        game: &G,
        opponent: &MixturePolicy<O>,
        side: Side,
        rng: &mut Rng,
    ) -> Vec<Transition<O>> {
        let eps = self.config.epsilon();
        let comp = opponent.draw(rng);
        let opp = opponent.components[comp].1.as_ref();
        let mut state = game.initial_state();
        let mut out: Vec<Transition<O>> = Vec::new();
        let mut obs = game.observe(&state, side);
        loop {
            let a = self.behave(&obs, eps, rng);
            let b = opp.act(&game.observe(&state, side.opponent()), rng);
            let (l, r) = if side == Side::Left { (a, b) } else { (b, a) };
            let next = game.transition(&state, l, r);
            let done = game.outcome(&next);
            let reward = match (self.config.reward, done) {
                (RewardMode::Dense, _) => game.shaped_rewards(&state, &next)[side.index()],
                (RewardMode::Sparse, Some(o)) => o.sparse(side) as f64,
                (RewardMode::Sparse, None) => 0.0,
            };
            let next_obs = done.is_none().then(|| game.observe(&next, side));
            out.push(Transition { obs: obs.clone(), action: a, reward, next: next_obs.clone() });
            match next_obs {
                Some(o) => {
                    obs = o;
                    state = next;
                }
                None => return out,
            }
        }
    }

    fn apply(&mut self, t: &Transition<O>) {
        let n = self.num_actions;
        let target = t.reward
            + match &t.next {
                Some(o) => self.q.get(o).map(|v| v.iter().copied().fold(f64::NEG_INFINITY, f64::max)).unwrap_or(0.0),
                None => 0.0,
            };
        let alpha = self.config.alpha();
        let row = self.q.entry(t.obs.clone()).or_insert_with(|| vec![0.0; n]);
        row[t.action] += alpha * (target - row[t.action]);
    }

    /// Trains for `steps` more environment steps (whole episodes) against
    /// `opponent`. `stream` separates successive calls on the same seed.
    pub fn train<G: MarkovGame<Obs = O>>(&mut self, game: &G, opponent: &MixturePolicy<O>, side: Side, steps: u64, stream: u64) {
        let target = self.steps + steps;
        let batch = self.config.batch_episodes as usize;
        let mut round = 0u64;
        while self.steps < target {
            let seed = self.config.seed;
            let episodes = par_map(batch, |k| {
                let mut rng = derived_rng(seed, &[stream, round, k as u64]);
                self.episode(game, opponent, side, &mut rng)
            });
            for ep in episodes {
                if self.steps >= target {
                    break;
                }
                for t in &ep {
                    self.apply(t);
                }
                self.steps += ep.len() as u64;
                self.episodes += 1;
            }
            round += 1;
        }
    }

    /// Greedy policy; ties go to the lowest action index and unseen
    /// observations fall back to uniform.
    pub fn greedy(&self) -> TabularPolicy<O> {
        let mut p = TabularPolicy::uniform(self.num_actions);
        for (o, v) in &self.q {
            p.set_deterministic(o.clone(), argmax_lowest(v));
        }
        p
    }
}

/// Learned response together with its measured performance.
#[derive(Debug, Clone)]
pub struct RlBrResult<O: Eq + Hash> {
    pub policy: TabularPolicy<O>,
    pub win_prob: f64,
    pub draw_prob: f64,
    /// Mean sparse reward over the evaluation matches.
    pub value: f64,
    /// Mean score (win 1, draw 1/2) and its standard error.
    pub score: f64,
    pub stderr: f64,
    pub matches: u32,
    pub steps: u64,
}

/// Evaluates `policy` on `side` against `opponent` over seeded matches.
pub fn evaluate_response<G: MarkovGame>(
    game: &G,
    policy: TabularPolicy<G::Obs>,
    opponent: &MixturePolicy<G::Obs>,
    side: Side,
    matches: u32,
    seed: u64,
    steps: u64,
) -> RlBrResult<G::Obs> {
    let me = MixturePolicy::single(
        crate::policy::PolicyId::new("RL", side, steps),
        alloc::sync::Arc::new(policy.clone()),
    );
    let results: Vec<MatchResult> = par_map(matches as usize, |k| {
        let (l, r) = if side == Side::Left { (&me, opponent) } else { (opponent, &me) };
        play_mixture_match(game, l, r, seed, k as u64).1
    });
    let n = results.len().max(1) as f64;
    let wins = results.iter().filter(|r| r.outcome.winner() == Some(side)).count() as f64;
    let draws = results.iter().filter(|r| r.outcome.winner().is_none()).count() as f64;
    let losses = results.len() as f64 - wins - draws;
    let (score, stderr) = score_stats(&results, side);
    RlBrResult {
        policy,
        win_prob: wins / n,
        draw_prob: draws / n,
        value: (wins - losses) / n,
        score,
        stderr,
        matches,
        steps,
    }
}

/// A fresh learner trained for `lc.budget_steps` against `opponent`.
pub fn train_learner<G: MarkovGame>(
    game: &G,
    opponent: &MixturePolicy<G::Obs>,
    side: Side,
    lc: &LearnConfig,
) -> Result<QLearner<G::Obs>> {
    let mut learner = QLearner::new(game.num_actions(), lc.clone())?;
    learner.train(game, opponent, side, lc.budget_steps, 0);
    Ok(learner)
}

/// Q-learning best response of `side` against the frozen `opponent`.
pub fn rl_best_response<G: MarkovGame>(
    game: &G,
    opponent: &MixturePolicy<G::Obs>,
    side: Side,
    lc: &LearnConfig,
) -> Result<RlBrResult<G::Obs>> {
    let learner = train_learner(game, opponent, side, lc)?;
    let eval_seed = crate::seed::derive(lc.seed, &[0xe7a1]);
    Ok(evaluate_response(game, learner.greedy(), opponent, side, lc.eval_matches, eval_seed, learner.steps))
}

/// One row of independent-learning diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub iteration: u64,
    /// Mean sparse reward of the left side over the iteration's episodes.
    pub value_estimate: f64,
    /// L1 change of each side's policy over the observations updated.
    pub change: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct IndependentResult<O: Eq + Hash> {
    pub left: TabularPolicy<O>,
    pub right: TabularPolicy<O>,
    pub diagnostics: Vec<Diagnostic>,
    pub steps: u64,
}

/// Softmax actor with an expected-SARSA critic.
struct ActorCritic<O: Eq + Hash> {
    n: usize,
    logits: FxMap<O, Vec<f64>>,
    critic: FxMap<O, Vec<f64>>,
    actor_step: f64,
    critic_step: f64,
    epsilon: f64,
    reward: RewardMode,
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|x| libm::exp(x - m)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

impl<O: Clone + Eq + Hash + Ord> ActorCritic<O> {
    fn probs(&self, obs: &O) -> Vec<f64> {
        match self.logits.get(obs) {
            Some(l) => softmax(l),
            None => vec![1.0 / self.n as f64; self.n],
        }
    }

    fn behave(&self, obs: &O, rng: &mut Rng) -> usize {
        if rng.gen::<f64>() < self.epsilon {
            return rng.gen_range(0..self.n);
        }
        crate::policy::sample_index(&self.probs(obs), rng)
    }

    fn state_value(&self, obs: &O) -> f64 {
        match self.critic.get(obs) {
            Some(q) => self.probs(obs).iter().zip(q).map(|(p, v)| p * v).sum(),
            None => 0.0,
        }
    }

    fn critic_update(&mut self, t: &Transition<O>) {
        let target = t.reward + t.next.as_ref().map(|o| self.state_value(o)).unwrap_or(0.0);
        let n = self.n;
        let row = self.critic.entry(t.obs.clone()).or_insert_with(|| vec![0.0; n]);
        row[t.action] += self.critic_step * (target - row[t.action]);
    }

    /// Moves the logits along the critic's advantages; returns the L1 change
    /// of the policy summed over `observations`.
    fn actor_update(&mut self, observations: &[O]) -> f64 {
        let mut change = 0.0;
        for o in observations {
            let Some(q) = self.critic.get(o).cloned() else { continue };
            let before = self.probs(o);
            let v: f64 = before.iter().zip(&q).map(|(p, x)| p * x).sum();
            let n = self.n;
            let step = self.actor_step;
            let logits = self.logits.entry(o.clone()).or_insert_with(|| vec![0.0; n]);
            for (l, x) in logits.iter_mut().zip(&q) {
                *l += step * (x - v);
            }
            let after = self.probs(o);
            change += before.iter().zip(&after).map(|(a, b)| (a - b).abs()).sum::<f64>();
        }
        change
    }

    fn policy(&self) -> TabularPolicy<O> {
        let mut p = TabularPolicy::uniform(self.n);
        let mut keys: Vec<&O> = self.logits.keys().collect();
        keys.sort_unstable();
        for o in keys {
            let mut d = self.probs(o);
            let s: f64 = d.iter().sum();
            d.iter_mut().for_each(|x| *x /= s);
            p.set(o.clone(), d).expect("softmax is a distribution");
        }
        p
    }
}

/// Both sides learn simultaneously from shared self-play episodes, each with
/// its own actor-critic. A side's actor step is `step_size · step_ratio`; its
/// critic step is `step_size`. The episode budget and batch size come from
/// `lc_left`; each side samples from a stream derived from its own seed.
pub fn independent_learn<G: MarkovGame>(
    game: &G,
    lc_left: &LearnConfig,
    lc_right: &LearnConfig,
) -> Result<IndependentResult<G::Obs>> {
    lc_left.validate()?;
    lc_right.validate()?;
    let n = game.num_actions();
    let mk = |lc: &LearnConfig| ActorCritic {
        n,
        logits: FxMap::default(),
        critic: FxMap::default(),
        actor_step: lc.alpha() * lc.ratio(),
        critic_step: lc.alpha(),
        epsilon: lc.epsilon(),
        reward: lc.reward,
    };
    let mut learners = [mk(lc_left), mk(lc_right)];
    let seeds = [lc_left.seed, lc_right.seed];
    let batch = lc_left.batch_episodes as usize;
    let mut steps = 0u64;
    let mut diagnostics = Vec::new();
    let mut iteration = 0u64;
    while steps < lc_left.budget_steps {
        let episodes = par_map(batch, |k| {
            let mut rngs = [
                derived_rng(seeds[0], &[iteration, k as u64]),
                derived_rng(seeds[1], &[iteration, k as u64]),
            ];
            let mut state = game.initial_state();
            let mut trans: [Vec<Transition<G::Obs>>; 2] = [Vec::new(), Vec::new()];
            let mut outcome = None;
            while outcome.is_none() {
                let obs = [game.observe(&state, Side::Left), game.observe(&state, Side::Right)];
                let a = [learners[0].behave(&obs[0], &mut rngs[0]), learners[1].behave(&obs[1], &mut rngs[1])];
                let next = game.transition(&state, a[0], a[1]);
                outcome = game.outcome(&next);
                let shaped = game.shaped_rewards(&state, &next);
                for side in Side::BOTH {
                    let i = side.index();
                    let reward = match (learners[i].reward, outcome) {
                        (RewardMode::Dense, _) => shaped[i],
                        (RewardMode::Sparse, Some(o)) => o.sparse(side) as f64,
                        (RewardMode::Sparse, None) => 0.0,
                    };
                    let next_obs = outcome.is_none().then(|| game.observe(&next, side));
                    trans[i].push(Transition { obs: obs[i].clone(), action: a[i], reward, next: next_obs });
                }
                state = next;
            }
            (trans, outcome.expect("episode ended"))
        });
        let mut value = 0.0;
        let mut touched: [Vec<G::Obs>; 2] = [Vec::new(), Vec::new()];
        let count = episodes.len() as f64;
        for (trans, outcome) in &episodes {
            value += outcome.sparse(Side::Left) as f64;
            for i in 0..2 {
                for t in &trans[i] {
                    learners[i].critic_update(t);
                    touched[i].push(t.obs.clone());
                }
            }
            steps += trans[0].len() as u64;
        }
        let mut change = [0.0; 2];
        for i in 0..2 {
            touched[i].sort_unstable();
            touched[i].dedup();
            change[i] = learners[i].actor_update(&touched[i]);
        }
        diagnostics.push(Diagnostic { iteration, value_estimate: value / count, change });
        iteration += 1;
    }
    Ok(IndependentResult { left: learners[0].policy(), right: learners[1].policy(), diagnostics, steps })
}
