//! Exact best responses and exact policy evaluation by dynamic programming
//! over the reachable game tree, in rational arithmetic.
//!
//! The best response to a mixture works on nodes `(state, belief)`, where the
//! belief is the posterior over the mixture's components given the states
//! seen so far (the component is drawn once per episode and never revealed).
//! Its value is the optimum over responders that remember the state history.
//! The returned policy is observation-based: at each observation it plays the
//! action with the largest reach-weighted action value. With a single
//! opponent and observations that identify the state, the two coincide.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::hash::Hash;

use hashbrown::HashMap;
use num_traits::{One, Signed, Zero};
use rustc_hash::FxBuildHasher;

use crate::error::{Error, Result};
use crate::game::{MarkovGame, Outcome, Side};
use crate::num::{qi, Q};
use crate::policy::{MixturePolicy, Policy, PolicyId, TabularPolicy};

/// Default cap on `(state, belief)` nodes.
pub const NODE_CAP: usize = 2_000_000;

type FxMap<K, V> = HashMap<K, V, FxBuildHasher>;

/// Outcome probabilities from one side's point of view.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutcomeProbs {
    pub win: Q,
    pub draw: Q,
    pub loss: Q,
}

impl OutcomeProbs {
    pub fn zero() -> Self {
        OutcomeProbs { win: Q::zero(), draw: Q::zero(), loss: Q::zero() }
    }

    pub fn add(&mut self, outcome: Outcome, side: Side, mass: &Q) {
        match outcome.sparse(side) {
            1 => self.win += mass,
            -1 => self.loss += mass,
            _ => self.draw += mass,
        }
    }

    /// Expected sparse reward, `win − loss`.
    pub fn value(&self) -> Q {
        &self.win - &self.loss
    }

    /// Expected match score, `win + draw / 2`.
    pub fn score(&self) -> Q {
        &self.win + &self.draw / qi(2)
    }

    pub fn swap(&self) -> OutcomeProbs {
        OutcomeProbs { win: self.loss.clone(), draw: self.draw.clone(), loss: self.win.clone() }
    }

    fn scaled_add(&mut self, other: &OutcomeProbs, w: &Q) {
        self.win += &other.win * w;
        self.draw += &other.draw * w;
        self.loss += &other.loss * w;
    }
}

#[derive(Debug, Clone)]
pub struct BrResult<O: Eq + Hash> {
    /// Deterministic observation-based response.
    pub policy: TabularPolicy<O>,
    /// Optimal expected sparse reward of the responder.
    pub value: Q,
    /// Outcome probabilities of the optimal responder.
    pub outcome: OutcomeProbs,
    /// Exact outcome probabilities of `policy` against the opponent.
    pub policy_outcome: OutcomeProbs,
    /// Number of `(state, belief)` nodes explored.
    pub nodes: usize,
}

impl<O: Eq + Hash> BrResult<O> {
    pub fn win_prob(&self) -> &Q {
        &self.outcome.win
    }
}

/// Memoized exact action distributions of each mixture component.
struct ProbCache<'a, O> {
    mixture: &'a MixturePolicy<O>,
    cache: Vec<FxMap<O, Arc<Vec<Q>>>>,
}

impl<'a, O: Clone + Eq + Hash> ProbCache<'a, O> {
    fn new(mixture: &'a MixturePolicy<O>) -> Self {
        ProbCache { mixture, cache: (0..mixture.len()).map(|_| FxMap::default()).collect() }
    }

    fn get(&mut self, component: usize, obs: &O) -> Arc<Vec<Q>> {
        if let Some(p) = self.cache[component].get(obs) {
            return p.clone();
        }
        let p = Arc::new(self.mixture.components[component].1.exact_probs(obs));
        self.cache[component].insert(obs.clone(), p.clone());
        p
    }
}

struct Node<S> {
    state: S,
    belief: Vec<Q>,
    /// Per responder action: `(probability, child index)`.
    edges: Vec<Vec<(Q, usize)>>,
}

fn order(side: Side, own: usize, other: usize) -> (usize, usize) {
    match side {
        Side::Left => (own, other),
        Side::Right => (other, own),
    }
}

/// Exact best response of `side` against `opponent`, which plays the other
/// side.
pub fn exact_best_response<G: MarkovGame>(
    game: &G,
    opponent: &MixturePolicy<G::Obs>,
    side: Side,
    cap: usize,
) -> Result<BrResult<G::Obs>> {
    let n_actions = game.num_actions();
    if opponent.num_actions() != n_actions {
        return Err(Error::Invalid(alloc::format!(
            "opponent has {} actions, game has {n_actions}",
            opponent.num_actions()
        )));
    }
    let support = opponent.support();
    let comps: Vec<usize> = support.iter().map(|(i, _)| *i).collect();
    let prior: Vec<Q> = support.into_iter().map(|(_, w)| w).collect();
    let mut probs = ProbCache::new(opponent);

    // Forward: build the reachable (state, belief) graph breadth first, so
    // every child is created after its parent.
    let mut nodes: Vec<Node<G::State>> = Vec::new();
    let mut index: FxMap<(G::State, Vec<Q>), usize> = FxMap::default();
    let root = (game.initial_state(), prior);
    index.insert(root.clone(), 0);
    nodes.push(Node { state: root.0, belief: root.1, edges: Vec::new() });
    let mut cursor = 0;
    while cursor < nodes.len() {
        if game.outcome(&nodes[cursor].state).is_some() {
            cursor += 1;
            continue;
        }
        let state = nodes[cursor].state.clone();
        let belief = nodes[cursor].belief.clone();
        let opp_obs = game.observe(&state, side.opponent());
        let dists: Vec<Arc<Vec<Q>>> = comps.iter().map(|&c| probs.get(c, &opp_obs)).collect();
        let mut edges = Vec::with_capacity(n_actions);
        for a in 0..n_actions {
            // Unnormalized posterior mass per next state.
            let mut grouped: Vec<(G::State, Vec<Q>)> = Vec::new();
            let mut slot: FxMap<G::State, usize> = FxMap::default();
            for b in 0..n_actions {
                let (l, r) = order(side, a, b);
                let mut next: Option<G::State> = None;
                for (k, d) in dists.iter().enumerate() {
                    if d[b].is_zero() || belief[k].is_zero() {
                        continue;
                    }
                    let s = next.get_or_insert_with(|| game.transition(&state, l, r)).clone();
                    let pos = *slot.entry(s.clone()).or_insert_with(|| {
                        grouped.push((s, vec![Q::zero(); comps.len()]));
                        grouped.len() - 1
                    });
                    grouped[pos].1[k] += &belief[k] * &d[b];
                }
            }
            let mut out = Vec::with_capacity(grouped.len());
            for (s, mass) in grouped {
                let total: Q = mass.iter().fold(Q::zero(), |acc, m| acc + m);
                let post: Vec<Q> = mass.into_iter().map(|m| m / &total).collect();
                let key = (s, post);
                let child = match index.get(&key) {
                    Some(&c) => c,
                    None => {
                        if nodes.len() >= cap {
                            return Err(Error::Capacity { size: nodes.len() + 1, cap });
                        }
                        let c = nodes.len();
                        index.insert(key.clone(), c);
                        nodes.push(Node { state: key.0, belief: key.1, edges: Vec::new() });
                        c
                    }
                };
                out.push((total, child));
            }
            edges.push(out);
        }
        nodes[cursor].edges = edges;
        cursor += 1;
    }
    drop(index);

    // Backward: optimal values, lowest action index on ties.
    let n = nodes.len();
    let mut value = vec![Q::zero(); n];
    let mut best = vec![0usize; n];
    let mut qvals: Vec<Vec<Q>> = vec![Vec::new(); n];
    for i in (0..n).rev() {
        if let Some(o) = game.outcome(&nodes[i].state) {
            value[i] = qi(o.sparse(side) as i64);
            continue;
        }
        let qs: Vec<Q> = nodes[i]
            .edges
            .iter()
            .map(|es| es.iter().fold(Q::zero(), |acc, (p, c)| acc + p * &value[*c]))
            .collect();
        let mut arg = 0;
        for a in 1..qs.len() {
            if qs[a] > qs[arg] {
                arg = a;
            }
        }
        value[i] = qs[arg].clone();
        best[i] = arg;
        qvals[i] = qs;
    }

    // Reach probabilities and outcome split under the optimal responder.
    let mut reach = vec![Q::zero(); n];
    reach[0] = Q::one();
    let mut outcome = OutcomeProbs::zero();
    for i in 0..n {
        if reach[i].is_zero() {
            continue;
        }
        if let Some(o) = game.outcome(&nodes[i].state) {
            let r = reach[i].clone();
            outcome.add(o, side, &r);
            continue;
        }
        for (p, c) in &nodes[i].edges[best[i]] {
            let add = &reach[i] * p;
            reach[*c] += add;
        }
    }

    // Project onto observations.
    // Per observation: reach-weighted action values, plain sums, reached flag.
    let mut weighted: FxMap<G::Obs, (Vec<Q>, Vec<Q>, bool)> = FxMap::default();
    for i in 0..n {
        if qvals[i].is_empty() {
            continue;
        }
        let obs = game.observe(&nodes[i].state, side);
        let entry = weighted
            .entry(obs)
            .or_insert_with(|| (vec![Q::zero(); n_actions], vec![Q::zero(); n_actions], false));
        let reached = reach[i].is_positive();
        entry.2 |= reached;
        for a in 0..n_actions {
            if reached {
                entry.0[a] += &reach[i] * &qvals[i][a];
            }
            entry.1[a] += &qvals[i][a];
        }
    }
    let mut policy = TabularPolicy::uniform(n_actions);
    for (obs, (by_reach, plain, reached)) in weighted {
        let scores = if reached { by_reach } else { plain };
        let mut arg = 0;
        for a in 1..n_actions {
            if scores[a] > scores[arg] {
                arg = a;
            }
        }
        policy.set_deterministic(obs, arg);
    }
    let root_value = value[0].clone();
    drop(nodes);

    let responder: Arc<dyn Policy<G::Obs>> = Arc::new(policy.clone());
    let me = MixturePolicy::single(PolicyId::new("BR", side, 0), responder);
    let policy_outcome = match side {
        Side::Left => evaluate_exact(game, &me, opponent, cap)?,
        Side::Right => evaluate_exact(game, opponent, &me, cap)?.swap(),
    };
    Ok(BrResult { policy, value: root_value, outcome, policy_outcome, nodes: n })
}

/// Exact outcome probabilities (from the left side) of two fixed policies.
pub fn evaluate_pair<G: MarkovGame>(
    game: &G,
    left: &dyn Policy<G::Obs>,
    right: &dyn Policy<G::Obs>,
    cap: usize,
) -> Result<OutcomeProbs> {
    let mut cache: [FxMap<G::Obs, Vec<Q>>; 2] = [FxMap::default(), FxMap::default()];
    let mut layer: FxMap<G::State, Q> = FxMap::default();
    layer.insert(game.initial_state(), Q::one());
    let mut out = OutcomeProbs::zero();
    let mut visited = 0usize;
    while !layer.is_empty() {
        visited += layer.len();
        if visited > cap {
            return Err(Error::Capacity { size: visited, cap });
        }
        let mut next: FxMap<G::State, Q> = FxMap::default();
        for (s, mass) in layer {
            if let Some(o) = game.outcome(&s) {
                out.add(o, Side::Left, &mass);
                continue;
            }
            let ol = game.observe(&s, Side::Left);
            let or = game.observe(&s, Side::Right);
            let pl = cache[0].entry(ol.clone()).or_insert_with(|| left.exact_probs(&ol)).clone();
            let pr = cache[1].entry(or.clone()).or_insert_with(|| right.exact_probs(&or)).clone();
            for (a, x) in pl.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                let mx = &mass * x;
                for (b, y) in pr.iter().enumerate() {
                    if y.is_zero() {
                        continue;
                    }
                    let t = game.transition(&s, a, b);
                    *next.entry(t).or_insert_with(Q::zero) += &mx * y;
                }
            }
        }
        layer = next;
    }
    Ok(out)
}

/// Exact outcome probabilities (from the left side) of two mixtures, each
/// drawn once per episode.
pub fn evaluate_exact<G: MarkovGame>(
    game: &G,
    left: &MixturePolicy<G::Obs>,
    right: &MixturePolicy<G::Obs>,
    cap: usize,
) -> Result<OutcomeProbs> {
    let mut total = OutcomeProbs::zero();
    for (i, wi) in left.support() {
        for (j, wj) in right.support() {
            let r = evaluate_pair(game, left.components[i].1.as_ref(), right.components[j].1.as_ref(), cap)?;
            total.scaled_add(&r, &(&wi * &wj));
        }
    }
    Ok(total)
}

/// Win rate `(1 + value) / 2` on the ±1 scale.
pub fn winrate_from_value(value: &Q) -> Q {
    (Q::one() + value) / qi(2)
}
