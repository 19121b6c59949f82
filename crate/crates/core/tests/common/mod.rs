//! Helpers shared by the integration tests: a small deterministic stream,
//! random engine configurations and independent reference oracles.
#![allow(dead_code)]

use std::sync::Arc;

use arenaladder_core::engine::{EngineConfig, MiniBrawl, SymbolicObs, TransAction};
use arenaladder_core::exact::OutcomeProbs;
use arenaladder_core::game::{MarkovGame, Outcome, Side};
use arenaladder_core::num::{q, Q};
use arenaladder_core::policy::{MixturePolicy, Policy, PolicyId, SharedPolicy, TabularPolicy};
use arenaladder_core::presets;
use arenaladder_core::seed::splitmix64;
use num_traits::{One, Zero};

/// Splitmix-based stream for test data.
pub struct Stream(pub u64);

impl Stream {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        splitmix64(self.0)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }

    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as u64) as i64
    }

    pub fn pick<T: Clone>(&mut self, items: &[T]) -> T {
        items[self.below(items.len() as u64) as usize].clone()
    }
}

/// Tiny-style configuration with `k` actions (noop first) and horizon `h`;
/// observations stay lossless.
pub fn random_tiny_config(s: &mut Stream, h: u16, k: usize) -> EngineConfig {
    let mut c = presets::tiny();
    c.horizon = h;
    c.timer_buckets = h + 1;
    c.arena_width = s.range(5, 6) as u8;
    c.max_hp = s.range(6, 14) as u16;
    c.hp_buckets = c.max_hp + 1;
    c.bonus_scale = num_rational::Rational64::from_integer(c.max_hp as i64);
    let mut pool: Vec<TransAction> = TransAction::standard().into_iter().skip(1).collect();
    let mut actions = vec![TransAction::Noop];
    while actions.len() < k {
        let i = s.below(pool.len() as u64) as usize;
        actions.push(pool.swap_remove(i));
    }
    c.actions = Some(actions);
    c
}

/// Random stochastic tabular policy over the observations reachable in
/// `game`, with rational-friendly probabilities.
pub fn random_policy(game: &MiniBrawl, side: Side, s: &mut Stream) -> TabularPolicy<SymbolicObs> {
    let n = game.num_actions();
    let mut p = TabularPolicy::uniform(n);
    let mut stack = vec![game.initial_state()];
    let mut seen = std::collections::HashSet::new();
    while let Some(st) = stack.pop() {
        if game.outcome(&st).is_some() || !seen.insert(st.clone()) {
            continue;
        }
        let obs = game.observe(&st, side);
        if p.stored(&obs).is_none() {
            let mut w: Vec<f64> = (0..n).map(|_| s.below(4) as f64).collect();
            if w.iter().all(|x| *x == 0.0) {
                w[0] = 1.0;
            }
            let t: f64 = w.iter().sum();
            p.set(obs, w.iter().map(|x| x / t).collect()).unwrap();
        }
        for a in 0..n {
            for b in 0..n {
                stack.push(game.transition(&st, a, b));
            }
        }
    }
    p
}

pub fn single<O: 'static>(id: PolicyId, p: impl Policy<O> + 'static) -> MixturePolicy<O> {
    MixturePolicy::single(id, Arc::new(p) as SharedPolicy<O>)
}

/// Best value over all deterministic responders that see the whole state
/// history, by exhaustive search of the history tree. `masses[k]` is the
/// probability of reaching this history with mixture component `k`.
pub fn brute_force_br<G: MarkovGame>(game: &G, opponent: &MixturePolicy<G::Obs>, side: Side) -> Q {
    let masses: Vec<Q> = opponent.weights.weights().to_vec();
    search(game, opponent, side, &game.initial_state(), &masses)
}

fn search<G: MarkovGame>(game: &G, opp: &MixturePolicy<G::Obs>, side: Side, s: &G::State, masses: &[Q]) -> Q {
    if let Some(o) = game.outcome(s) {
        let total = masses.iter().fold(Q::zero(), |a, m| a + m);
        return total * Q::from_integer(o.sparse(side).into());
    }
    let obs = game.observe(s, side.opponent());
    let dists: Vec<Vec<Q>> = opp.components.iter().map(|(_, p)| p.exact_probs(&obs)).collect();
    let n = game.num_actions();
    let mut best: Option<Q> = None;
    for a in 0..n {
        let mut v = Q::zero();
        for b in 0..n {
            let next: Vec<Q> = masses.iter().zip(&dists).map(|(m, d)| m * &d[b]).collect();
            if next.iter().all(Zero::is_zero) {
                continue;
            }
            let t = match side {
                Side::Left => game.transition(s, a, b),
                Side::Right => game.transition(s, b, a),
            };
            v += search(game, opp, side, &t, &next);
        }
        if best.as_ref().is_none_or(|x| v > *x) {
            best = Some(v);
        }
    }
    best.expect("at least one action")
}

/// Outcome probabilities of two fixed policies by enumerating every
/// joint-action history.
pub fn enumerate_pair<G: MarkovGame>(game: &G, left: &dyn Policy<G::Obs>, right: &dyn Policy<G::Obs>) -> OutcomeProbs {
    let mut out = OutcomeProbs::zero();
    walk(game, left, right, &game.initial_state(), Q::one(), &mut out);
    out
}

fn walk<G: MarkovGame>(game: &G, l: &dyn Policy<G::Obs>, r: &dyn Policy<G::Obs>, s: &G::State, mass: Q, out: &mut OutcomeProbs) {
    if let Some(o) = game.outcome(s) {
        out.add(o, Side::Left, &mass);
        return;
    }
    let pl = l.exact_probs(&game.observe(s, Side::Left));
    let pr = r.exact_probs(&game.observe(s, Side::Right));
    for (a, x) in pl.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
        for (b, y) in pr.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
            walk(game, l, r, &game.transition(s, a, b), &mass * x * y, out);
        }
    }
}

/// Solves the square system `m x = rhs` by Gaussian elimination; `None`
/// when singular.
pub fn solve_linear(m: &[Vec<Q>], rhs: &[Q]) -> Option<Vec<Q>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m.iter().zip(rhs).map(|(row, r)| row.iter().cloned().chain([r.clone()]).collect()).collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v /= &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let prow = a[col].clone();
                for (v, pv) in a[r].iter_mut().zip(&prow) {
                    *v -= &f * pv;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n].clone()).collect())
}

/// Equilibria of a zero-sum matrix game by support enumeration over
/// equal-size supports: `(x, y, value)` triples.
pub fn support_enumeration(a: &[Vec<Q>]) -> Vec<(Vec<Q>, Vec<Q>, Q)> {
    let (m, n) = (a.len(), a[0].len());
    let subsets = |k: usize, n: usize| -> Vec<Vec<usize>> {
        (0u32..1 << n).filter(|b| b.count_ones() as usize == k).map(|b| (0..n).filter(|i| b >> i & 1 == 1).collect()).collect()
    };
    let mut out = Vec::new();
    for k in 1..=m.min(n) {
        for rows in subsets(k, m) {
            for cols in subsets(k, n) {
                // Unknowns: the support weights and the value.
                let mut sys_x = Vec::new();
                let mut rhs = Vec::new();
                for &j in &cols {
                    let mut row: Vec<Q> = rows.iter().map(|&i| a[i][j].clone()).collect();
                    row.push(-Q::one());
                    sys_x.push(row);
                    rhs.push(Q::zero());
                }
                sys_x.push(rows.iter().map(|_| Q::one()).chain([Q::zero()]).collect());
                rhs.push(Q::one());
                let mut sys_y = Vec::new();
                for &i in &rows {
                    let mut row: Vec<Q> = cols.iter().map(|&j| a[i][j].clone()).collect();
                    row.push(-Q::one());
                    sys_y.push(row);
                }
                sys_y.push(cols.iter().map(|_| Q::one()).chain([Q::zero()]).collect());
                let (Some(xs), Some(ys)) = (solve_linear(&sys_x, &rhs), solve_linear(&sys_y, &rhs)) else { continue };
                let (v, w) = (xs[k].clone(), ys[k].clone());
                if v != w || xs[..k].iter().chain(&ys[..k]).any(|p| *p < Q::zero()) {
                    continue;
                }
                let mut x = vec![Q::zero(); m];
                let mut y = vec![Q::zero(); n];
                for (t, &i) in rows.iter().enumerate() {
                    x[i] = xs[t].clone();
                }
                for (t, &j) in cols.iter().enumerate() {
                    y[j] = ys[t].clone();
                }
                // Equilibrium check: no pure deviation improves either side.
                let col_pay = |j: usize| (0..m).fold(Q::zero(), |s, i| s + &x[i] * &a[i][j]);
                let row_pay = |i: usize| (0..n).fold(Q::zero(), |s, j| s + &a[i][j] * &y[j]);
                if (0..n).all(|j| col_pay(j) >= v) && (0..m).all(|i| row_pay(i) <= v) && !out.iter().any(|e: &(Vec<Q>, Vec<Q>, Q)| e.0 == x && e.1 == y) {
                    out.push((x, y, v));
                }
            }
        }
    }
    out
}

/// Closed-form solution of a 2×2 zero-sum game: a saddle point if there is
/// one, otherwise the unique completely mixed equilibrium.
pub fn closed_form_2x2(a: &[Vec<Q>]) -> (Vec<Q>, Vec<Q>, Q) {
    let (p, qq, r, s) = (&a[0][0], &a[0][1], &a[1][0], &a[1][1]);
    let lower = std::cmp::max(std::cmp::min(p, qq), std::cmp::min(r, s)).clone();
    let upper = std::cmp::min(std::cmp::max(p, r), std::cmp::max(qq, s)).clone();
    if lower == upper {
        // Pure value; strategies come from support enumeration.
        let e = support_enumeration(a);
        let (x, y, _) = e.into_iter().next().expect("a saddle point is an equilibrium");
        return (x, y, lower);
    }
    let d = p - qq - r + s;
    let x0 = (s - r) / &d;
    let y0 = (s - qq) / &d;
    let v = (p * s - qq * r) / &d;
    (vec![x0.clone(), Q::one() - x0], vec![y0.clone(), Q::one() - y0], v)
}

/// Rock-paper-scissors payoffs for the row player.
pub fn rps_matrix() -> Vec<Vec<Q>> {
    let i = |v: i64| Q::from_integer(v.into());
    vec![vec![i(0), i(-1), i(1)], vec![i(1), i(0), i(-1)], vec![i(-1), i(1), i(0)]]
}

pub fn random_matrix(s: &mut Stream, m: usize, n: usize) -> Vec<Vec<Q>> {
    (0..m).map(|_| (0..n).map(|_| q(s.range(-20, 20), s.range(1, 9))).collect()).collect()
}

pub fn outcome_sum(o: Outcome) -> i32 {
    o.sparse(Side::Left) + o.sparse(Side::Right)
}
