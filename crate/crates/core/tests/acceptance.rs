//! Acceptance suite: one PASS/FAIL line per criterion, each checked at its
//! stated tolerance and time limit.

mod common;

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashSet};
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use arenaladder_core::engine::{enumerate_observations, reset, step, EngineConfig, GameState, MiniBrawl, ObsMode, SymbolicObs};
use arenaladder_core::eval::{elo_expected, full_game_train, run_tournament, RatingTable, DEFAULT_ELO, DEFAULT_K};
use arenaladder_core::exact::{evaluate_pair, exact_best_response, winrate_from_value, NODE_CAP};
use arenaladder_core::game::{MarkovGame, Outcome, Side};
use arenaladder_core::learner::{independent_learn, train_learner, LearnConfig, QLearner};
use arenaladder_core::matrix_game::MatrixGame;
use arenaladder_core::metagame::{
    population_loop, run_league, solve_zero_sum, ExactOracle, LeagueConfig, LeagueRun, Member, MetaSolver, PayoffMode,
    PopulationConfig, Role,
};
use arenaladder_core::num::{q, to_f64, Q};
use arenaladder_core::policy::{cpu_policy, MixturePolicy, PolicyId, SharedPolicy, TabularPolicy};
use arenaladder_core::presets;
use common::{brute_force_br, closed_form_2x2, enumerate_pair, random_matrix, random_policy, random_tiny_config, rps_matrix, support_enumeration, Stream};
use num_rational::Rational64;
use num_traits::{One, Zero};

fn report(name: &str, pass: bool, elapsed: Duration, limit: Duration, detail: &str) {
    let pass = pass && elapsed < limit;
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("{verdict} {name}: {detail} [{:.1}s, limit {}s]", elapsed.as_secs_f64(), limit.as_secs());
    assert!(pass, "{name}: {detail}");
}

fn minutes(m: u64) -> Duration {
    Duration::from_secs(60 * m)
}

// Nash solver

#[test]
fn nash_solver_exactness() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let third = vec![q(1, 3); 3];
    let rps = solve_zero_sum(&rps_matrix()).unwrap();
    if rps.row_strategy.weights() != third.as_slice() || rps.col_strategy.weights() != third.as_slice() || !rps.value.is_zero() {
        failures.push(String::from("rps"));
    }
    let pennies = solve_zero_sum(&[vec![q(1, 2), q(-1, 2)], vec![q(-1, 2), q(1, 2)]]).unwrap();
    let half = vec![q(1, 2); 2];
    if pennies.row_strategy.weights() != half.as_slice() || pennies.col_strategy.weights() != half.as_slice() {
        failures.push(String::from("matching pennies"));
    }
    let mut s = Stream(2024);
    let mut closed = 0;
    for i in 0..200 {
        let (m, n) = (2 + s.below(5) as usize, 2 + s.below(5) as usize);
        let (m, n) = if i < 40 { (2, 2) } else if i < 80 { (3, 3) } else { (m, n) };
        let a = random_matrix(&mut s, m, n);
        let sol = solve_zero_sum(&a).unwrap();
        let (x, y) = (sol.row_strategy.weights(), sol.col_strategy.weights());
        let lower = (0..n).map(|j| (0..m).fold(Q::zero(), |t, r| t + &x[r] * &a[r][j])).min().unwrap();
        let upper = (0..m).map(|r| (0..n).fold(Q::zero(), |t, j| t + &a[r][j] * &y[j])).max().unwrap();
        if lower != sol.value || upper != sol.value {
            failures.push(format!("gap on matrix {i}"));
        }
        if m == 2 && n == 2 {
            let (_, _, v) = closed_form_2x2(&a);
            let e = support_enumeration(&a);
            // A unique equilibrium must be the one returned.
            let unique_ok = e.len() != 1 || (e[0].0 == x && e[0].1 == y);
            if v != sol.value || !unique_ok {
                failures.push(format!("closed form on matrix {i}"));
            }
            closed += 1;
        } else if m == 3 && n == 3 {
            let e = support_enumeration(&a);
            let unique_ok = e.len() != 1 || (e[0].0 == x && e[0].1 == y);
            if e.is_empty() || e.iter().any(|(_, _, v)| *v != sol.value) || !unique_ok {
                failures.push(format!("support enumeration on matrix {i}"));
            }
            closed += 1;
        }
    }
    let detail = format!("rps and pennies exact, 200 random matrices without duality gap, {closed} checked in closed form; failures {failures:?}");
    report("nash-solver-exactness", failures.is_empty(), start.elapsed(), Duration::from_secs(30), &detail);
}

// Exact best response

/// Observations `side` can meet against `opp`, in a fixed order.
fn responder_observations(game: &MiniBrawl, opp: &TabularPolicy<SymbolicObs>, side: Side) -> Vec<SymbolicObs> {
    let mut seen = HashSet::new();
    let mut obs = BTreeSet::new();
    let mut stack = vec![game.initial_state()];
    let n = game.num_actions();
    while let Some(s) = stack.pop() {
        if game.outcome(&s).is_some() || !seen.insert(s.clone()) {
            continue;
        }
        obs.insert(game.observe(&s, side));
        let dist = opp.get(&game.observe(&s, side.opponent())).to_vec();
        for a in 0..n {
            for (b, p) in dist.iter().enumerate() {
                if *p > 0.0 {
                    stack.push(match side {
                        Side::Left => game.transition(&s, a, b),
                        Side::Right => game.transition(&s, b, a),
                    });
                }
            }
        }
    }
    obs.into_iter().collect()
}

/// Best value over every deterministic observation policy, by listing them
/// all; `None` when there are more than `limit`.
fn enumerate_responders(game: &MiniBrawl, opp: &TabularPolicy<SymbolicObs>, side: Side, limit: u64) -> Option<Q> {
    let obs = responder_observations(game, opp, side);
    let n = game.num_actions() as u64;
    let count = n.checked_pow(obs.len() as u32).filter(|c| *c <= limit)?;
    let mut best: Option<Q> = None;
    for code in 0..count {
        let mut p = TabularPolicy::uniform(n as usize);
        let mut c = code;
        for o in &obs {
            p.set_deterministic(o.clone(), (c % n) as usize);
            c /= n;
        }
        let out = match side {
            Side::Left => enumerate_pair(game, &p, opp),
            Side::Right => enumerate_pair(game, opp, &p).swap(),
        };
        let v = out.value();
        if best.as_ref().is_none_or(|b| v > *b) {
            best = Some(v);
        }
    }
    best
}

#[test]
fn exact_best_response_matches_brute_force() {
    let start = Instant::now();
    let mut s = Stream(77);
    let mut mismatches = Vec::new();
    let (mut instances, mut listed, mut max_obs) = (0, 0, 0);
    while instances < 50 {
        let h = 1 + (instances % 6) as u16;
        // Largest action count whose history tree stays small.
        let k = (2..=8usize).rev().find(|&k| (k as u64).pow(2 * h as u32) <= 70_000).unwrap();
        let config = random_tiny_config(&mut s, h, k);
        let observations = enumerate_observations(&config, ObsMode::Symbolic).unwrap().len();
        if observations > 500 {
            continue;
        }
        max_obs = max_obs.max(observations);
        let game = MiniBrawl::new(config).unwrap();
        let side = if instances % 2 == 0 { Side::Left } else { Side::Right };
        let opp_policy = random_policy(&game, side.opponent(), &mut s);
        let opp = MixturePolicy::single(PolicyId::new("R", side.opponent(), instances as u64), Arc::new(opp_policy.clone()) as SharedPolicy<SymbolicObs>);
        let br = exact_best_response(&game, &opp, side, NODE_CAP).unwrap();
        if br.value != brute_force_br(&game, &opp, side) {
            mismatches.push(format!("history search h={h} k={k}"));
        }
        if let Some(v) = enumerate_responders(&game, &opp_policy, side, 4096) {
            listed += 1;
            if v != br.value {
                mismatches.push(format!("policy listing h={h} k={k}"));
            }
        }
        instances += 1;
    }
    let detail = format!(
        "50 random tiny games (H 1 to 6, at most {max_obs} observations): value equals the history-tree maximum in all, and the listed-policy maximum in the {listed} small enough to list; mismatches {mismatches:?}"
    );
    report("exact-br-oracle-equivalence", mismatches.is_empty(), start.elapsed(), minutes(5), &detail);
}

// Shared tiny-game experiments

const BUDGET: u64 = 20_000;
const SEEDS: u64 = 5;

fn tiny_game() -> &'static MiniBrawl {
    static GAME: OnceLock<MiniBrawl> = OnceLock::new();
    GAME.get_or_init(|| MiniBrawl::new(presets::tiny()).unwrap())
}

fn learn(seed: u64) -> LearnConfig {
    LearnConfig { budget_steps: BUDGET, seed, ..LearnConfig::default() }
}

/// CPU-pretrained learner for `seed`: Q-learning against level 8.
fn pretrained(seed: u64) -> QLearner<SymbolicObs> {
    let g = tiny_game();
    let cpu = MixturePolicy::single(PolicyId::cpu(8, Side::Right), Arc::new(cpu_policy(8, &g.config).unwrap()) as SharedPolicy<SymbolicObs>);
    train_learner(g, &cpu, Side::Left, &learn(seed)).unwrap()
}

/// Exact score of the best response against `target` playing `side`.
fn exploit(target: &MixturePolicy<SymbolicObs>, side: Side) -> Q {
    winrate_from_value(&exact_best_response(tiny_game(), target, side.opponent(), NODE_CAP).unwrap().value)
}

fn alone(p: SharedPolicy<SymbolicObs>, side: Side) -> MixturePolicy<SymbolicObs> {
    MixturePolicy::single(PolicyId::new("T", side, 0), p)
}

struct SeedRun {
    pretrained: Q,
    psro: Q,
    fsp: Q,
    league: LeagueRun<SymbolicObs>,
    league_exploit: Q,
}

fn league_config(seed: u64) -> LeagueConfig {
    LeagueConfig { cycles: 3, br_budget: BUDGET, learn: learn(seed), payoff: PayoffMode::Exact { cap: NODE_CAP }, seed, ..LeagueConfig::default() }
}

fn seed_runs() -> &'static (Vec<SeedRun>, Duration) {
    static RUNS: OnceLock<(Vec<SeedRun>, Duration)> = OnceLock::new();
    RUNS.get_or_init(|| {
        let start = Instant::now();
        let g = tiny_game();
        let runs = (0..SEEDS)
            .map(|seed| {
                let pre = pretrained(seed);
                let h0: SharedPolicy<SymbolicObs> = Arc::new(pre.greedy());
                let pretrained = exploit(&alone(h0.clone(), Side::Left), Side::Left);
                let init: [Member<SymbolicObs>; 2] =
                    [(PolicyId::new("Init", Side::Left, 0), h0.clone()), (PolicyId::new("Init", Side::Right, 0), h0)];
                let [psro, fsp] = [MetaSolver::Psro, MetaSolver::Fsp].map(|solver| {
                    let cfg = PopulationConfig { solver, iterations: 8, payoff: PayoffMode::Exact { cap: NODE_CAP }, seed };
                    let run = population_loop(g, &cfg, &ExactOracle { cap: NODE_CAP }, init.clone()).unwrap();
                    exploit(&run.mixture(Side::Left).unwrap(), Side::Left)
                });
                let league = run_league(g, &pre, &league_config(seed)).unwrap();
                let [left, _] = league.nash_mixtures().unwrap();
                let league_exploit = exploit(&left, Side::Left);
                SeedRun { pretrained, psro, fsp, league, league_exploit }
            })
            .collect();
        (runs, start.elapsed())
    })
}

/// The shared runs and the time charged to a criterion that uses them: its
/// own time plus the full cost of the shared runs, counted once.
fn shared_runs(start: Instant) -> (&'static [SeedRun], impl Fn() -> Duration) {
    let before = start.elapsed();
    let (runs, cost) = seed_runs();
    let waited = start.elapsed() - before;
    let cost = *cost;
    (runs.as_slice(), move || start.elapsed() - waited + cost)
}

fn fmt(v: &Q) -> String {
    format!("{:.3}", to_f64(v))
}

// PSRO

fn psro_on_rps(left: &str, right: &str, iterations: usize) -> Option<usize> {
    let g = MatrixGame::rock_paper_scissors();
    let point = |name: &str| Arc::new(TabularPolicy::<()>::point_mass(3, g.action_index(name).unwrap())) as SharedPolicy<()>;
    let init = [(PolicyId::new("Init", Side::Left, 0), point(left)), (PolicyId::new("Init", Side::Right, 0), point(right))];
    let cfg = PopulationConfig { solver: MetaSolver::Psro, iterations, payoff: PayoffMode::Exact { cap: NODE_CAP }, seed: 0 };
    let run = population_loop(&g, &cfg, &ExactOracle { cap: NODE_CAP }, init).unwrap();
    run.history.iter().find_map(|h| {
        let mix = MixturePolicy::new(run.populations[0][..h.sizes[0]].to_vec(), h.meta[0].clone()).unwrap();
        let gap = to_f64(&exact_best_response(&g, &mix, Side::Right, NODE_CAP).unwrap().value);
        (gap <= 1e-9).then_some(h.t)
    })
}

#[test]
fn psro_convergence() {
    let start = Instant::now();
    let rps = psro_on_rps("rock", "paper", 4);
    let (runs, elapsed) = shared_runs(start);
    let below_pre = runs.iter().filter(|r| r.psro < r.pretrained).count();
    let below_fsp = runs.iter().filter(|r| r.psro < r.fsp).count();
    let both = runs.iter().filter(|r| r.psro < r.pretrained && r.psro < r.fsp).count();
    let per_seed: Vec<String> =
        runs.iter().enumerate().map(|(s, r)| format!("s{s} pre {} psro {} fsp {}", fmt(&r.pretrained), fmt(&r.psro), fmt(&r.fsp))).collect();
    let detail = format!(
        "rps solved at iteration {rps:?}; tiny after 8 iterations: psro below pretrained in {below_pre}/5, below fsp in {below_fsp}/5, both in {both}/5 ({})",
        per_seed.join("; ")
    );
    let pass = rps.is_some() && both >= 4;
    report("psro-convergence", pass, elapsed(), minutes(15), &detail);
}

// Exploitability ordering across algorithms

#[test]
fn exploitability_ordering() {
    let start = Instant::now();
    let (runs, elapsed) = shared_runs(start);
    let g = tiny_game();
    let mut ok = 0;
    let mut per_seed = Vec::new();
    for (seed, r) in runs.iter().enumerate() {
        let seed = seed as u64;
        // Matched budget: as many steps as the eight best responses of the
        // population methods.
        let left = LearnConfig { budget_steps: 8 * BUDGET, seed: 1000 + seed, ..LearnConfig::default() };
        let right = LearnConfig { seed: 2000 + seed, ..left.clone() };
        let ippo = independent_learn(g, &left, &right).unwrap();
        let ippo = exploit(&alone(Arc::new(ippo.left), Side::Left), Side::Left);
        let slow = LearnConfig { step_ratio: Rational64::new(1, 10), ..right };
        let two = independent_learn(g, &left, &slow).unwrap();
        let two = exploit(&alone(Arc::new(two.right), Side::Right), Side::Right);
        let best = std::cmp::max(&r.psro, &r.league_exploit);
        let mid_low = std::cmp::min(&ippo, &two);
        let mid_high = std::cmp::max(&ippo, &two);
        let pass = best < mid_low && *mid_high < r.pretrained;
        ok += pass as usize;
        per_seed.push(format!(
            "s{seed} psro {} league {} ippo {} 2t {} pre {}",
            fmt(&r.psro),
            fmt(&r.league_exploit),
            fmt(&ippo),
            fmt(&two),
            fmt(&r.pretrained)
        ));
    }
    let detail = format!("ordering {{psro, league}} < {{ippo, 2t}} < pretrained held in {ok}/5 ({})", per_seed.join("; "));
    report("exploitability-ordering", ok >= 4, elapsed(), minutes(30), &detail);
}

// Population sizes

#[test]
fn population_sizes() {
    let start = Instant::now();
    let g = MatrixGame::rock_paper_scissors();
    let rock = Arc::new(TabularPolicy::<()>::point_mass(3, 0)) as SharedPolicy<()>;
    let mut bad = Vec::new();
    for solver in [MetaSolver::Fsp, MetaSolver::Psro] {
        for iterations in 1..=10 {
            let init = [(PolicyId::new("Init", Side::Left, 0), rock.clone()), (PolicyId::new("Init", Side::Right, 0), rock.clone())];
            let cfg = PopulationConfig { solver, iterations, payoff: PayoffMode::Exact { cap: NODE_CAP }, seed: 0 };
            let run = population_loop(&g, &cfg, &ExactOracle { cap: NODE_CAP }, init).unwrap();
            for h in &run.history {
                if h.sizes != [1 + h.t.div_ceil(2), 1 + h.t / 2] {
                    bad.push(format!("{} T={iterations} t={}: {:?}", solver.name(), h.t, h.sizes));
                }
            }
            let last = [run.populations[0].len(), run.populations[1].len()];
            if last != [1 + iterations.div_ceil(2), 1 + iterations / 2] {
                bad.push(format!("{} T={iterations}: final {last:?}", solver.name()));
            }
        }
    }
    let detail = format!("|mu_t| = 1 + ceil(t/2), |nu_t| = 1 + floor(t/2) for every t <= T <= 10 under fsp and psro; violations {bad:?}");
    report("population-sizes", bad.is_empty(), start.elapsed(), Duration::from_secs(60), &detail);
}

// Elo

#[test]
fn elo_suite() {
    let start = Instant::now();
    let expected = elo_expected(1200.0, 1000.0);
    let oracle = 1.0 / (1.0 + 10f64.powf(-0.5));
    let formula = (expected - oracle).abs() < 1e-12;

    let g = tiny_game();
    let pop: Vec<Member<SymbolicObs>> = (0..5u64)
        .map(|i| (PolicyId::new("R", Side::Left, i), Arc::new(random_policy(g, Side::Left, &mut Stream(500 + i))) as SharedPolicy<SymbolicObs>))
        .collect();
    let table = run_tournament(g, &pop, 50, DEFAULT_K, 9).unwrap();
    let drift = (table.total() - 5.0 * DEFAULT_ELO).abs();
    let conserved = table.history.len() == 1000 && drift <= 1e-9;

    // Constant-action policies where each earlier one beats each later one
    // with certainty from both sides.
    let n = g.num_actions();
    let beats = |a: usize, b: usize| {
        let (pa, pb) = (TabularPolicy::point_mass(n, a), TabularPolicy::point_mass(n, b));
        evaluate_pair(g, &pa, &pb, NODE_CAP).unwrap().win.is_one() && evaluate_pair(g, &pb, &pa, NODE_CAP).unwrap().loss.is_one()
    };
    let triple = (0..n)
        .flat_map(|a| (0..n).flat_map(move |b| (0..n).map(move |c| [a, b, c])))
        .find(|&[a, b, c]| a != b && b != c && a != c && beats(a, b) && beats(b, c) && beats(a, c))
        .expect("a transitive triple of constant actions");
    let players: Vec<Member<SymbolicObs>> = triple
        .iter()
        .zip(["A", "B", "C"])
        .map(|(&a, name)| (PolicyId::new(name, Side::Left, a as u64), Arc::new(TabularPolicy::point_mass(n, a)) as SharedPolicy<SymbolicObs>))
        .collect();
    let t = run_tournament(g, &players, 50, DEFAULT_K, 1).unwrap();
    let r: Vec<f64> = players.iter().map(|m| t.rating(&m.0).unwrap()).collect();
    let ordered = r[0] > r[1] && r[1] > r[2];

    // The same update applied by hand keeps the total for any outcome list.
    let ids: Vec<PolicyId> = (0..4).map(|i| PolicyId::new("P", Side::Left, i)).collect();
    let mut hand = RatingTable::new(ids.clone(), DEFAULT_ELO, DEFAULT_K).unwrap();
    let mut s = Stream(3);
    for _ in 0..1000 {
        let (i, j) = (s.below(4) as usize, s.below(4) as usize);
        if i != j {
            let o = [Outcome::LeftWins, Outcome::Draw, Outcome::RightWins][s.below(3) as usize];
            hand.record(&ids[i], &ids[j], o).unwrap();
        }
    }
    let hand_drift = (hand.total() - 4.0 * DEFAULT_ELO).abs();

    let names: Vec<String> = triple.iter().map(|&a| g.action_name(a)).collect();
    let detail = format!(
        "expected(1200, 1000) = {expected:.15} vs {oracle:.15}; 1000-match tournament drift {drift:.2e}, random-outcome drift {hand_drift:.2e}; {} > {} > {} rated {:.1} > {:.1} > {:.1}",
        names[0], names[1], names[2], r[0], r[1], r[2]
    );
    report("elo-suite", formula && conserved && hand_drift <= 1e-9 && ordered, start.elapsed(), minutes(5), &detail);
}

// Curriculum

#[test]
fn curriculum_reaches_every_level() {
    let start = Instant::now();
    let g = MiniBrawl::new(presets::small()).unwrap();
    let levels: Vec<u8> = (1..=8).collect();
    let lc = LearnConfig { budget_steps: 200_000, seed: 0, ..LearnConfig::default() };
    let run = full_game_train(&g, &levels, &lc, 10, 200).unwrap();
    let min = run.final_ladder.iter().map(|e| e.win_rate).fold(f64::INFINITY, f64::min);
    let mut argmax_ok = true;
    for st in &run.schedules {
        let w = st.schedule.weights();
        let top = w.iter().max().unwrap();
        let low = st.win_rates.iter().min().unwrap();
        let heaviest: Vec<usize> = (0..w.len()).filter(|&i| w[i] == *top).collect();
        let weakest: Vec<usize> = (0..w.len()).filter(|&i| st.win_rates[i] == *low).collect();
        argmax_ok &= heaviest == weakest;
    }
    let ladder: Vec<String> = run.final_ladder.iter().map(|e| format!("{}:{:.3}", e.level, e.win_rate)).collect();
    let detail = format!(
        "final win rates {}; min {min:.3} (needs >= 0.9); schedule argmax equals the weakest level in every one of {} epochs: {argmax_ok}",
        ladder.join(" "),
        run.schedules.len()
    );
    report("curriculum", min >= 0.9 && argmax_ok, start.elapsed(), minutes(20), &detail);
}

// Engine invariants

fn trajectory_digest(states: &[GameState]) -> u64 {
    let mut h = DefaultHasher::new();
    states.hash(&mut h);
    h.finish()
}

#[test]
fn engine_invariants() {
    let start = Instant::now();
    let mut specials = EngineConfig { arena_width: 9, horizon: 40, max_hp: 40, ..EngineConfig::default() };
    specials.hard_coded_specials = true;
    let configs: Vec<EngineConfig> = [presets::tiny(), presets::small(), EngineConfig::default(), specials]
        .into_iter()
        .map(|mut c| {
            c.reward_lambda = Rational64::one();
            c.bonus_scale = Rational64::zero();
            c
        })
        .collect();
    let legal: Vec<_> = configs.iter().map(|c| c.legal_actions()).collect();
    let mut s = Stream(99);
    let mut violations: Vec<String> = Vec::new();
    let mut steps = 0u64;
    let episodes = 100_000u64;
    for e in 0..episodes {
        let c = (e % configs.len() as u64) as usize;
        let (config, legal) = (&configs[c], &legal[c]);
        let mut states = vec![reset(config).unwrap()];
        let mut mirrored = states[0].mirror(config);
        let mut actions = Vec::new();
        let note = |v: &mut Vec<String>, what: &str| {
            if v.len() < 5 {
                v.push(format!("episode {e}: {what}"));
            }
        };
        while !states.last().unwrap().terminal {
            let prev = states.last().unwrap();
            let (a, b) = (s.pick(legal), s.pick(legal));
            let r = step(prev, a, b, config).unwrap();
            steps += 1;
            if r.sparse[0] + r.sparse[1] != 0 || (!r.terminal && r.sparse != [0, 0]) {
                note(&mut violations, "sparse reward");
            }
            if !(r.dense[0] + r.dense[1]).is_zero() {
                note(&mut violations, "dense reward");
            }
            if (0..2).any(|i| r.state.fighters[i].hp > prev.fighters[i].hp) || r.state.check_invariants(config).is_err() {
                note(&mut violations, "state invariant");
            }
            mirrored = arenaladder_core::engine::advance(&mirrored, b, a, config).unwrap();
            if mirrored != r.state.mirror(config) {
                note(&mut violations, "mirror");
            }
            actions.push((a, b));
            states.push(r.state);
        }
        let mut replay = vec![reset(config).unwrap()];
        for &(a, b) in &actions {
            replay.push(arenaladder_core::engine::advance(replay.last().unwrap(), a, b, config).unwrap());
        }
        if trajectory_digest(&replay) != trajectory_digest(&states) || replay != states {
            note(&mut violations, "replay digest");
        }
    }
    let detail = format!(
        "{episodes} random episodes ({steps} steps over tiny, small, default and specials): replay digests, sparse and dense zero-sum, hp monotone, mirror symmetry; violations {violations:?}"
    );
    report("engine-invariants", violations.is_empty(), start.elapsed(), minutes(20), &detail);
}

// League

#[test]
fn league_mechanics() {
    let start = Instant::now();
    let (runs, elapsed) = shared_runs(start);
    let g = tiny_game();
    let mut bookkeeping = Vec::new();
    let mut exploited = 0;
    let mut per_seed = Vec::new();
    for (seed, r) in runs.iter().enumerate() {
        let run = &r.league;
        if run.shapes != vec![(4, 4), (8, 8), (12, 12)] || !run.payoff.unknown().is_empty() {
            bookkeeping.push(format!("s{seed} shapes {:?}", run.shapes));
        }
        for side in Side::BOTH {
            for role in Role::ALL {
                let a = run.roster.agent(side, role).unwrap();
                // Training runs whole episodes, so a cycle may overrun its budget by
                // less than one episode.
                let horizon = g.config.horizon as u64;
                if a.checkpoints.len() != 3 || a.trained_steps < 3 * BUDGET || a.trained_steps >= 3 * (BUDGET + horizon) {
                    bookkeeping.push(format!("s{seed} {} {}: {} checkpoints, {} steps", side.name(), role.name(), a.checkpoints.len(), a.trained_steps));
                }
            }
        }
        // Each side's first main-exploiter checkpoint against the frozen
        // initial main agent.
        let scores: Vec<Q> = Side::BOTH
            .iter()
            .map(|&side| {
                let me = &run.roster.agent(side, Role::MainExploiter).unwrap().checkpoints[0].1;
                match side {
                    Side::Left => evaluate_pair(g, me.as_ref(), run.initial.as_ref(), NODE_CAP).unwrap().score(),
                    Side::Right => evaluate_pair(g, run.initial.as_ref(), me.as_ref(), NODE_CAP).unwrap().swap().score(),
                }
            })
            .collect();
        let ok = scores.iter().all(|s| *s >= q(7, 10));
        exploited += ok as usize;
        per_seed.push(format!("s{seed} {}/{}", fmt(&scores[0]), fmt(&scores[1])));
    }
    let detail = format!(
        "3 cycles: shapes (4,4),(8,8),(12,12) with 3 checkpoints per agent, bookkeeping errors {bookkeeping:?}; first ME checkpoint vs initial MA (left/right) >= 0.7 in {exploited}/5 ({})",
        per_seed.join("; ")
    );
    report("league-mechanics", bookkeeping.is_empty() && exploited >= 4, elapsed(), minutes(30), &detail);
}
