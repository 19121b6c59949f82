mod common;

use std::sync::Arc;

use arenaladder_core::engine::{MiniBrawl, SymbolicObs};
use arenaladder_core::exact::{exact_best_response, NODE_CAP};
use arenaladder_core::game::Side;
use arenaladder_core::learner::{train_learner, LearnConfig};
use arenaladder_core::matrix_game::MatrixGame;
use arenaladder_core::metagame::{
    estimate_payoff, exact_payoff, league_step, pfsp_weights, population_loop, run_league, solve_nash, solve_zero_sum, Cell,
    ExactOracle, LeagueConfig, Member, MetaSolver, PayoffMatrix, PayoffMode, PopulationConfig, Role,
};
use arenaladder_core::num::{q, Q};
use arenaladder_core::policy::{cpu_policy, MetaStrategy, MixturePolicy, PolicyId, SharedPolicy, TabularPolicy};
use arenaladder_core::{presets, Error};
use common::{random_matrix, rps_matrix, support_enumeration, Stream};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn guarantees(a: &[Vec<Q>], x: &[Q], y: &[Q]) -> (Q, Q) {
    let lower = (0..a[0].len()).map(|j| (0..a.len()).fold(Q::zero(), |s, i| s + &x[i] * &a[i][j])).min().unwrap();
    let upper = (0..a.len()).map(|i| (0..a[0].len()).fold(Q::zero(), |s, j| s + &a[i][j] * &y[j])).max().unwrap();
    (lower, upper)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nash_has_no_duality_gap(seed in any::<u64>(), m in 1usize..7, n in 1usize..7) {
        let a = random_matrix(&mut Stream(seed), m, n);
        let s = solve_zero_sum(&a).unwrap();
        let (x, y) = (s.row_strategy.weights(), s.col_strategy.weights());
        prop_assert_eq!(x.iter().fold(Q::zero(), |t, v| t + v), Q::one());
        prop_assert_eq!(y.iter().fold(Q::zero(), |t, v| t + v), Q::one());
        let (lower, upper) = guarantees(&a, x, y);
        prop_assert_eq!(&lower, &s.value);
        prop_assert_eq!(&upper, &s.value);
    }

    #[test]
    fn nash_value_matches_support_enumeration(seed in any::<u64>(), m in 1usize..4, n in 1usize..4) {
        let a = random_matrix(&mut Stream(seed), m, n);
        let s = solve_zero_sum(&a).unwrap();
        let eqs = support_enumeration(&a);
        prop_assert!(!eqs.is_empty());
        for (_, _, v) in &eqs {
            prop_assert_eq!(v, &s.value);
        }
    }

    #[test]
    fn shifting_payoffs_shifts_the_value(seed in any::<u64>(), c in -5i64..5) {
        let a = random_matrix(&mut Stream(seed), 3, 4);
        let b: Vec<Vec<Q>> = a.iter().map(|r| r.iter().map(|v| v + Q::from_integer(c.into())).collect()).collect();
        prop_assert_eq!(solve_zero_sum(&b).unwrap().value, solve_zero_sum(&a).unwrap().value + Q::from_integer(c.into()));
    }

    #[test]
    fn pfsp_weights_are_a_distribution(rates in prop::collection::vec(0i64..=10, 1..8)) {
        let rates: Vec<Q> = rates.into_iter().map(|r| q(r, 10)).collect();
        let w = pfsp_weights(&rates).unwrap();
        prop_assert_eq!(w.iter().fold(Q::zero(), |t, v| t + v), Q::one());
        // Harder opponents (lower win rates) never get less weight.
        for i in 0..rates.len() {
            for j in 0..rates.len() {
                if rates[i] < rates[j] {
                    prop_assert!(w[i] >= w[j]);
                }
            }
        }
    }
}

#[test]
fn classic_games() {
    let s = solve_zero_sum(&rps_matrix()).unwrap();
    assert_eq!(s.row_strategy.weights(), &[q(1, 3), q(1, 3), q(1, 3)]);
    assert_eq!(s.col_strategy.weights(), &[q(1, 3), q(1, 3), q(1, 3)]);
    let pennies = vec![vec![Q::one(), -Q::one()], vec![-Q::one(), Q::one()]];
    let s = solve_zero_sum(&pennies).unwrap();
    assert_eq!(s.row_strategy.weights(), &[q(1, 2), q(1, 2)]);
    assert!(s.value.is_zero());
}

fn rps_point(name: &str) -> SharedPolicy<()> {
    let g = MatrixGame::rock_paper_scissors();
    Arc::new(TabularPolicy::<()>::point_mass(3, g.action_index(name).unwrap()))
}

#[test]
fn population_sizes_follow_the_alternation() {
    let g = MatrixGame::rock_paper_scissors();
    for solver in [MetaSolver::Fsp, MetaSolver::Psro] {
        let init = [(PolicyId::new("Init", Side::Left, 0), rps_point("rock")), (PolicyId::new("Init", Side::Right, 0), rps_point("rock"))];
        let cfg = PopulationConfig { solver, iterations: 10, payoff: PayoffMode::Exact { cap: NODE_CAP }, seed: 0 };
        let run = population_loop(&g, &cfg, &ExactOracle { cap: NODE_CAP }, init).unwrap();
        for h in &run.history {
            assert_eq!(h.sizes, [1 + h.t.div_ceil(2), 1 + h.t / 2], "{} t={}", solver.name(), h.t);
            assert_eq!(h.extended, if h.t % 2 == 1 { Side::Left } else { Side::Right });
            assert_eq!(h.meta[0].len(), h.sizes[0]);
            assert_eq!(h.meta[1].len(), h.sizes[1]);
        }
        for (t, p) in run.payoffs.iter().enumerate() {
            assert_eq!(p.shape(), (1 + t.div_ceil(2), 1 + t / 2));
            assert!(p.unknown().is_empty());
        }
        if solver == MetaSolver::Fsp {
            assert!(run.history.iter().all(|h| h.meta[h.extended.index()] == MetaStrategy::uniform(h.sizes[h.extended.index()])));
        }
    }
}

/// First iteration whose left meta-strategy is unexploitable, if any.
fn psro_solve_time(left: &str, right: &str, iterations: usize) -> Option<usize> {
    let g = MatrixGame::rock_paper_scissors();
    let init = [(PolicyId::new("Init", Side::Left, 0), rps_point(left)), (PolicyId::new("Init", Side::Right, 0), rps_point(right))];
    let cfg = PopulationConfig { solver: MetaSolver::Psro, iterations, payoff: PayoffMode::Exact { cap: NODE_CAP }, seed: 0 };
    let run = population_loop(&g, &cfg, &ExactOracle { cap: NODE_CAP }, init).unwrap();
    run.history.iter().find_map(|h| {
        let mix = MixturePolicy::new(run.populations[0][..h.sizes[0]].to_vec(), h.meta[0].clone()).unwrap();
        exact_best_response(&g, &mix, Side::Right, NODE_CAP).unwrap().value.is_zero().then_some(h.t)
    })
}

#[test]
fn psro_solves_rock_paper_scissors() {
    assert!(psro_solve_time("rock", "paper", 4).is_some());
    // From any pure start the populations cover all three actions by t = 5.
    let names = ["rock", "paper", "scissors"];
    for l in names {
        for r in names {
            assert!(psro_solve_time(l, r, 5).is_some(), "{l} vs {r}");
        }
    }
}

#[test]
fn unknown_entries_are_never_read_as_zero() {
    let mut p = PayoffMatrix::new();
    p.add_row(PolicyId::new("A", Side::Left, 0));
    p.add_col(PolicyId::new("B", Side::Right, 0));
    p.add_col(PolicyId::new("B", Side::Right, 1));
    p.set(0, 0, Cell { win_rate: q(1, 2), matches: 0, exact: true }).unwrap();
    assert_eq!(p.unknown(), vec![(0, 1)]);
    assert!(matches!(solve_nash(&p), Err(Error::UnknownPayoff { row: 0, col: 1 })));
    assert!(p.set(0, 1, Cell { win_rate: q(3, 2), matches: 0, exact: true }).is_err());
    assert!(p.set(0, 1, Cell { win_rate: q(1, 2), matches: 0, exact: false }).is_err());
    assert_eq!(p.add_col(PolicyId::new("B", Side::Right, 0)), 0, "ids are not duplicated");
}

#[test]
fn sampled_payoffs_are_seeded_and_near_exact() {
    let game = MiniBrawl::new(presets::tiny()).unwrap();
    let pop = |side: Side| -> Vec<Member<SymbolicObs>> {
        (1..=3u8).map(|l| (PolicyId::cpu(l * 3 - 2, side), Arc::new(cpu_policy(l * 3 - 2, &game.config).unwrap()) as SharedPolicy<SymbolicObs>)).collect()
    };
    let (l, r) = (pop(Side::Left), pop(Side::Right));
    let a = estimate_payoff(&game, &l, &r, 400, 9).unwrap();
    assert_eq!(a, estimate_payoff(&game, &l, &r, 400, 9).unwrap());
    let exact = exact_payoff(&game, &l, &r, NODE_CAP).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let (s, e) = (a.get(i, j).unwrap(), exact.get(i, j).unwrap());
            let p = arenaladder_core::num::to_f64(&e.win_rate);
            let sd = (p * (1.0 - p) / 400.0).sqrt().max(1.0 / 400.0);
            assert!((arenaladder_core::num::to_f64(&s.win_rate) - p).abs() <= 5.0 * sd, "({i},{j})");
            assert_eq!(s.matches, 400);
            assert!(e.exact);
        }
    }
}

#[test]
fn league_bookkeeping() {
    let game = MiniBrawl::new(presets::tiny()).unwrap();
    let lc = LearnConfig { budget_steps: 2000, seed: 4, ..LearnConfig::default() };
    let cpu = MixturePolicy::single(PolicyId::cpu(8, Side::Right), Arc::new(cpu_policy(8, &game.config).unwrap()) as SharedPolicy<SymbolicObs>);
    let pre = train_learner(&game, &cpu, Side::Left, &lc).unwrap();
    let cfg = LeagueConfig { cycles: 3, br_budget: 1500, learn: lc, payoff: PayoffMode::Exact { cap: NODE_CAP }, seed: 4, ..LeagueConfig::default() };
    let run = run_league(&game, &pre, &cfg).unwrap();
    assert_eq!(run.shapes, vec![(4, 4), (8, 8), (12, 12)]);
    assert!(run.payoff.unknown().is_empty());
    for side in [Side::Left, Side::Right] {
        for role in Role::ALL {
            let a = run.roster.agent(side, role).unwrap();
            assert_eq!(a.checkpoints.len(), 3);
            let horizon = game.config.horizon as u64;
            assert!(a.trained_steps >= 3 * 1500 && a.trained_steps < 3 * (1500 + horizon));
            let resets = run.resets.iter().filter(|(_, s)| *s == side).count() as u32;
            assert_eq!(a.resets, if role == Role::MainExploiter { resets } else { 0 });
        }
    }
    let [l, r] = run.nash_mixtures().unwrap();
    assert_eq!((l.len(), r.len()), (12, 12));

    // Opponent mixtures are distributions over existing policies.
    for side in [Side::Left, Side::Right] {
        for role in Role::ALL {
            let m = league_step(&run.roster, side, role, &run.payoff, &cfg).unwrap();
            assert_eq!(m.weights.weights().iter().fold(Q::zero(), |t, v| t + v), Q::one());
            assert!(m.components.iter().all(|(id, _)| id.side == side.opponent()));
        }
    }
}
