mod common;

use std::sync::Arc;

use arenaladder_core::engine::{MiniBrawl, SymbolicObs};
use arenaladder_core::exact::{evaluate_exact, evaluate_pair, exact_best_response, winrate_from_value, NODE_CAP};
use arenaladder_core::game::Side;
use arenaladder_core::matrix_game::MatrixGame;
use arenaladder_core::num::{q, Q};
use arenaladder_core::policy::{cpu_policy, MetaStrategy, MixturePolicy, PolicyId, SharedPolicy, TabularPolicy};
use arenaladder_core::{presets, Error};
use common::{brute_force_br, enumerate_pair, random_policy, random_tiny_config, single, Stream};
use num_traits::{One, Zero};
use proptest::prelude::*;

#[test]
fn best_response_to_a_point_mass_in_rps() {
    let g = MatrixGame::rock_paper_scissors();
    let rock = TabularPolicy::<()>::point_mass(3, g.action_index("rock").unwrap());
    let br = exact_best_response(&g, &single(PolicyId::new("Rock", Side::Left, 0), rock), Side::Right, NODE_CAP).unwrap();
    assert_eq!(br.value, Q::one());
    assert_eq!(br.policy.get(&()), &[0.0, 1.0, 0.0]);
    assert_eq!(winrate_from_value(&br.value), Q::one());
}

#[test]
fn best_response_to_uniform_rps_is_worth_nothing() {
    let g = MatrixGame::rock_paper_scissors();
    let br = exact_best_response(&g, &single(PolicyId::new("U", Side::Right, 0), TabularPolicy::<()>::uniform(3)), Side::Left, NODE_CAP)
        .unwrap();
    assert!(br.value.is_zero());
    assert_eq!(winrate_from_value(&br.value), q(1, 2));
}

#[test]
fn matches_brute_force_on_tiny_games() {
    let mut s = Stream(11);
    for (h, k) in [(2, 4), (3, 4), (4, 3), (5, 3)] {
        let game = MiniBrawl::new(random_tiny_config(&mut s, h, k)).unwrap();
        for side in [Side::Left, Side::Right] {
            let opp = single(PolicyId::new("R", side.opponent(), 0), random_policy(&game, side.opponent(), &mut s));
            let br = exact_best_response(&game, &opp, side, NODE_CAP).unwrap();
            assert_eq!(br.value, brute_force_br(&game, &opp, side), "h={h} k={k} {side}");
            // With lossless observations the tabular response attains it.
            assert_eq!(br.policy_outcome.value(), br.value);
        }
    }
}

#[test]
fn mixture_opponents_use_the_hidden_component_belief() {
    let mut s = Stream(12);
    let game = MiniBrawl::new(random_tiny_config(&mut s, 3, 4)).unwrap();
    let parts: Vec<(PolicyId, SharedPolicy<SymbolicObs>)> = (0..3)
        .map(|i| (PolicyId::new("R", Side::Right, i), Arc::new(random_policy(&game, Side::Right, &mut s)) as SharedPolicy<SymbolicObs>))
        .collect();
    let mix = MixturePolicy::new(parts, MetaStrategy::new(vec![q(1, 2), q(1, 3), q(1, 6)]).unwrap()).unwrap();
    let br = exact_best_response(&game, &mix, Side::Left, NODE_CAP).unwrap();
    assert_eq!(br.value, brute_force_br(&game, &mix, Side::Left));
    // The observation-level projection can only lose value.
    assert!(br.policy_outcome.value() <= br.value);
}

#[test]
fn capacity_is_reported() {
    let game = MiniBrawl::new(presets::small()).unwrap();
    let cpu = single(PolicyId::cpu(3, Side::Right), cpu_policy(3, &game.config).unwrap());
    match exact_best_response(&game, &cpu, Side::Left, 1000) {
        Err(Error::Capacity { cap, .. }) => assert_eq!(cap, 1000),
        other => panic!("expected a capacity error, got {:?}", other.map(|r| r.value)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pair_evaluation_matches_history_enumeration(seed in any::<u64>(), h in 1u16..4) {
        let mut s = Stream(seed);
        let game = MiniBrawl::new(random_tiny_config(&mut s, h, 4)).unwrap();
        let l = random_policy(&game, Side::Left, &mut s);
        let r = random_policy(&game, Side::Right, &mut s);
        let exact = evaluate_pair(&game, &l, &r, NODE_CAP).unwrap();
        prop_assert_eq!(&exact, &enumerate_pair(&game, &l, &r));
        prop_assert_eq!(&exact.win + &exact.draw + &exact.loss, Q::one());
    }

    #[test]
    fn best_response_dominates_every_fixed_reply(seed in any::<u64>()) {
        let mut s = Stream(seed);
        let game = MiniBrawl::new(random_tiny_config(&mut s, 3, 5)).unwrap();
        let opp = random_policy(&game, Side::Right, &mut s);
        let br = exact_best_response(&game, &single(PolicyId::new("R", Side::Right, 0), opp.clone()), Side::Left, NODE_CAP).unwrap();
        for _ in 0..4 {
            let other = random_policy(&game, Side::Left, &mut s);
            prop_assert!(evaluate_pair(&game, &other, &opp, NODE_CAP).unwrap().value() <= br.value.clone());
        }
        let mixed = evaluate_exact(&game, &single(PolicyId::new("B", Side::Left, 0), br.policy.clone()), &single(PolicyId::new("R", Side::Right, 0), opp), NODE_CAP).unwrap();
        prop_assert_eq!(mixed.value(), br.value);
    }
}
