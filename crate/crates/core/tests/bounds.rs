mod common;

use common::q;
use statsol::condorcet::{self, PreferenceProfile};
use statsol::dimension::{floor_log2_plus_two, solution_dimension, verify_dimension_bound};
use statsol::hedonic::{self, BlockingRule, HedonicGame, HedonicGenerator};
use statsol::market::{self, FisherInstance, MarketOutcome};
use statsol::{Bundle, ItemSet, Rational};

#[test]
fn hedonic_three_players_within_bound() {
    let games: Vec<HedonicGame<Rational>> = (0..4)
        .map(|seed| {
            let generator = if seed % 2 == 0 {
                HedonicGenerator::AdditivelySeparable { weights: None, max_weight: 3 }
            } else {
                HedonicGenerator::AppreciationOfFriends
            };
            generator.generate_seeded(3, seed).unwrap()
        })
        .collect();
    let p = hedonic::hedonic_problem_instance(&games, BlockingRule::Strict).unwrap();
    assert!(verify_dimension_bound(&p, 3));
    let r = solution_dimension(&p, 4);
    let family: Vec<ItemSet> = r.witness.points.iter().map(|&x| ItemSet(x as u32 + 1)).collect();
    assert!(hedonic::least_preferred_unique(&family, &games[r.witness.games[0]]));
}

#[test]
fn market_two_goods_within_linear_bound() {
    let k = 2;
    let c = 2;
    let budgets = vec![q(1), q(2)];
    let markets: Vec<FisherInstance<Rational>> = [
        [[3, 1], [1, 3]],
        [[2, 2], [0, 4]],
        [[1, 0], [4, 1]],
    ]
    .iter()
    .map(|v| {
        let values: Vec<Vec<Rational>> = v.iter().map(|row| row.iter().map(|&x| q(x)).collect()).collect();
        FisherInstance::additive(&values, budgets.clone()).unwrap()
    })
    .collect();
    let bundles: Vec<Bundle> = (0..4).map(ItemSet).collect();
    let mut outcomes = Vec::new();
    for &a in &bundles {
        for &b in &bundles {
            for p0 in 0..3 {
                for p1 in 0..3 {
                    outcomes.push(MarketOutcome {
                        assignment: vec![a, b],
                        prices: vec![q(p0), q(p1)],
                        perturbed_budgets: budgets.clone(),
                        zeta: q(1),
                        price_slack: Rational::new(1.into(), 1000.into()),
                    });
                }
            }
        }
    }
    let p = market::market_problem_instance(&markets, &outcomes).unwrap();
    assert!(verify_dimension_bound(&p, c * k));
}

#[test]
fn tournaments_within_cycle_core_bound() {
    // a dominant candidate over a 3-cycle, and the plain 3-cycle
    let profiles = [
        PreferenceProfile::new(vec![vec![3, 0, 1, 2], vec![3, 1, 2, 0], vec![3, 2, 0, 1]]).unwrap(),
        PreferenceProfile::new(vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]).unwrap(),
        PreferenceProfile::new(vec![vec![0, 1, 2, 3]]).unwrap(),
    ];
    for profile in profiles {
        let t = condorcet::build_tournament(&profile);
        let core = condorcet::three_cycle_core_size(&t).unwrap();
        let p = condorcet::condorcet_problem_instance(std::slice::from_ref(&profile)).unwrap();
        assert!(verify_dimension_bound(&p, floor_log2_plus_two(core)));
    }
}
