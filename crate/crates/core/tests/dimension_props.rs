mod common;

use common::random_loss_instance;
use proptest::prelude::*;
use rand::Rng;
use statsol::dimension::{
    default_max_size, disagreement_instance, natarajan_dimension, solution_dimension, vc_dimension,
};
use statsol::framework::{conjoin_instances, ProblemInstance};
use statsol::rng;

fn sd(p: &ProblemInstance) -> usize {
    solution_dimension(p, default_max_size(p)).dimension
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn table(p: &ProblemInstance) -> Vec<bool> {
    let mut out = Vec::new();
    for x in 0..p.n_points() {
        for g in 0..p.n_games() {
            for s in 0..p.n_solutions() {
                out.push(p.loss(x, g, s));
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn adding_solutions_never_lowers_the_dimension(seed in any::<u64>()) {
        let mut r = rng::stream(seed, &[]);
        let nx = r.gen_range(1..=5usize);
        let games: Vec<Vec<usize>> = (0..r.gen_range(1..=3usize))
            .map(|_| (0..nx).map(|_| r.gen_range(0..2)).collect())
            .collect();
        let ns = r.gen_range(1..=6usize);
        let big = random_loss_instance(&mut r, nx, &games, ns + 2, 0.5);
        let t = table(&big);
        let ng = games.len();
        let small = ProblemInstance::new(names("x", nx), big.label_names().to_vec(), games.clone(), names("s", ns), |x, g, s| {
            t[(x * ng + g) * (ns + 2) + s]
        })
        .unwrap();
        let fewer_games = ProblemInstance::new(names("x", nx), big.label_names().to_vec(), games[..1].to_vec(), names("s", ns + 2), |x, _, s| {
            t[x * ng * (ns + 2) + s]
        })
        .unwrap();
        prop_assert!(sd(&small) <= sd(&big));
        prop_assert!(sd(&fewer_games) <= sd(&big));
    }

    #[test]
    fn natarajan_never_exceeds_solution_dimension(seed in any::<u64>()) {
        let mut r = rng::stream(seed, &[]);
        let nx = r.gen_range(1..=5usize);
        let games: Vec<Vec<usize>> = (0..r.gen_range(1..=4usize))
            .map(|_| (0..nx).map(|_| r.gen_range(0..3)).collect())
            .collect();
        let ns = r.gen_range(1..=8usize);
        let p = random_loss_instance(&mut r, nx, &games, ns, 0.5);
        let n = natarajan_dimension(&p, default_max_size(&p));
        prop_assert!(n.witness.validate(&p));
        prop_assert!(n.dimension <= sd(&p));
    }

    #[test]
    fn disagreement_instances_collapse_to_vc(seed in any::<u64>()) {
        let mut r = rng::stream(seed, &[]);
        let nx = r.gen_range(1..=5usize);
        let hs: Vec<Vec<bool>> = (0..r.gen_range(1..=8usize))
            .map(|_| (0..nx).map(|_| r.gen_bool(0.5)).collect())
            .collect();
        let p = disagreement_instance(&hs);
        prop_assert_eq!(sd(&p), vc_dimension(nx, &hs));
    }

    #[test]
    fn witnesses_replay(seed in any::<u64>()) {
        let mut r = rng::stream(seed, &[]);
        let nx = r.gen_range(1..=5usize);
        let games = vec![(0..nx).map(|_| r.gen_range(0..2)).collect::<Vec<usize>>()];
        let ns = r.gen_range(1..=10usize);
        let p = random_loss_instance(&mut r, nx, &games, ns, 0.5);
        prop_assert!(solution_dimension(&p, default_max_size(&p)).witness.validate(&p));
    }
}

#[test]
fn conjunction_can_exceed_both_parts() {
    // part 1 realizes {11, 10}, part 2 realizes {11, 01} on two points
    let pattern = |rows: [[bool; 2]; 2]| {
        ProblemInstance::new(names("x", 2), vec!["0".into()], vec![vec![0, 0]], names("s", 2), move |x, _, s| rows[s][x])
            .unwrap()
    };
    let a = pattern([[true, true], [true, false]]);
    let b = pattern([[true, true], [false, true]]);
    assert_eq!((sd(&a), sd(&b)), (1, 1));
    assert_eq!(sd(&conjoin_instances(&a, &b).unwrap()), 2);
}
