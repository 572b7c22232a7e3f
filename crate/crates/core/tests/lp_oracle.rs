mod common;

use common::{lp_vertex_optimum, q, random_bounded_lp};
use proptest::prelude::*;
use statsol::lp::{simplex_solve, LinearProgram, LpError, Relation};
use statsol::rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn simplex_matches_vertex_enumeration(seed in any::<u64>()) {
        let lp = random_bounded_lp(&mut rng::stream(seed, &[]));
        match (simplex_solve(&lp), lp_vertex_optimum(&lp)) {
            (Ok(sol), Some(best)) => {
                prop_assert_eq!(&sol.objective, &best);
                prop_assert!(lp.is_feasible(&sol.x));
            }
            (Err(LpError::Infeasible), None) => {}
            (got, want) => prop_assert!(false, "simplex {:?} vs enumeration {:?}", got, want),
        }
    }
}

#[test]
fn degenerate_vertex_is_exact() {
    // three constraints tight at the optimum (1, 1)
    let mut lp = LinearProgram::minimize(vec![q(1), q(1)]);
    lp.add_constraint(vec![q(1), q(0)], Relation::Ge, q(1)).unwrap();
    lp.add_constraint(vec![q(0), q(1)], Relation::Ge, q(1)).unwrap();
    lp.add_constraint(vec![q(1), q(1)], Relation::Ge, q(2)).unwrap();
    let sol = simplex_solve(&lp).unwrap();
    assert_eq!(sol.objective, q(2));
    assert_eq!(lp_vertex_optimum(&lp), Some(q(2)));
}

#[test]
fn unbounded_maximum_is_reported() {
    let mut lp = LinearProgram::maximize(vec![q(1), q(0)]);
    lp.add_constraint(vec![q(0), q(1)], Relation::Le, q(3)).unwrap();
    assert_eq!(simplex_solve(&lp), Err(LpError::Unbounded));
}
