mod common;

use common::{bayesian_oracle, q, random_instance, worst_case_oracle};
use proptest::prelude::*;
use rand::Rng;
use statsol::framework::{erm_bayesian, erm_worst_case, FrameworkError, SampleBatch};
use statsol::{rng, Rational};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn minimizers_match_counting_oracles(seed in any::<u64>()) {
        let mut r = rng::stream(seed, &[]);
        let p = random_instance(&mut r);
        let m = r.gen_range(1..=6usize);
        // labels may come from no game at all
        let batch = SampleBatch::new(
            (0..m)
                .map(|_| (r.gen_range(0..p.n_points()), r.gen_range(0..p.n_labels())))
                .collect(),
        );
        match (erm_worst_case(&p, &batch), worst_case_oracle(&p, &batch)) {
            (Ok(sol), Some(best)) => {
                prop_assert_eq!(&sol.objective, &best);
                let g_max = p
                    .consistent_games(&batch)
                    .into_iter()
                    .map(|g| p.empirical_loss(&batch, g, sol.solution).unwrap())
                    .max()
                    .unwrap();
                prop_assert_eq!(g_max, best);
            }
            (Err(FrameworkError::NoConsistentGame), None) => {}
            (got, want) => prop_assert!(false, "{:?} vs {:?}", got, want),
        }
        let raw: Vec<i64> = (0..p.n_games()).map(|_| r.gen_range(1..=3)).collect();
        let total: i64 = raw.iter().sum();
        let prior: Vec<Rational> = raw.iter().map(|&w| Rational::new(w.into(), total.into())).collect();
        match (erm_bayesian(&p, &prior, &batch), bayesian_oracle(&p, &prior, &batch)) {
            (Ok(sol), Some(best)) => prop_assert_eq!(sol.objective, best),
            (Err(FrameworkError::NoConsistentGame), None) => {}
            (got, want) => prop_assert!(false, "{:?} vs {:?}", got, want),
        }
    }
}

#[test]
fn bayesian_rejects_unnormalized_prior() {
    let p = random_instance(&mut rng::stream(3, &[]));
    let prior = vec![q(1); p.n_games() + 1];
    assert!(matches!(
        erm_bayesian(&p, &prior, &SampleBatch::new(vec![(0, p.label(0, 0))])),
        Err(FrameworkError::InvalidParams(_))
    ));
}
