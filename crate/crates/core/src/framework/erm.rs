//! Agnostic empirical risk minimizers over explicit instances.

use num_traits::Zero;

use super::{FrameworkError, ProblemInstance, SampleBatch};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErmSolution {
    pub solution: usize,
    pub objective: Rational,
}

/// `argmin_s max_{g consistent with batch} empirical_loss(batch, g, s)`,
/// first solution index on ties.
pub fn erm_worst_case(problem: &ProblemInstance, batch: &SampleBatch) -> Result<ErmSolution, FrameworkError> {
    let games = problem.consistent_games(batch);
    if games.is_empty() {
        return Err(FrameworkError::NoConsistentGame);
    }
    let mut best: Option<ErmSolution> = None;
    for s in 0..problem.n_solutions() {
        let mut worst = Rational::zero();
        for &g in &games {
            let l = problem.empirical_loss(batch, g, s)?;
            if l > worst {
                worst = l;
            }
        }
        if best.as_ref().is_none_or(|b| worst < b.objective) {
            best = Some(ErmSolution {
                solution: s,
                objective: worst,
            });
        }
    }
    Ok(best.expect("solution space is non-empty"))
}

/// `argmin_s sum_g prior(g | batch) * empirical_loss(batch, g, s)` where the
/// prior is conditioned on the games consistent with the batch.
pub fn erm_bayesian(
    problem: &ProblemInstance,
    prior: &[Rational],
    batch: &SampleBatch,
) -> Result<ErmSolution, FrameworkError> {
    if prior.len() != problem.n_games() {
        return Err(FrameworkError::InvalidParams(format!(
            "prior has {} weights for {} games",
            prior.len(),
            problem.n_games()
        )));
    }
    let total: Rational = prior.iter().sum();
    if total != Rational::from_integer(1.into()) || prior.iter().any(|w| *w < Rational::zero()) {
        return Err(FrameworkError::InvalidParams("prior weights must be nonnegative and sum to 1".into()));
    }
    let games = problem.consistent_games(batch);
    let mass: Rational = games.iter().map(|&g| &prior[g]).sum();
    if mass.is_zero() {
        return Err(FrameworkError::NoConsistentGame);
    }
    let mut best: Option<ErmSolution> = None;
    for s in 0..problem.n_solutions() {
        let mut acc = Rational::zero();
        for &g in &games {
            if !prior[g].is_zero() {
                acc += &prior[g] * problem.empirical_loss(batch, g, s)?;
            }
        }
        let objective = acc / &mass;
        if best.as_ref().is_none_or(|b| objective < b.objective) {
            best = Some(ErmSolution { solution: s, objective });
        }
    }
    Ok(best.expect("solution space is non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rational, rational_int};

    fn names(p: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{p}{i}")).collect()
    }

    /// Two games with identical labels; solution 0 fails game 0 on x0,
    /// solution 1 fails game 1 on x1, solution 2 fails both everywhere.
    fn complementary() -> ProblemInstance {
        ProblemInstance::new(names("x", 2), names("y", 1), vec![vec![0, 0], vec![0, 0]], names("s", 3), |x, g, s| {
            match s {
                0 => g == 0 && x == 0,
                1 => g == 1 && x == 1,
                _ => true,
            }
        })
        .unwrap()
    }

    #[test]
    fn worst_case_prefers_zero_loss_first_index() {
        let p = ProblemInstance::new(names("x", 2), names("y", 1), vec![vec![0, 0]], names("s", 3), |_, _, s| s == 0)
            .unwrap();
        let batch = SampleBatch::new(vec![(0, 0), (1, 0)]);
        let r = erm_worst_case(&p, &batch).unwrap();
        assert_eq!(r, ErmSolution { solution: 1, objective: rational_int(0) });
    }

    #[test]
    fn bayesian_point_mass_is_single_game_erm() {
        let p = complementary();
        let batch = SampleBatch::new(vec![(0, 0), (0, 0), (1, 0)]);
        let r = erm_bayesian(&p, &[rational_int(0), rational_int(1)], &batch).unwrap();
        // game 1: s0 -> 0, s1 -> 1/3
        assert_eq!(r, ErmSolution { solution: 0, objective: rational_int(0) });
    }

    #[test]
    fn bayesian_uniform_prior_averages() {
        let p = complementary();
        let batch = SampleBatch::new(vec![(0, 0), (0, 0), (1, 0)]);
        let half = rational(1, 2);
        let r = erm_bayesian(&p, &[half.clone(), half], &batch).unwrap();
        // s0: (2/3 + 0)/2 = 1/3 ; s1: (0 + 1/3)/2 = 1/6 ; s2: 1
        assert_eq!(r, ErmSolution { solution: 1, objective: rational(1, 6) });
    }

    #[test]
    fn bayesian_mass_on_inconsistent_games() {
        let p = ProblemInstance::new(names("x", 1), names("y", 2), vec![vec![0], vec![1]], names("s", 1), |_, _, _| false)
            .unwrap();
        let batch = SampleBatch::new(vec![(0, 0)]);
        assert_eq!(
            erm_bayesian(&p, &[rational_int(0), rational_int(1)], &batch),
            Err(FrameworkError::NoConsistentGame)
        );
        let other = SampleBatch::new(vec![(0, 1), (0, 0)]);
        assert_eq!(erm_worst_case(&p, &other), Err(FrameworkError::NoConsistentGame));
    }
}
