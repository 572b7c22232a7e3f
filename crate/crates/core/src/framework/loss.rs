//! Local losses over index triples and their Boolean combinators.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{FrameworkError, ProblemInstance};
use crate::Rational;

/// A binary local loss `loss(x, g, s)` over point, game and solution indices.
pub trait LocalLoss {
    fn loss(&self, x: usize, g: usize, s: usize) -> bool;
}

impl<F> LocalLoss for F
where
    F: Fn(usize, usize, usize) -> bool,
{
    fn loss(&self, x: usize, g: usize, s: usize) -> bool {
        self(x, g, s)
    }
}

impl LocalLoss for ProblemInstance {
    fn loss(&self, x: usize, g: usize, s: usize) -> bool {
        ProblemInstance::loss(self, x, g, s)
    }
}

/// Conjunction of two losses over a product solution space. Composite
/// solution `s` encodes the pair `(s / right_solutions, s % right_solutions)`.
#[derive(Clone, Debug)]
pub struct Conjunction<A, B> {
    left: A,
    right: B,
    right_solutions: usize,
}

impl<A, B> Conjunction<A, B> {
    pub fn split(&self, s: usize) -> (usize, usize) {
        (s / self.right_solutions, s % self.right_solutions)
    }

    pub fn join(&self, s1: usize, s2: usize) -> usize {
        s1 * self.right_solutions + s2
    }
}

impl<A: LocalLoss, B: LocalLoss> LocalLoss for Conjunction<A, B> {
    fn loss(&self, x: usize, g: usize, s: usize) -> bool {
        let (s1, s2) = self.split(s);
        self.left.loss(x, g, s1) && self.right.loss(x, g, s2)
    }
}

pub fn conjoin<A: LocalLoss, B: LocalLoss>(left: A, right: B, right_solutions: usize) -> Conjunction<A, B> {
    assert!(right_solutions > 0, "right solution space must be non-empty");
    Conjunction {
        left,
        right,
        right_solutions,
    }
}

/// Disjunction of losses sharing one solution space.
#[derive(Clone, Debug)]
pub struct Disjunction<L> {
    parts: Vec<L>,
}

impl<L> Disjunction<L> {
    pub fn parts(&self) -> &[L] {
        &self.parts
    }
}

impl<L: LocalLoss> LocalLoss for Disjunction<L> {
    fn loss(&self, x: usize, g: usize, s: usize) -> bool {
        self.parts.iter().any(|p| p.loss(x, g, s))
    }
}

pub fn disjoin<L: LocalLoss>(parts: Vec<L>) -> Disjunction<L> {
    assert!(!parts.is_empty(), "a disjunction needs at least one part");
    Disjunction { parts }
}

/// Per-part accuracy budget `epsilon / k` for a `k`-way disjunction.
pub fn epsilon_split(epsilon: &Rational, k: usize) -> Rational {
    assert!(k >= 1);
    epsilon / BigRational::from_integer(BigInt::from(k))
}

fn check_same_games(a: &ProblemInstance, b: &ProblemInstance) -> Result<(), FrameworkError> {
    if a.n_points() != b.n_points() || a.games() != b.games() {
        return Err(FrameworkError::InvalidInstance(
            "combined losses must share points and games".into(),
        ));
    }
    Ok(())
}

/// Instance whose solution space is `S1 x S2` and whose loss is the
/// conjunction of the two parts' losses.
pub fn conjoin_instances(
    left: &ProblemInstance,
    right: &ProblemInstance,
) -> Result<ProblemInstance, FrameworkError> {
    check_same_games(left, right)?;
    let solutions = left
        .solution_names()
        .iter()
        .flat_map(|a| right.solution_names().iter().map(move |b| format!("({a},{b})")))
        .collect();
    let c = conjoin(
        |x, g, s| left.loss(x, g, s),
        |x, g, s| right.loss(x, g, s),
        right.n_solutions(),
    );
    ProblemInstance::new(
        left.point_names().to_vec(),
        left.label_names().to_vec(),
        left.games().to_vec(),
        solutions,
        |x, g, s| c.loss(x, g, s),
    )
}

/// Instance over the shared solution space whose loss is the disjunction of
/// the parts' losses.
pub fn disjoin_instances(parts: &[ProblemInstance]) -> Result<ProblemInstance, FrameworkError> {
    let first = parts
        .first()
        .ok_or_else(|| FrameworkError::InvalidInstance("no parts to disjoin".into()))?;
    for p in &parts[1..] {
        check_same_games(first, p)?;
        if p.n_solutions() != first.n_solutions() {
            return Err(FrameworkError::InvalidInstance(
                "disjoined losses must share the solution space".into(),
            ));
        }
    }
    let d = disjoin(
        parts
            .iter()
            .map(|p| move |x, g, s| p.loss(x, g, s))
            .collect(),
    );
    ProblemInstance::new(
        first.point_names().to_vec(),
        first.label_names().to_vec(),
        first.games().to_vec(),
        first.solution_names().to_vec(),
        |x, g, s| d.loss(x, g, s),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    fn zero(_: usize, _: usize, _: usize) -> bool {
        false
    }

    fn one(_: usize, _: usize, _: usize) -> bool {
        true
    }

    #[test]
    fn conjunction_zero_absorbs_and_one_is_identity() {
        let part = |x: usize, g: usize, s: usize| (x + g + s).is_multiple_of(3);
        let absorbed = conjoin(part, zero, 4);
        let ident = conjoin(one, part, 4);
        for x in 0..4 {
            for s in 0..8 {
                assert!(!absorbed.loss(x, 0, s));
                let (_, s2) = ident.split(s);
                assert_eq!(ident.loss(x, 1, s), part(x, 1, s2));
            }
        }
    }

    #[test]
    fn single_disjunct_is_identity() {
        let part = |x: usize, _: usize, s: usize| x == s;
        let d = disjoin(vec![part]);
        for x in 0..3 {
            for s in 0..3 {
                assert_eq!(d.loss(x, 0, s), part(x, 0, s));
            }
        }
        assert_eq!(epsilon_split(&rational(1, 5), 1), rational(1, 5));
        assert_eq!(epsilon_split(&rational(1, 5), 4), rational(1, 20));
    }
}
