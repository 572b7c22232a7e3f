//! Transferable-utility cooperative games and the PAC core.
//!
//! A coalition `S` blocks a payoff vector `x` when `x(S) < v(S)`. The
//! consistent solver pays the minimal total subject to every sampled
//! coalition being paid at least its sampled value.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coalition::{nonempty_subsets, Coalition};
use crate::framework::{empirical_loss_of, FrameworkError, ProblemInstance};
use crate::lp::{simplex_solve, LinearProgram, LpError, Relation};
use crate::rng::{self, StreamRng};
use crate::{Rational, Scalar};

/// Player count cap for explicit games (`2^n` table entries).
pub const MAX_PLAYERS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TuError {
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("invalid payoff: {0}")]
    InvalidPayoff(String),
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// An explicit TU game: `values[S]` for every coalition bitmask `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct TuGame<T> {
    n: usize,
    values: Vec<T>,
}

impl<T: Scalar> TuGame<T> {
    pub fn new(n: usize, values: Vec<T>) -> Result<Self, TuError> {
        if n == 0 || n > MAX_PLAYERS {
            return Err(TuError::InvalidGame(format!("player count {n} outside 1..={MAX_PLAYERS}")));
        }
        if values.len() != 1 << n {
            return Err(TuError::InvalidGame(format!(
                "expected {} coalition values, got {}",
                1usize << n,
                values.len()
            )));
        }
        if !values[0].is_zero() {
            return Err(TuError::InvalidGame("v(empty) must be 0".into()));
        }
        if let Some(s) = values.iter().position(|v| v.is_negative()) {
            return Err(TuError::InvalidGame(format!("v({}) is negative", crate::ItemSet(s as u32))));
        }
        Ok(TuGame { n, values })
    }

    pub fn from_fn<F: Fn(Coalition) -> T>(n: usize, f: F) -> Result<Self, TuError> {
        if n == 0 || n > MAX_PLAYERS {
            return Err(TuError::InvalidGame(format!("player count {n} outside 1..={MAX_PLAYERS}")));
        }
        let values = (0..1u32 << n)
            .map(|s| if s == 0 { T::zero() } else { f(crate::ItemSet(s)) })
            .collect();
        Self::new(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn value(&self, s: Coalition) -> &T {
        &self.values[s.bits()]
    }

    pub fn grand_value(&self) -> &T {
        &self.values[(1 << self.n) - 1]
    }

    /// Whether some payoff satisfies every coalition constraint and pays
    /// exactly `v(N)`.
    pub fn has_nonempty_core(&self) -> Result<bool, TuError> {
        let mut lp = LinearProgram::minimize(vec![T::one(); self.n]);
        for s in nonempty_subsets(self.n) {
            lp.add_constraint(indicator(s, self.n), Relation::Ge, self.value(s).clone())?;
        }
        let sol = simplex_solve(&lp)?;
        Ok(!(sol.objective - self.grand_value().clone()).is_positive_tol())
    }
}

/// A nonnegative payoff per player.
#[derive(Clone, Debug, PartialEq)]
pub struct PayoffVector<T>(Vec<T>);

impl<T: Scalar> PayoffVector<T> {
    pub fn new(x: Vec<T>) -> Result<Self, TuError> {
        if let Some(i) = x.iter().position(|v| v.is_negative()) {
            return Err(TuError::InvalidPayoff(format!("payoff of player {i} is negative")));
        }
        Ok(PayoffVector(x))
    }

    pub fn zeros(n: usize) -> Self {
        PayoffVector(vec![T::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    /// `x(S)`.
    pub fn coalition_sum(&self, s: Coalition) -> T {
        s.items()
            .filter(|&i| i < self.0.len())
            .fold(T::zero(), |acc, i| acc + self.0[i].clone())
    }

    pub fn total(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, v| acc + v.clone())
    }
}

/// A sampled coalition and its value.
#[derive(Clone, Debug, PartialEq)]
pub struct TuSample<T> {
    pub coalition: Coalition,
    pub value: T,
}

impl<T> TuSample<T> {
    pub fn new(coalition: Coalition, value: T) -> Self {
        TuSample { coalition, value }
    }
}

/// `true` iff `x(S) < value`. The empty coalition never blocks.
pub fn blocks<T: Scalar>(s: Coalition, value: &T, payoff: &PayoffVector<T>) -> bool {
    !s.is_empty() && payoff.coalition_sum(s) < *value
}

/// Blocking loss of coalition `s` against `payoff` in `game`.
pub fn blocking_loss<T: Scalar>(s: Coalition, game: &TuGame<T>, payoff: &PayoffVector<T>) -> bool {
    blocks(s, game.value(s), payoff)
}

/// Fraction of sampled coalitions blocking `payoff`.
pub fn empirical_blocking_loss<T: Scalar>(
    batch: &[TuSample<T>],
    payoff: &PayoffVector<T>,
) -> Result<Rational, FrameworkError> {
    empirical_loss_of(batch.iter().map(|smp| blocks(smp.coalition, &smp.value, payoff)))
}

fn indicator<T: Scalar>(s: Coalition, n: usize) -> Vec<T> {
    (0..n)
        .map(|i| if s.contains(i) { T::one() } else { T::zero() })
        .collect()
}

/// Minimal-subsidy payoff: minimizes `sum x_i` subject to `x(S_j) >= v_j` for
/// every sample and `x >= 0`. Repeated coalitions keep their largest value.
pub fn solve_core_lp<T: Scalar>(batch: &[TuSample<T>], n: usize) -> Result<PayoffVector<T>, TuError> {
    if n == 0 || n > MAX_PLAYERS {
        return Err(TuError::InvalidSample(format!("player count {n} outside 1..={MAX_PLAYERS}")));
    }
    let full = Coalition::full(n);
    let mut tightest: BTreeMap<Coalition, T> = BTreeMap::new();
    for smp in batch {
        if !smp.coalition.is_subset_of(full) {
            return Err(TuError::InvalidSample(format!(
                "coalition {} is not a subset of the {n} players",
                smp.coalition
            )));
        }
        if smp.value.is_negative() {
            return Err(TuError::InvalidSample(format!("value of {} is negative", smp.coalition)));
        }
        if smp.coalition.is_empty() {
            if !smp.value.is_zero() {
                return Err(TuError::InvalidSample("the empty coalition has value 0".into()));
            }
            continue;
        }
        let entry = tightest.entry(smp.coalition).or_insert_with(T::zero);
        if smp.value > *entry {
            *entry = smp.value.clone();
        }
    }
    let mut lp = LinearProgram::minimize(vec![T::one(); n]);
    for (s, v) in tightest {
        lp.add_constraint(indicator(s, n), Relation::Ge, v)?;
    }
    let sol = simplex_solve(&lp)?;
    Ok(PayoffVector(sol.x))
}

/// Returned by [`rescale_to_efficiency`] when the payoff already exceeds the
/// grand-coalition value.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("minimal-subsidy payoff exceeds v(N) by {excess}")]
pub struct SubsidyRequired<T: Scalar> {
    pub payoff: PayoffVector<T>,
    pub excess: T,
}

/// Splits the surplus `grand_value - sum x_i` equally among all players.
pub fn rescale_to_efficiency<T: Scalar>(
    payoff: PayoffVector<T>,
    grand_value: &T,
) -> Result<PayoffVector<T>, SubsidyRequired<T>> {
    let total = payoff.total();
    if total > *grand_value {
        let excess = total - grand_value.clone();
        return Err(SubsidyRequired { payoff, excess });
    }
    if payoff.is_empty() {
        return Ok(payoff);
    }
    let share = (grand_value.clone() - total) / <T as Scalar>::from_usize(payoff.len());
    Ok(PayoffVector(
        payoff.0.into_iter().map(|v| v + share.clone()).collect(),
    ))
}

/// Game families used to build test corpora.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TuGenerator {
    /// `v(S)` = total weight of edges inside `S`, with random edge weights
    /// in `{0, 1/2, .., max_half_units/2}`.
    InducedSubgraph {
        #[serde(default = "default_half_units")]
        max_half_units: u32,
    },
    /// `v(S) = 1` iff `carrier` is a subset of `S`.
    Unanimity { carrier: Vec<usize> },
    /// `v(S) = (sum_{i in S} a_i)^2` with random integer `a_i` in `1..=max_weight`.
    RandomSupermodular {
        #[serde(default = "default_max_weight")]
        max_weight: u32,
    },
}

fn default_half_units() -> u32 {
    4
}

fn default_max_weight() -> u32 {
    4
}

impl TuGenerator {
    pub fn generate<T: Scalar>(&self, n: usize, rng: &mut StreamRng) -> Result<TuGame<T>, TuError> {
        match self {
            TuGenerator::InducedSubgraph { max_half_units } => {
                let mut w = vec![vec![T::zero(); n]; n];
                for i in 0..n {
                    for j in i + 1..n {
                        let units = rng.gen_range(0..=u64::from(*max_half_units)) as usize;
                        let v = <T as Scalar>::from_usize(units) / <T as Scalar>::from_usize(2);
                        w[i][j] = v.clone();
                        w[j][i] = v;
                    }
                }
                induced_subgraph(&w)
            }
            TuGenerator::Unanimity { carrier } => unanimity(n, carrier),
            TuGenerator::RandomSupermodular { max_weight } => {
                let a: Vec<T> = (0..n)
                    .map(|_| <T as Scalar>::from_usize(rng.gen_range(1..=u64::from(*max_weight)) as usize))
                    .collect();
                TuGame::from_fn(n, |s| {
                    let w = s.items().fold(T::zero(), |acc, i| acc + a[i].clone());
                    w.clone() * w
                })
            }
        }
    }

    /// Game drawn from the stream keyed by `seed`.
    pub fn generate_seeded<T: Scalar>(&self, n: usize, seed: u64) -> Result<TuGame<T>, TuError> {
        self.generate(n, &mut rng::stream(seed, &[rng::purpose::GENERATOR]))
    }
}

/// `v(S) = sum_{i<j in S} weights[i][j]`; the matrix must be symmetric and
/// nonnegative.
pub fn induced_subgraph<T: Scalar>(weights: &[Vec<T>]) -> Result<TuGame<T>, TuError> {
    let n = weights.len();
    for (i, row) in weights.iter().enumerate() {
        if row.len() != n {
            return Err(TuError::InvalidGame("edge weight matrix must be square".into()));
        }
        for (j, w) in row.iter().enumerate() {
            if w.is_negative() || *w != weights[j][i] {
                return Err(TuError::InvalidGame(format!(
                    "edge weight ({i},{j}) must be nonnegative and symmetric"
                )));
            }
        }
    }
    TuGame::from_fn(n, |s| {
        let members: Vec<usize> = s.items().collect();
        let mut v = T::zero();
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                v = v + weights[i][j].clone();
            }
        }
        v
    })
}

pub fn unanimity<T: Scalar>(n: usize, carrier: &[usize]) -> Result<TuGame<T>, TuError> {
    if carrier.iter().any(|&i| i >= n) {
        return Err(TuError::InvalidGame("carrier player out of range".into()));
    }
    let t = Coalition::from_items(carrier.iter().copied());
    TuGame::from_fn(n, |s| if t.is_subset_of(s) { T::one() } else { T::zero() })
}

/// All payoff vectors with entries drawn from `levels`.
pub fn payoff_grid<T: Scalar>(n: usize, levels: &[T]) -> Vec<PayoffVector<T>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<T>| {
                levels.iter().map(move |l| {
                    let mut p = prefix.clone();
                    p.push(l.clone());
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(PayoffVector).collect()
}

/// Explicit instance: points are the non-empty coalitions (point `k` is
/// bitmask `k + 1`), games label each coalition with its value, solutions
/// are the given payoffs, loss is blocking.
pub fn tu_problem_instance(
    games: &[TuGame<Rational>],
    payoffs: &[PayoffVector<Rational>],
) -> Result<ProblemInstance, TuError> {
    let n = games
        .first()
        .map(TuGame::n)
        .ok_or_else(|| TuError::InvalidGame("no games".into()))?;
    if games.iter().any(|g| g.n() != n) || payoffs.iter().any(|p| p.len() != n) {
        return Err(TuError::InvalidGame("games and payoffs must share the player count".into()));
    }
    let coalitions: Vec<Coalition> = nonempty_subsets(n).collect();
    let labels: Vec<Vec<Rational>> = games
        .iter()
        .map(|g| coalitions.iter().map(|&s| g.value(s).clone()).collect())
        .collect();
    ProblemInstance::from_labelled_games(
        coalitions.iter().map(Coalition::to_string).collect(),
        &labels,
        payoffs
            .iter()
            .map(|p| format!("{:?}", p.as_slice().iter().map(ToString::to_string).collect::<Vec<_>>()))
            .collect(),
        |x, g, s| blocking_loss(coalitions[x], &games[g], &payoffs[s]),
    )
    .map_err(|e| TuError::InvalidGame(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rational, rational_int};

    fn q(n: i64) -> Rational {
        rational_int(n)
    }

    fn c(items: &[usize]) -> Coalition {
        Coalition::from_items(items.iter().copied())
    }

    #[test]
    fn blocking_examples() {
        let game = TuGame::from_fn(2, |s| if s.len() == 2 { q(5) } else { q(0) }).unwrap();
        let x = PayoffVector::new(vec![q(1), q(2)]).unwrap();
        assert!(blocking_loss(c(&[0, 1]), &game, &x));
        assert!(!blocking_loss(c(&[0]), &game, &x));
        assert!(!blocking_loss(Coalition::EMPTY, &game, &x));
    }

    #[test]
    fn core_lp_examples() {
        assert_eq!(solve_core_lp::<Rational>(&[], 3).unwrap(), PayoffVector::zeros(3));

        let batch = vec![TuSample::new(c(&[0]), q(2)), TuSample::new(c(&[1]), q(3))];
        assert_eq!(solve_core_lp(&batch, 2).unwrap().into_vec(), vec![q(2), q(3)]);

        let batch = vec![
            TuSample::new(c(&[0, 1, 2]), q(1)),
            TuSample::new(c(&[0, 1]), q(0)),
            TuSample::new(c(&[2]), q(0)),
        ];
        let x = solve_core_lp(&batch, 3).unwrap();
        assert_eq!(x.total(), q(1));
        assert_eq!(empirical_blocking_loss(&batch, &x).unwrap(), q(0));
    }

    #[test]
    fn core_lp_rejects_bad_samples() {
        let outside = vec![TuSample::new(c(&[3]), q(1))];
        assert!(matches!(solve_core_lp(&outside, 2), Err(TuError::InvalidSample(_))));
        let negative = vec![TuSample::new(c(&[0]), q(-1))];
        assert!(solve_core_lp(&negative, 2).is_err());
    }

    #[test]
    fn rescale_examples() {
        let x = PayoffVector::new(vec![q(1), q(1)]).unwrap();
        assert_eq!(rescale_to_efficiency(x.clone(), &q(2)).unwrap(), x);
        let zero = PayoffVector::zeros(2);
        assert_eq!(rescale_to_efficiency(zero, &q(2)).unwrap().into_vec(), vec![q(1), q(1)]);
        let over = PayoffVector::new(vec![q(2), q(3)]).unwrap();
        let err = rescale_to_efficiency(over.clone(), &q(4)).unwrap_err();
        assert_eq!(err.payoff, over);
        assert_eq!(err.excess, q(1));
    }

    #[test]
    fn generators() {
        let u: TuGame<Rational> = unanimity(3, &[0, 1]).unwrap();
        assert_eq!(*u.value(c(&[0, 1])), q(1));
        assert_eq!(*u.value(c(&[0, 2])), q(0));
        let indicator = PayoffVector::new(vec![q(1), q(0), q(0)]).unwrap();
        assert!(nonempty_subsets(3).all(|s| !blocking_loss(s, &u, &indicator)));

        let tri = induced_subgraph(&[vec![q(0), q(1), q(1)], vec![q(1), q(0), q(1)], vec![q(1), q(1), q(0)]])
            .unwrap();
        assert_eq!(*tri.grand_value(), q(3));
        assert_eq!(*tri.value(c(&[0, 2])), q(1));

        let gen = TuGenerator::InducedSubgraph { max_half_units: 4 };
        let a: TuGame<Rational> = gen.generate_seeded(5, 17).unwrap();
        let b: TuGame<Rational> = gen.generate_seeded(5, 17).unwrap();
        assert_eq!(a, b);
        assert!(a.has_nonempty_core().unwrap());

        let sm: TuGame<Rational> = TuGenerator::RandomSupermodular { max_weight: 3 }.generate_seeded(4, 2).unwrap();
        assert!(sm.has_nonempty_core().unwrap());
    }

    #[test]
    fn empty_core_detected() {
        // three-player majority game: any pair is worth 1
        let g = TuGame::from_fn(3, |s| if s.len() >= 2 { q(1) } else { q(0) }).unwrap();
        assert!(!g.has_nonempty_core().unwrap());
        let x = solve_core_lp(
            &nonempty_subsets(3).map(|s| TuSample::new(s, g.value(s).clone())).collect::<Vec<_>>(),
            3,
        )
        .unwrap();
        assert_eq!(x.total(), rational(3, 2));
        assert!(rescale_to_efficiency(x, g.grand_value()).is_err());
    }

    #[test]
    fn rejects_invalid_games() {
        assert!(TuGame::new(2, vec![q(1), q(0), q(0), q(0)]).is_err());
        assert!(TuGame::new(2, vec![q(0), q(-1), q(0), q(0)]).is_err());
        assert!(TuGame::<Rational>::new(2, vec![q(0)]).is_err());
    }
}
