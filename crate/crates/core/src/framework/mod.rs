//! Explicit statistical-solution problems: an instance space, a label space,
//! a finite class of games (total labelings of the instance space), a finite
//! solution space and a binary local loss.
//!
//! Points, labels, games and solutions are referred to by index. Names are
//! carried along for reports only.

mod distribution;
mod erm;
mod loss;
mod sample_size;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use distribution::{
    exact_statistical_loss, statistical_loss_estimate, DistributionKind, DistributionSpec,
    LossEstimate, MAX_ENUMERABLE_GROUND,
};
pub use erm::{erm_bayesian, erm_worst_case, ErmSolution};
pub use loss::{
    conjoin, conjoin_instances, disjoin, disjoin_instances, epsilon_split, Conjunction,
    Disjunction, LocalLoss,
};
pub use sample_size::{consistent_sample_size, uc_sample_size, PacParameters};
pub(crate) use sample_size::{ceil_count, f as to_f64};

use crate::rng::StreamRng;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameworkError {
    #[error("empirical loss is undefined on an empty batch")]
    EmptyBatch,
    #[error("no game in the class agrees with the batch")]
    NoConsistentGame,
    #[error("invalid PAC parameters: {0}")]
    InvalidParams(String),
    #[error("unsupported distribution: {0}")]
    UnsupportedDistribution(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid problem instance: {0}")]
    InvalidInstance(String),
}

/// A finite `(X, Y, G, S, loss)` tuple with an explicit loss table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct ProblemInstance {
    points: Vec<String>,
    labels: Vec<String>,
    /// `games[g][x]` is the label index game `g` assigns to point `x`.
    games: Vec<Vec<usize>>,
    solutions: Vec<String>,
    /// Flattened `[x][g][s]`.
    table: Vec<bool>,
}

/// JSON shape of [`ProblemInstance`]: `loss[x][g][s]` is 0 or 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawInstance {
    points: Vec<String>,
    labels: Vec<String>,
    games: Vec<Vec<usize>>,
    solutions: Vec<String>,
    loss: Vec<Vec<Vec<u8>>>,
}

impl TryFrom<RawInstance> for ProblemInstance {
    type Error = FrameworkError;

    fn try_from(raw: RawInstance) -> Result<Self, Self::Error> {
        let bad = |m: String| FrameworkError::InvalidInstance(m);
        if raw.loss.len() != raw.points.len() {
            return Err(bad(format!(
                "loss table has {} rows, expected one per point ({})",
                raw.loss.len(),
                raw.points.len()
            )));
        }
        for (x, row) in raw.loss.iter().enumerate() {
            if row.len() != raw.games.len() {
                return Err(bad(format!("loss[{x}] must have one entry per game")));
            }
            for (g, cell) in row.iter().enumerate() {
                if cell.len() != raw.solutions.len() {
                    return Err(bad(format!("loss[{x}][{g}] must have one bit per solution")));
                }
                if let Some(v) = cell.iter().find(|&&v| v > 1) {
                    return Err(bad(format!("loss[{x}][{g}] contains {v}; bits must be 0 or 1")));
                }
            }
        }
        let loss = raw.loss;
        ProblemInstance::new(raw.points, raw.labels, raw.games, raw.solutions, |x, g, s| {
            loss[x][g][s] == 1
        })
    }
}

impl From<ProblemInstance> for RawInstance {
    fn from(p: ProblemInstance) -> Self {
        let loss = (0..p.n_points())
            .map(|x| {
                (0..p.n_games())
                    .map(|g| (0..p.n_solutions()).map(|s| p.loss(x, g, s) as u8).collect())
                    .collect()
            })
            .collect();
        RawInstance {
            points: p.points,
            labels: p.labels,
            games: p.games,
            solutions: p.solutions,
            loss,
        }
    }
}

impl ProblemInstance {
    /// Materializes `loss` over every `(x, g, s)` triple.
    pub fn new<F>(
        points: Vec<String>,
        labels: Vec<String>,
        games: Vec<Vec<usize>>,
        solutions: Vec<String>,
        loss: F,
    ) -> Result<Self, FrameworkError>
    where
        F: Fn(usize, usize, usize) -> bool,
    {
        let bad = |m: String| FrameworkError::InvalidInstance(m);
        if points.is_empty() {
            return Err(bad("instance space is empty".into()));
        }
        if games.is_empty() {
            return Err(bad("game class is empty".into()));
        }
        if solutions.is_empty() {
            return Err(bad("solution space is empty".into()));
        }
        for (g, game) in games.iter().enumerate() {
            if game.len() != points.len() {
                return Err(bad(format!(
                    "game {g} labels {} points, instance space has {}",
                    game.len(),
                    points.len()
                )));
            }
            if let Some(&y) = game.iter().find(|&&y| y >= labels.len()) {
                return Err(bad(format!("game {g} uses label {y} outside the label space")));
            }
        }
        let (nx, ng, ns) = (points.len(), games.len(), solutions.len());
        let mut table = Vec::with_capacity(nx * ng * ns);
        for x in 0..nx {
            for g in 0..ng {
                for s in 0..ns {
                    table.push(loss(x, g, s));
                }
            }
        }
        Ok(ProblemInstance {
            points,
            labels,
            games,
            solutions,
            table,
        })
    }

    /// Builds an instance from games given as arbitrary label values; labels
    /// are interned in order of first appearance.
    pub fn from_labelled_games<L, F>(
        points: Vec<String>,
        games: &[Vec<L>],
        solutions: Vec<String>,
        loss: F,
    ) -> Result<Self, FrameworkError>
    where
        L: PartialEq + std::fmt::Debug,
        F: Fn(usize, usize, usize) -> bool,
    {
        let mut interned: Vec<&L> = Vec::new();
        let mut label_games = Vec::with_capacity(games.len());
        for game in games {
            let mut row = Vec::with_capacity(game.len());
            for label in game {
                let idx = match interned.iter().position(|l| *l == label) {
                    Some(i) => i,
                    None => {
                        interned.push(label);
                        interned.len() - 1
                    }
                };
                row.push(idx);
            }
            label_games.push(row);
        }
        let labels = interned.iter().map(|l| format!("{l:?}")).collect();
        ProblemInstance::new(points, labels, label_games, solutions, loss)
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn n_games(&self) -> usize {
        self.games.len()
    }

    pub fn n_solutions(&self) -> usize {
        self.solutions.len()
    }

    pub fn point_names(&self) -> &[String] {
        &self.points
    }

    pub fn label_names(&self) -> &[String] {
        &self.labels
    }

    pub fn solution_names(&self) -> &[String] {
        &self.solutions
    }

    pub fn games(&self) -> &[Vec<usize>] {
        &self.games
    }

    /// Label that game `g` assigns to point `x`.
    pub fn label(&self, g: usize, x: usize) -> usize {
        self.games[g][x]
    }

    pub fn loss(&self, x: usize, g: usize, s: usize) -> bool {
        let (ng, ns) = (self.games.len(), self.solutions.len());
        self.table[(x * ng + g) * ns + s]
    }

    /// Games agreeing with every labelled point of `batch`. An empty batch
    /// keeps the whole class.
    pub fn consistent_games(&self, batch: &SampleBatch) -> Vec<usize> {
        (0..self.n_games())
            .filter(|&g| batch.iter().all(|(x, y)| self.games[g][x] == y))
            .collect()
    }

    /// Fraction of batch points on which `(g, s)` incurs loss.
    pub fn empirical_loss(
        &self,
        batch: &SampleBatch,
        g: usize,
        s: usize,
    ) -> Result<Rational, FrameworkError> {
        debug_assert!(
            batch.iter().all(|(x, y)| self.label(g, x) == y),
            "game {g} disagrees with the batch"
        );
        empirical_loss_of(batch.iter().map(|(x, _)| self.loss(x, g, s)))
    }

    /// Draws `m` points from `dist` and labels them with game `g`.
    pub fn draw_batch(
        &self,
        g: usize,
        dist: &DistributionSpec,
        m: usize,
        rng: &mut StreamRng,
    ) -> Result<SampleBatch, FrameworkError> {
        let mut batch = SampleBatch::default();
        for _ in 0..m {
            let x = dist.sample(rng);
            if x >= self.n_points() {
                return Err(FrameworkError::InvalidDistribution(format!(
                    "drew point {x}, instance space has {} points",
                    self.n_points()
                )));
            }
            batch.push(x, self.label(g, x));
        }
        Ok(batch)
    }

    pub fn exact_statistical_loss(
        &self,
        dist: &DistributionSpec,
        g: usize,
        s: usize,
    ) -> Result<Rational, FrameworkError> {
        self.check_support(dist)?;
        exact_statistical_loss(dist, |x| self.loss(x, g, s))
    }

    pub fn statistical_loss_estimate(
        &self,
        dist: &DistributionSpec,
        g: usize,
        s: usize,
        holdout: usize,
        seed: u64,
    ) -> Result<LossEstimate, FrameworkError> {
        self.check_support(dist)?;
        statistical_loss_estimate(dist, holdout, seed, |x| self.loss(x, g, s))
    }

    fn check_support(&self, dist: &DistributionSpec) -> Result<(), FrameworkError> {
        match dist.max_point() {
            Some(p) if p >= self.n_points() => Err(FrameworkError::InvalidDistribution(format!(
                "distribution reaches point {p}, instance space has {} points",
                self.n_points()
            ))),
            _ => Ok(()),
        }
    }
}

/// A labelled sample `<(x_j, y_j)>` of point and label indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SampleBatch {
    points: Vec<(usize, usize)>,
}

impl SampleBatch {
    pub fn new(points: Vec<(usize, usize)>) -> Self {
        SampleBatch { points }
    }

    pub fn push(&mut self, x: usize, y: usize) {
        self.points.push((x, y));
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.points.iter().copied()
    }

    pub fn as_slice(&self) -> &[(usize, usize)] {
        &self.points
    }
}

/// `count(flags) / len(flags)` as an exact rational.
pub fn empirical_loss_of<I: IntoIterator<Item = bool>>(flags: I) -> Result<Rational, FrameworkError> {
    let (mut hits, mut total) = (0u64, 0u64);
    for f in flags {
        total += 1;
        hits += f as u64;
    }
    if total == 0 {
        return Err(FrameworkError::EmptyBatch);
    }
    Ok(BigRational::new(BigInt::from(hits), BigInt::from(total)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rational, rational_int};

    fn names(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    /// All 16 maps {a, b} -> {0, 1, 2, 3}; solutions are irrelevant.
    fn sixteen_maps() -> ProblemInstance {
        let games: Vec<Vec<usize>> = (0..16).map(|k| vec![k / 4, k % 4]).collect();
        ProblemInstance::new(names("p", 2), names("y", 4), games, names("s", 1), |_, _, _| false)
            .unwrap()
    }

    #[test]
    fn empirical_loss_counts() {
        let p = ProblemInstance::new(
            names("x", 4),
            names("y", 1),
            vec![vec![0; 4]],
            names("s", 2),
            |x, _, s| s == 1 && x == 2,
        )
        .unwrap();
        let batch = SampleBatch::new((0..4).map(|x| (x, 0)).collect());
        assert_eq!(p.empirical_loss(&batch, 0, 0).unwrap(), rational_int(0));
        assert_eq!(p.empirical_loss(&batch, 0, 1).unwrap(), rational(1, 4));
        assert_eq!(
            p.empirical_loss(&SampleBatch::default(), 0, 0),
            Err(FrameworkError::EmptyBatch)
        );
    }

    #[test]
    fn consistent_games_filters_by_labels() {
        let p = sixteen_maps();
        assert_eq!(p.consistent_games(&SampleBatch::default()).len(), 16);
        let batch = SampleBatch::new(vec![(0, 1)]);
        let expected: Vec<usize> = (0..16).filter(|k| k / 4 == 1).collect();
        assert_eq!(p.consistent_games(&batch), expected);
        let pinned = SampleBatch::new(vec![(0, 2), (1, 3)]);
        assert_eq!(p.consistent_games(&pinned), vec![11]);
    }

    #[test]
    fn rejects_malformed_instances() {
        let empty = ProblemInstance::new(vec![], names("y", 1), vec![vec![]], names("s", 1), |_, _, _| false);
        assert!(matches!(empty, Err(FrameworkError::InvalidInstance(_))));
        let partial = ProblemInstance::new(names("x", 2), names("y", 1), vec![vec![0]], names("s", 1), |_, _, _| false);
        assert!(partial.is_err());
        let bad_label = ProblemInstance::new(names("x", 1), names("y", 1), vec![vec![3]], names("s", 1), |_, _, _| false);
        assert!(bad_label.is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let p = sixteen_maps();
        let json = serde_json::to_string(&p).unwrap();
        let back: ProblemInstance = serde_json::from_str(&json).unwrap();
        assert_eq!(p, back);

        let bad = r#"{"points":["a"],"labels":["y"],"games":[[0]],"solutions":["s"],"loss":[[[2]]]}"#;
        assert!(serde_json::from_str::<ProblemInstance>(bad).is_err());
    }
}
