//! Preference profiles, majority tournaments and Condorcet winners.

use std::fmt;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coalition::{ItemSet, MAX_ITEMS};
use crate::framework::{ceil_count, to_f64, FrameworkError, PacParameters, ProblemInstance};
use crate::rng::StreamRng;
use crate::scalar::rational_str;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CondorcetError {
    #[error("no candidate of the sample beats every other sampled candidate")]
    NoEmpiricalWinner,
    #[error("tournament has tied pairs")]
    TiesPresent,
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid sample: {0}")]
    InvalidSample(String),
}

/// Voters' strict rankings, most preferred candidate first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct PreferenceProfile {
    orders: Vec<Vec<usize>>,
    // position[v][c] = rank of candidate c for voter v
    position: Vec<Vec<usize>>,
}

impl PreferenceProfile {
    pub fn new(orders: Vec<Vec<usize>>) -> Result<Self, CondorcetError> {
        let k = orders
            .first()
            .map(Vec::len)
            .ok_or_else(|| CondorcetError::InvalidProfile("at least one voter is required".into()))?;
        if k == 0 || k > MAX_ITEMS {
            return Err(CondorcetError::InvalidProfile(format!("candidate count {k} outside 1..={MAX_ITEMS}")));
        }
        let mut position = Vec::with_capacity(orders.len());
        for (v, order) in orders.iter().enumerate() {
            let mut pos = vec![usize::MAX; k];
            if order.len() != k {
                return Err(CondorcetError::InvalidProfile(format!("voter {v} ranks {} of {k} candidates", order.len())));
            }
            for (r, &c) in order.iter().enumerate() {
                if c >= k || pos[c] != usize::MAX {
                    return Err(CondorcetError::InvalidProfile(format!("voter {v} is not a permutation")));
                }
                pos[c] = r;
            }
            position.push(pos);
        }
        Ok(PreferenceProfile { orders, position })
    }

    pub fn voters(&self) -> usize {
        self.orders.len()
    }

    pub fn candidates(&self) -> usize {
        self.position[0].len()
    }

    pub fn orders(&self) -> &[Vec<usize>] {
        &self.orders
    }

    /// Rank of `c` for each voter; the label of a sampled candidate.
    pub fn ranks_of(&self, c: usize) -> Vec<usize> {
        self.position.iter().map(|p| p[c]).collect()
    }

    /// Voters ranking `a` above `b`.
    pub fn support(&self, a: usize, b: usize) -> usize {
        self.position.iter().filter(|p| p[a] < p[b]).count()
    }
}

impl TryFrom<Vec<Vec<usize>>> for PreferenceProfile {
    type Error = CondorcetError;

    fn try_from(orders: Vec<Vec<usize>>) -> Result<Self, Self::Error> {
        PreferenceProfile::new(orders)
    }
}

impl From<PreferenceProfile> for Vec<Vec<usize>> {
    fn from(p: PreferenceProfile) -> Self {
        p.orders
    }
}

/// Strict-majority relation: `beats[a]` is the set of candidates `a` beats.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct TournamentGraph {
    beats: Vec<ItemSet>,
}

impl TournamentGraph {
    /// From adjacency lists; rejects self-loops and two-way edges.
    pub fn from_adjacency(adj: Vec<Vec<usize>>) -> Result<Self, CondorcetError> {
        let k = adj.len();
        if k > MAX_ITEMS {
            return Err(CondorcetError::InvalidProfile(format!("{k} candidates exceeds {MAX_ITEMS}")));
        }
        let mut beats = vec![ItemSet::EMPTY; k];
        for (a, out) in adj.iter().enumerate() {
            for &b in out {
                if b >= k || b == a {
                    return Err(CondorcetError::InvalidProfile(format!("bad edge {a}->{b}")));
                }
                beats[a] = beats[a].with(b);
            }
        }
        for a in 0..k {
            for b in beats[a].items() {
                if beats[b].contains(a) {
                    return Err(CondorcetError::InvalidProfile(format!("edges {a}->{b} and {b}->{a}")));
                }
            }
        }
        Ok(TournamentGraph { beats })
    }

    pub fn candidates(&self) -> usize {
        self.beats.len()
    }

    pub fn beats(&self, a: usize, b: usize) -> bool {
        self.beats[a].contains(b)
    }

    pub fn out_neighbours(&self, a: usize) -> ItemSet {
        self.beats[a]
    }

    pub fn has_ties(&self) -> bool {
        let k = self.candidates();
        (0..k).any(|a| (a + 1..k).any(|b| !self.beats(a, b) && !self.beats(b, a)))
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        self.beats.iter().map(|s| s.items().collect()).collect()
    }
}

impl fmt::Debug for TournamentGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.adjacency().into_iter().enumerate()).finish()
    }
}

impl TryFrom<Vec<Vec<usize>>> for TournamentGraph {
    type Error = CondorcetError;

    fn try_from(adj: Vec<Vec<usize>>) -> Result<Self, Self::Error> {
        TournamentGraph::from_adjacency(adj)
    }
}

impl From<TournamentGraph> for Vec<Vec<usize>> {
    fn from(t: TournamentGraph) -> Self {
        t.adjacency()
    }
}

/// `a` beats `b` iff strictly more than half the voters rank `a` above `b`.
pub fn build_tournament(profile: &PreferenceProfile) -> TournamentGraph {
    let k = profile.candidates();
    let n = profile.voters();
    let beats = (0..k)
        .map(|a| ItemSet::from_items((0..k).filter(|&b| b != a && 2 * profile.support(a, b) > n)))
        .collect();
    TournamentGraph { beats }
}

fn winner_in(t: &TournamentGraph, sample: &[usize]) -> Result<usize, CondorcetError> {
    if sample.is_empty() {
        return Err(CondorcetError::InvalidSample("sample is empty".into()));
    }
    if let Some(&c) = sample.iter().find(|&&c| c >= t.candidates()) {
        return Err(CondorcetError::InvalidSample(format!("candidate {c} out of range")));
    }
    sample
        .iter()
        .copied()
        .find(|&w| sample.iter().all(|&c| c == w || t.beats(w, c)))
        .ok_or(CondorcetError::NoEmpiricalWinner)
}

/// The sampled candidate beating every other sampled candidate.
pub fn empirical_condorcet_winner(profile: &PreferenceProfile, sample: &[usize]) -> Result<usize, CondorcetError> {
    winner_in(&build_tournament(profile), sample)
}

/// A sampled candidate with its voters' ranks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSample {
    pub candidate: usize,
    pub ranks: Vec<usize>,
}

/// Empirical winner computed from rank labels alone.
pub fn winner_from_samples(samples: &[CandidateSample]) -> Result<usize, CondorcetError> {
    let first = samples
        .first()
        .ok_or_else(|| CondorcetError::InvalidSample("sample is empty".into()))?;
    let n = first.ranks.len();
    if samples.iter().any(|s| s.ranks.len() != n) {
        return Err(CondorcetError::InvalidSample("rank vectors differ in length".into()));
    }
    let beats = |a: &CandidateSample, b: &CandidateSample| {
        2 * a.ranks.iter().zip(&b.ranks).filter(|(ra, rb)| ra < rb).count() > n
    };
    samples
        .iter()
        .find(|w| samples.iter().all(|c| c.candidate == w.candidate || beats(w, c)))
        .map(|w| w.candidate)
        .ok_or(CondorcetError::NoEmpiricalWinner)
}

pub fn is_transitive(t: &TournamentGraph) -> Result<bool, CondorcetError> {
    if t.has_ties() {
        return Err(CondorcetError::TiesPresent);
    }
    let k = t.candidates();
    Ok((0..k).all(|a| {
        t.out_neighbours(a)
            .items()
            .all(|b| t.out_neighbours(b).is_subset_of(t.out_neighbours(a)))
    }))
}

/// Largest set of at least two candidates in which every pair lies on a
/// directed 3-cycle; 0 if there is none.
pub fn three_cycle_core_size(t: &TournamentGraph) -> Result<usize, CondorcetError> {
    if t.has_ties() {
        return Err(CondorcetError::TiesPresent);
    }
    let k = t.candidates();
    let on_cycle = |a: usize, b: usize| {
        let (from, to) = if t.beats(a, b) { (a, b) } else { (b, a) };
        (0..k).any(|c| t.beats(to, c) && t.beats(c, from))
    };
    let compatible: Vec<ItemSet> = (0..k)
        .map(|a| ItemSet::from_items((0..k).filter(|&b| b != a && on_cycle(a, b))))
        .collect();
    let best = max_clique(&compatible, ItemSet::EMPTY, ItemSet::full(k), 0);
    Ok(if best >= 2 { best } else { 0 })
}

fn max_clique(adj: &[ItemSet], current: ItemSet, candidates: ItemSet, best: usize) -> usize {
    let mut best = best.max(current.len());
    if current.len() + candidates.len() <= best {
        return best;
    }
    let mut rest = candidates;
    for v in candidates.items() {
        if current.len() + rest.len() <= best {
            break;
        }
        rest = ItemSet(rest.0 & !(1 << v));
        best = max_clique(adj, current.with(v), rest.intersection(adj[v]), best);
    }
    best
}

/// `ceil((1/epsilon) ln(1/delta))`.
pub fn condorcet_sample_size(params: &PacParameters) -> usize {
    ceil_count((1.0 / to_f64(params.delta())).ln() / to_f64(params.epsilon()))
}

/// Each voter draws a peak uniformly on `axis` and ranks candidates by axis
/// distance from it; equal distances favour the left end.
pub fn generate_single_peaked(
    axis: &[usize],
    voters: usize,
    rng: &mut StreamRng,
) -> Result<PreferenceProfile, CondorcetError> {
    let k = axis.len();
    let orders = (0..voters)
        .map(|_| {
            let peak = rng.gen_range(0..k as u64) as usize;
            single_peaked_order(axis, peak)
        })
        .collect();
    PreferenceProfile::new(orders)
}

/// Ranking of a voter peaked at axis position `peak`.
pub fn single_peaked_order(axis: &[usize], peak: usize) -> Vec<usize> {
    let mut positions: Vec<usize> = (0..axis.len()).collect();
    positions.sort_by_key(|&p| (p.abs_diff(peak), p));
    positions.into_iter().map(|p| axis[p]).collect()
}

/// Candidate parameters of a single-crossing profile: candidate `c` scores
/// `intercepts[c] + t * slopes[c]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingParameters {
    #[serde(with = "rational_str::vec")]
    pub intercepts: Vec<Rational>,
    #[serde(with = "rational_str::vec")]
    pub slopes: Vec<Rational>,
}

impl CrossingParameters {
    /// Candidate `c` gets intercept `c` and slope `-2c`, so the leader moves
    /// from the last candidate towards the first as `t` grows.
    pub fn spread(k: usize) -> Self {
        CrossingParameters {
            intercepts: (0..k).map(|c| Rational::from_integer(c.into())).collect(),
            slopes: (0..k).map(|c| -Rational::from_integer((2 * c).into())).collect(),
        }
    }
}

/// Each voter draws `t = j/1000` with `j` uniform in `0..=1000` and ranks
/// candidates by decreasing score, ties by candidate index.
pub fn generate_single_crossing(
    voters: usize,
    params: &CrossingParameters,
    rng: &mut StreamRng,
) -> Result<PreferenceProfile, CondorcetError> {
    let k = params.intercepts.len();
    if params.slopes.len() != k {
        return Err(CondorcetError::InvalidProfile("intercepts and slopes differ in length".into()));
    }
    let thousand = Rational::from_integer(1000.into());
    let orders = (0..voters)
        .map(|_| {
            let t = Rational::from_integer(rng.gen_range(0..=1000u64).into()) / &thousand;
            let score: Vec<Rational> = (0..k)
                .map(|c| &params.intercepts[c] + &t * &params.slopes[c])
                .collect();
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &b| score[b].cmp(&score[a]).then(a.cmp(&b)));
            order
        })
        .collect();
    PreferenceProfile::new(orders)
}

/// Independent uniformly random rankings.
pub fn generate_impartial_culture(
    candidates: usize,
    voters: usize,
    rng: &mut StreamRng,
) -> Result<PreferenceProfile, CondorcetError> {
    let orders = (0..voters)
        .map(|_| {
            let mut o: Vec<usize> = (0..candidates).collect();
            o.shuffle(rng);
            o
        })
        .collect();
    PreferenceProfile::new(orders)
}

/// Profile families used to build test corpora.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileGenerator {
    /// Axis defaults to `0..candidates`.
    SinglePeaked {
        #[serde(default)]
        axis: Option<Vec<usize>>,
    },
    SingleCrossing {
        #[serde(default)]
        parameters: Option<CrossingParameters>,
    },
    ImpartialCulture,
}

impl ProfileGenerator {
    pub fn generate(
        &self,
        candidates: usize,
        voters: usize,
        rng: &mut StreamRng,
    ) -> Result<PreferenceProfile, CondorcetError> {
        match self {
            ProfileGenerator::SinglePeaked { axis } => {
                let axis = axis.clone().unwrap_or_else(|| (0..candidates).collect());
                if axis.len() != candidates {
                    return Err(CondorcetError::InvalidProfile("axis length differs from candidate count".into()));
                }
                generate_single_peaked(&axis, voters, rng)
            }
            ProfileGenerator::SingleCrossing { parameters } => {
                let params = parameters.clone().unwrap_or_else(|| CrossingParameters::spread(candidates));
                generate_single_crossing(voters, &params, rng)
            }
            ProfileGenerator::ImpartialCulture => generate_impartial_culture(candidates, voters, rng),
        }
    }
}

/// Fraction of `weights`-distributed candidates beating `winner`.
pub fn winner_loss(t: &TournamentGraph, winner: usize, weights: &[Rational]) -> Rational {
    let total: Rational = weights.iter().sum();
    let beaten: Rational = (0..t.candidates())
        .filter(|&c| t.beats(c, winner))
        .map(|c| weights[c].clone())
        .sum();
    if total.is_zero() {
        Rational::zero()
    } else {
        beaten / total
    }
}

/// Uniform weights over `k` candidates.
pub fn uniform_weights(k: usize) -> Vec<Rational> {
    vec![Rational::one(); k]
}

/// Explicit instance: points and solutions are candidates, games are the
/// given profiles, labels are rank vectors, `loss(x, g, c) = [x beats c]`.
pub fn condorcet_problem_instance(profiles: &[PreferenceProfile]) -> Result<ProblemInstance, FrameworkError> {
    let k = profiles
        .first()
        .map(PreferenceProfile::candidates)
        .ok_or_else(|| FrameworkError::InvalidInstance("no profiles".into()))?;
    if profiles.iter().any(|p| p.candidates() != k) {
        return Err(FrameworkError::InvalidInstance("profiles must share the candidate set".into()));
    }
    let tournaments: Vec<TournamentGraph> = profiles.iter().map(build_tournament).collect();
    let labels: Vec<Vec<Vec<usize>>> = profiles
        .iter()
        .map(|p| (0..k).map(|c| p.ranks_of(c)).collect())
        .collect();
    let names: Vec<String> = (0..k).map(|c| format!("c{c}")).collect();
    ProblemInstance::from_labelled_games(names.clone(), &labels, names, |x, g, s| tournaments[g].beats(x, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn cycle() -> PreferenceProfile {
        PreferenceProfile::new(vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]).unwrap()
    }

    #[test]
    fn tournament_examples() {
        let single = PreferenceProfile::new(vec![vec![2, 0, 1]]).unwrap();
        let t = build_tournament(&single);
        assert!(t.beats(2, 0) && t.beats(2, 1) && t.beats(0, 1));
        assert!(is_transitive(&t).unwrap());

        let c = build_tournament(&cycle());
        assert_eq!(c.adjacency(), vec![vec![1], vec![2], vec![0]]);
        assert!(!is_transitive(&c).unwrap());

        let opposite = PreferenceProfile::new(vec![vec![0, 1, 2], vec![2, 1, 0]]).unwrap();
        let tied = build_tournament(&opposite);
        assert!(tied.adjacency().iter().all(Vec::is_empty));
        assert_eq!(is_transitive(&tied), Err(CondorcetError::TiesPresent));
        assert_eq!(three_cycle_core_size(&tied), Err(CondorcetError::TiesPresent));
    }

    #[test]
    fn winner_examples() {
        assert_eq!(empirical_condorcet_winner(&cycle(), &[1]), Ok(1));
        assert_eq!(empirical_condorcet_winner(&cycle(), &[0, 1, 2]), Err(CondorcetError::NoEmpiricalWinner));
        assert_eq!(empirical_condorcet_winner(&cycle(), &[2, 0]), Ok(2));
        let samples: Vec<CandidateSample> = [2, 0]
            .iter()
            .map(|&c| CandidateSample { candidate: c, ranks: cycle().ranks_of(c) })
            .collect();
        assert_eq!(winner_from_samples(&samples), Ok(2));
    }

    #[test]
    fn core_size_examples() {
        let transitive = TournamentGraph::from_adjacency(vec![vec![1, 2], vec![2], vec![]]).unwrap();
        assert_eq!(three_cycle_core_size(&transitive), Ok(0));
        assert_eq!(three_cycle_core_size(&build_tournament(&cycle())), Ok(3));
        let dominant = TournamentGraph::from_adjacency(vec![vec![1, 2, 3], vec![2], vec![3], vec![1]]).unwrap();
        assert_eq!(three_cycle_core_size(&dominant), Ok(3));
        let two = TournamentGraph::from_adjacency(vec![vec![1], vec![]]).unwrap();
        assert!(is_transitive(&two).unwrap());
    }

    #[test]
    fn sample_size_examples() {
        let p = PacParameters::new(crate::scalar::rational(1, 10), crate::scalar::rational(1, 20)).unwrap();
        assert_eq!(condorcet_sample_size(&p), 30);
        let p = PacParameters::new(crate::scalar::rational_int(1), crate::scalar::rational(3679, 10000)).unwrap();
        assert_eq!(condorcet_sample_size(&p), 1);
    }

    #[test]
    fn generators() {
        let axis = vec![3, 1, 0, 2];
        assert_eq!(single_peaked_order(&axis, 0), axis);
        assert_eq!(single_peaked_order(&axis, 2), vec![0, 1, 2, 3]);
        let mut r = rng::stream(5, &[]);
        for _ in 0..100 {
            let p = generate_single_peaked(&axis, 7, &mut r).unwrap();
            assert!(is_transitive(&build_tournament(&p)).unwrap());
        }
        let params = CrossingParameters::spread(5);
        let a = generate_single_crossing(9, &params, &mut rng::stream(1, &[])).unwrap();
        let b = generate_single_crossing(9, &params, &mut rng::stream(1, &[])).unwrap();
        assert_eq!(a, b);
        assert!(is_transitive(&build_tournament(&a)).unwrap());
    }

    #[test]
    fn profile_json() {
        let p: PreferenceProfile = serde_json::from_str("[[1,0],[0,1],[1,0]]").unwrap();
        assert_eq!(build_tournament(&p).adjacency(), vec![vec![], vec![0]]);
        assert!(serde_json::from_str::<PreferenceProfile>("[[0,0]]").is_err());
    }

    #[test]
    fn instance_loss_is_majority() {
        let prob = condorcet_problem_instance(&[cycle()]).unwrap();
        assert!(prob.loss(2, 0, 0));
        assert!(!prob.loss(1, 0, 0));
        assert_eq!(winner_loss(&build_tournament(&cycle()), 0, &uniform_weights(3)), crate::scalar::rational(1, 3));
    }
}
