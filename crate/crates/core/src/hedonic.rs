//! Hedonic games and stable partitions.
//!
//! Player `i` values each coalition containing it; a coalition blocks a
//! partition when its members prefer it to the blocks they were assigned.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coalition::{nonempty_subsets, Coalition, ItemSet};
use crate::framework::{empirical_loss_of, FrameworkError, ProblemInstance};
use crate::rng::{self, StreamRng};
use crate::scalar::rational_str;
use crate::{Rational, Scalar};

/// Default cap on `n` for partition enumeration (`Bell(10) = 115975`).
pub const DEFAULT_PLAYER_CAP: usize = 10;
/// Largest `n` for which explicit games are stored.
pub const MAX_PLAYERS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HedonicError {
    #[error("no partition is consistent with the batch")]
    NoConsistentPartition,
    #[error("{n} players exceeds the cap of {cap}")]
    TooManyPlayers { n: usize, cap: usize },
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid sample: {0}")]
    InvalidSample(String),
}

/// When a coalition counts as blocking.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockingRule {
    /// Every member strictly prefers the coalition.
    #[default]
    Strict,
    /// Every member weakly prefers the coalition.
    Weak,
}

impl BlockingRule {
    fn prefers<T: Scalar>(self, candidate: &T, assigned: &T) -> bool {
        match self {
            BlockingRule::Strict => candidate > assigned,
            BlockingRule::Weak => candidate >= assigned,
        }
    }
}

impl fmt::Display for BlockingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockingRule::Strict => "strict",
            BlockingRule::Weak => "weak",
        })
    }
}

/// Cardinal utilities `v_i(S)` for coalitions `S` containing `i`.
pub trait HedonicValuation<T> {
    fn players(&self) -> usize;
    fn value(&self, player: usize, coalition: Coalition) -> T;
}

/// Explicit game: `values[i][S]` for every bitmask `S`; entries with
/// `i` not in `S` are ignored and stored as zero.
#[derive(Clone, Debug, PartialEq)]
pub struct HedonicGame<T> {
    n: usize,
    values: Vec<Vec<T>>,
}

impl<T: Scalar> HedonicGame<T> {
    pub fn from_fn<F: Fn(usize, Coalition) -> T>(n: usize, f: F) -> Result<Self, HedonicError> {
        if n == 0 || n > MAX_PLAYERS {
            return Err(HedonicError::InvalidGame(format!("player count {n} outside 1..={MAX_PLAYERS}")));
        }
        let values = (0..n)
            .map(|i| {
                (0..1u32 << n)
                    .map(|s| {
                        let s = ItemSet(s);
                        if s.contains(i) {
                            f(i, s)
                        } else {
                            T::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(HedonicGame { n, values })
    }

    /// Evaluates an arbitrary valuation on every coalition.
    pub fn tabulate<V: HedonicValuation<T>>(oracle: &V) -> Result<Self, HedonicError> {
        Self::from_fn(oracle.players(), |i, s| oracle.value(i, s))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Label of coalition `s`: `(v_i(s))` for `i` in `s`, increasing `i`.
    pub fn label(&self, s: Coalition) -> Vec<T> {
        s.items().map(|i| self.values[i][s.bits()].clone()).collect()
    }

    pub fn sample(&self, s: Coalition) -> HedonicSample<T> {
        HedonicSample {
            coalition: s,
            values: self.label(s),
        }
    }

    /// Additively separable game: `v_i(S) = sum_{j in S, j != i} w[i][j]`.
    pub fn additively_separable(weights: &[Vec<T>]) -> Result<Self, HedonicError> {
        let n = weights.len();
        if weights.iter().any(|row| row.len() != n) {
            return Err(HedonicError::InvalidGame("weight matrix must be square".into()));
        }
        Self::from_fn(n, |i, s| {
            s.items()
                .filter(|&j| j != i)
                .fold(T::zero(), |acc, j| acc + weights[i][j].clone())
        })
    }
}

impl<T: Scalar> HedonicValuation<T> for HedonicGame<T> {
    fn players(&self) -> usize {
        self.n
    }

    fn value(&self, player: usize, coalition: Coalition) -> T {
        self.values[player][coalition.bits()].clone()
    }
}

/// Valuation backed by a closure.
pub struct FnValuation<F> {
    n: usize,
    f: F,
}

impl<F> FnValuation<F> {
    pub fn new(n: usize, f: F) -> Self {
        FnValuation { n, f }
    }
}

impl<T, F: Fn(usize, Coalition) -> T> HedonicValuation<T> for FnValuation<F> {
    fn players(&self) -> usize {
        self.n
    }

    fn value(&self, player: usize, coalition: Coalition) -> T {
        (self.f)(player, coalition)
    }
}

/// A partition of the players, stored as a restricted-growth string:
/// `rgs[0] = 0` and `rgs[i] <= 1 + max(rgs[..i])`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    rgs: Vec<usize>,
}

impl Partition {
    pub fn from_rgs(rgs: Vec<usize>) -> Result<Self, HedonicError> {
        let mut next = 0;
        for (i, &b) in rgs.iter().enumerate() {
            if b > next || (i == 0 && b != 0) {
                return Err(HedonicError::InvalidPartition(format!("{rgs:?} is not a restricted-growth string")));
            }
            if b == next {
                next += 1;
            }
        }
        Ok(Partition { rgs })
    }

    /// Builds a partition from blocks of player indices covering `0..n`.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self, HedonicError> {
        let mut owner = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(HedonicError::InvalidPartition("empty block".into()));
            }
            for &i in block {
                if i >= n || owner[i] != usize::MAX {
                    return Err(HedonicError::InvalidPartition(format!("player {i} out of range or repeated")));
                }
                owner[i] = b;
            }
        }
        if owner.contains(&usize::MAX) {
            return Err(HedonicError::InvalidPartition("blocks do not cover every player".into()));
        }
        let mut relabel = vec![usize::MAX; blocks.len()];
        let mut next = 0;
        let rgs = owner
            .into_iter()
            .map(|b| {
                if relabel[b] == usize::MAX {
                    relabel[b] = next;
                    next += 1;
                }
                relabel[b]
            })
            .collect();
        Ok(Partition { rgs })
    }

    pub fn grand(n: usize) -> Self {
        Partition { rgs: vec![0; n] }
    }

    pub fn singletons(n: usize) -> Self {
        Partition { rgs: (0..n).collect() }
    }

    pub fn n(&self) -> usize {
        self.rgs.len()
    }

    pub fn rgs(&self) -> &[usize] {
        &self.rgs
    }

    /// Blocks in order of their smallest member.
    pub fn blocks(&self) -> Vec<Coalition> {
        let count = self.rgs.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Coalition::EMPTY; count];
        for (i, &b) in self.rgs.iter().enumerate() {
            blocks[b] = blocks[b].with(i);
        }
        blocks
    }

    /// `pi(i)`.
    pub fn block_of(&self, i: usize) -> Coalition {
        let b = self.rgs[i];
        Coalition::from_items(self.rgs.iter().enumerate().filter(|(_, &c)| c == b).map(|(j, _)| j))
    }

    pub fn block_lists(&self) -> Vec<Vec<usize>> {
        self.blocks().into_iter().map(|b| b.items().collect()).collect()
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, b) in self.blocks().into_iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for Partition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.block_lists().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let blocks = Vec::<Vec<usize>>::deserialize(d)?;
        let n = blocks.iter().map(Vec::len).sum();
        Partition::from_blocks(n, &blocks).map_err(serde::de::Error::custom)
    }
}

/// Every partition of `n` players in restricted-growth-string order; the
/// first is the grand coalition, the last is all singletons.
pub fn partitions(n: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut rgs = vec![0usize; n];
    let mut max = vec![0usize; n];
    loop {
        out.push(Partition { rgs: rgs.clone() });
        let mut i = n - 1;
        loop {
            if i == 0 {
                return out;
            }
            if rgs[i] <= max[i - 1] {
                rgs[i] += 1;
                let m = max[i - 1].max(rgs[i]);
                max[i] = m;
                for j in i + 1..n {
                    rgs[j] = 0;
                    max[j] = m;
                }
                break;
            }
            i -= 1;
        }
    }
}

/// A sampled coalition and its members' values, in increasing player order.
#[derive(Clone, Debug, PartialEq)]
pub struct HedonicSample<T> {
    pub coalition: Coalition,
    pub values: Vec<T>,
}

impl<T> HedonicSample<T> {
    pub fn new(coalition: Coalition, values: Vec<T>) -> Result<Self, HedonicError> {
        if coalition.is_empty() {
            return Err(HedonicError::InvalidSample("coalition is empty".into()));
        }
        if values.len() != coalition.len() {
            return Err(HedonicError::InvalidSample(format!(
                "coalition {coalition} has {} members but {} values",
                coalition.len(),
                values.len()
            )));
        }
        Ok(HedonicSample { coalition, values })
    }

    /// Value reported for member `i`.
    pub fn value_of(&self, i: usize) -> Option<&T> {
        self.coalition.items().position(|j| j == i).map(|k| &self.values[k])
    }
}

#[derive(Serialize, Deserialize)]
struct RawSample {
    coalition: Vec<usize>,
    #[serde(with = "rational_str::vec")]
    values: Vec<Rational>,
}

impl Serialize for HedonicSample<Rational> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawSample {
            coalition: self.coalition.items().collect(),
            values: self.values.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HedonicSample<Rational> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawSample::deserialize(d)?;
        if raw.coalition.len() != raw.values.len() {
            return Err(serde::de::Error::custom("coalition and values differ in length"));
        }
        let mut sorted = raw.coalition.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != raw.coalition.len() || sorted.iter().any(|&i| i >= crate::coalition::MAX_ITEMS) {
            return Err(serde::de::Error::custom("coalition members must be distinct and below 32"));
        }
        // values follow the listed member order
        let mut paired: Vec<(usize, Rational)> = raw.coalition.into_iter().zip(raw.values).collect();
        paired.sort_by_key(|(i, _)| *i);
        HedonicSample::new(
            Coalition::from_items(sorted),
            paired.into_iter().map(|(_, v)| v).collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

fn blocks_with<T: Scalar, F: Fn(usize) -> T, V: HedonicValuation<T>>(
    s: Coalition,
    member_value: F,
    oracle: &V,
    partition: &Partition,
    rule: BlockingRule,
) -> bool {
    !s.is_empty()
        && s.items()
            .all(|i| rule.prefers(&member_value(i), &oracle.value(i, partition.block_of(i))))
}

/// `true` iff every member of `s` prefers `s` to its block in `partition`.
pub fn blocking_loss<T: Scalar, V: HedonicValuation<T>>(
    s: Coalition,
    game: &V,
    partition: &Partition,
    rule: BlockingRule,
) -> bool {
    blocks_with(s, |i| game.value(i, s), game, partition, rule)
}

/// Blocking loss of a sample: members' values come from the sample labels,
/// assigned-block values from `oracle`.
pub fn sample_blocks<T: Scalar, V: HedonicValuation<T>>(
    sample: &HedonicSample<T>,
    oracle: &V,
    partition: &Partition,
    rule: BlockingRule,
) -> bool {
    let s = sample.coalition;
    let values = &sample.values;
    let members: Vec<usize> = s.items().collect();
    blocks_with(
        s,
        |i| values[members.iter().position(|&j| j == i).expect("member")].clone(),
        oracle,
        partition,
        rule,
    )
}

pub fn empirical_blocking_loss<T: Scalar, V: HedonicValuation<T>>(
    batch: &[HedonicSample<T>],
    oracle: &V,
    partition: &Partition,
    rule: BlockingRule,
) -> Result<Rational, FrameworkError> {
    empirical_loss_of(batch.iter().map(|smp| sample_blocks(smp, oracle, partition, rule)))
}

fn check_batch<T>(batch: &[HedonicSample<T>], n: usize) -> Result<(), HedonicError> {
    let full = Coalition::full(n);
    for smp in batch {
        if !smp.coalition.is_subset_of(full) {
            return Err(HedonicError::InvalidSample(format!(
                "coalition {} is not a subset of the {n} players",
                smp.coalition
            )));
        }
    }
    Ok(())
}

/// First partition in restricted-growth order that no sample blocks.
pub fn consistent_partition_bruteforce<T, V>(
    batch: &[HedonicSample<T>],
    oracle: &V,
    n: usize,
    rule: BlockingRule,
) -> Result<Partition, HedonicError>
where
    T: Scalar,
    V: HedonicValuation<T> + Sync,
{
    consistent_partition_capped(batch, oracle, n, rule, DEFAULT_PLAYER_CAP)
}

pub fn consistent_partition_capped<T, V>(
    batch: &[HedonicSample<T>],
    oracle: &V,
    n: usize,
    rule: BlockingRule,
    cap: usize,
) -> Result<Partition, HedonicError>
where
    T: Scalar,
    V: HedonicValuation<T> + Sync,
{
    if n == 0 || n > cap.min(MAX_PLAYERS) {
        return Err(HedonicError::TooManyPlayers { n, cap: cap.min(MAX_PLAYERS) });
    }
    check_batch(batch, n)?;
    partitions(n)
        .into_par_iter()
        .find_first(|p| batch.iter().all(|smp| !sample_blocks(smp, oracle, p, rule)))
        .ok_or(HedonicError::NoConsistentPartition)
}

/// `true` iff no game of `class` that agrees with the batch labels lets a
/// sample block `partition`.
pub fn worst_case_consistency_check<T: Scalar>(
    batch: &[HedonicSample<T>],
    class: &[HedonicGame<T>],
    partition: &Partition,
    rule: BlockingRule,
) -> bool {
    class
        .iter()
        .filter(|g| batch.iter().all(|smp| g.n() >= smp.coalition.span() && g.label(smp.coalition) == smp.values))
        .all(|g| batch.iter().all(|smp| !sample_blocks(smp, g, partition, rule)))
}

/// A partition no coalition blocks, if one exists.
pub fn find_core_partition<T: Scalar, V: HedonicValuation<T> + Sync>(
    game: &V,
    rule: BlockingRule,
) -> Option<Partition> {
    let n = game.players();
    let coalitions: Vec<Coalition> = nonempty_subsets(n).collect();
    partitions(n)
        .into_par_iter()
        .find_first(|p| coalitions.iter().all(|&s| !blocking_loss(s, game, p, rule)))
}

/// Checks that every coalition of a shattered family is the unique least
/// preferred family member of at least one of its players.
pub fn least_preferred_unique<T: Scalar, V: HedonicValuation<T>>(family: &[Coalition], game: &V) -> bool {
    family.iter().all(|&s| {
        s.items().any(|i| {
            let own = game.value(i, s);
            family
                .iter()
                .filter(|&&t| t != s && t.contains(i))
                .all(|&t| game.value(i, t) > own)
        })
    })
}

/// Explicit instance over a finite game class: points are the non-empty
/// coalitions (point `k` is bitmask `k + 1`), solutions are all partitions in
/// restricted-growth order, labels are value vectors, loss is blocking.
pub fn hedonic_problem_instance(
    games: &[HedonicGame<Rational>],
    rule: BlockingRule,
) -> Result<ProblemInstance, HedonicError> {
    let n = games
        .first()
        .map(HedonicGame::n)
        .ok_or_else(|| HedonicError::InvalidGame("no games".into()))?;
    if n > DEFAULT_PLAYER_CAP {
        return Err(HedonicError::TooManyPlayers { n, cap: DEFAULT_PLAYER_CAP });
    }
    if games.iter().any(|g| g.n() != n) {
        return Err(HedonicError::InvalidGame("games must share the player count".into()));
    }
    let coalitions: Vec<Coalition> = nonempty_subsets(n).collect();
    let parts = partitions(n);
    let labels: Vec<Vec<Vec<Rational>>> = games
        .iter()
        .map(|g| coalitions.iter().map(|&s| g.label(s)).collect())
        .collect();
    ProblemInstance::from_labelled_games(
        coalitions.iter().map(Coalition::to_string).collect(),
        &labels,
        parts.iter().map(Partition::to_string).collect(),
        |x, g, s| blocking_loss(coalitions[x], &games[g], &parts[s], rule),
    )
    .map_err(|e| HedonicError::InvalidGame(e.to_string()))
}

/// Game families used to build test corpora.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HedonicGenerator {
    /// Fixed weights, or integer weights drawn from `-max_weight..=max_weight`.
    AdditivelySeparable {
        #[serde(default, with = "weights_opt")]
        weights: Option<Vec<Vec<Rational>>>,
        #[serde(default = "default_max_weight")]
        max_weight: u32,
    },
    /// Each ordered pair is a friend with probability 1/2;
    /// `v_i(S) = n |F_i & S| - |E_i & S|`.
    AppreciationOfFriends,
}

fn default_max_weight() -> u32 {
    3
}

mod weights_opt {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::scalar::{format_rational, parse_rational};
    use crate::Rational;

    pub fn serialize<S: Serializer>(w: &Option<Vec<Vec<Rational>>>, s: S) -> Result<S::Ok, S::Error> {
        w.as_ref()
            .map(|rows| {
                rows.iter()
                    .map(|r| r.iter().map(format_rational).collect::<Vec<_>>())
                    .collect::<Vec<_>>()
            })
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Vec<Rational>>>, D::Error> {
        let raw = Option::<Vec<Vec<String>>>::deserialize(d)?;
        raw.map(|rows| {
            rows.iter()
                .map(|r| r.iter().map(|v| parse_rational(v).map_err(serde::de::Error::custom)).collect())
                .collect()
        })
        .transpose()
    }
}

impl HedonicGenerator {
    pub fn generate<T: Scalar>(&self, n: usize, rng: &mut StreamRng) -> Result<HedonicGame<T>, HedonicError> {
        match self {
            HedonicGenerator::AdditivelySeparable { weights: Some(w), .. } => {
                if w.len() != n {
                    return Err(HedonicError::InvalidGame(format!("weights are {}x.. for {n} players", w.len())));
                }
                let w: Vec<Vec<T>> = w
                    .iter()
                    .map(|r| r.iter().map(|q| T::parse_scalar(&q.to_string()).expect("rational converts")).collect())
                    .collect();
                HedonicGame::additively_separable(&w)
            }
            HedonicGenerator::AdditivelySeparable { weights: None, max_weight } => {
                let m = i64::from(*max_weight);
                let w: Vec<Vec<T>> = (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| {
                                if i == j {
                                    T::zero()
                                } else {
                                    T::from_i64(rng.gen_range(-m..=m)).expect("small integer")
                                }
                            })
                            .collect()
                    })
                    .collect();
                HedonicGame::additively_separable(&w)
            }
            HedonicGenerator::AppreciationOfFriends => {
                let friends: Vec<Coalition> = (0..n)
                    .map(|i| Coalition::from_items((0..n).filter(|&j| j != i && rng.gen_bool(0.5))))
                    .collect();
                let big = <T as Scalar>::from_usize(n);
                HedonicGame::from_fn(n, |i, s| {
                    let others = s.len() - 1;
                    let f = s.intersection(friends[i]).len();
                    big.clone() * <T as Scalar>::from_usize(f) - <T as Scalar>::from_usize(others - f)
                })
            }
        }
    }

    pub fn generate_seeded<T: Scalar>(&self, n: usize, seed: u64) -> Result<HedonicGame<T>, HedonicError> {
        self.generate(n, &mut rng::stream(seed, &[rng::purpose::GENERATOR]))
    }
}
