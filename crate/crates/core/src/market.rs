//! Fisher markets with indivisible goods.
//!
//! A player violates an outcome on bundle `S` when it can afford `S` under
//! its perturbed budget and strictly prefers `S` to its assigned bundle. The
//! search restricts assignments to sampled bundles and the empty bundle and
//! solves an exact LP for prices and perturbed budgets per assignment.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coalition::{Bundle, ItemSet};
use crate::framework::{empirical_loss_of, FrameworkError, ProblemInstance};
use crate::lp::{simplex_solve, LinearProgram, LpError, Relation};
use crate::rng::{self, StreamRng};
use crate::Scalar;

/// Largest good count stored explicitly (`2^k` values per player).
pub const MAX_GOODS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarketError {
    #[error("no restricted assignment admits feasible prices and budgets")]
    NotFound,
    #[error("instance exceeds caps: {0}")]
    TooLarge(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

/// Players' valuations over bundles and their budgets.
#[derive(Clone, Debug, PartialEq)]
pub struct FisherInstance<T> {
    k: usize,
    valuations: Vec<Vec<T>>,
    budgets: Vec<T>,
}

impl<T: Scalar> FisherInstance<T> {
    /// `valuations[i][S]` for every bundle bitmask `S`.
    pub fn new(k: usize, valuations: Vec<Vec<T>>, budgets: Vec<T>) -> Result<Self, MarketError> {
        if k == 0 || k > MAX_GOODS {
            return Err(MarketError::InvalidInstance(format!("good count {k} outside 1..={MAX_GOODS}")));
        }
        if valuations.is_empty() || valuations.len() != budgets.len() {
            return Err(MarketError::InvalidInstance("need one valuation and one budget per player".into()));
        }
        for (i, v) in valuations.iter().enumerate() {
            if v.len() != 1 << k {
                return Err(MarketError::InvalidInstance(format!("player {i} has {} bundle values", v.len())));
            }
            if !v[0].is_zero() || v.iter().any(|x| x.is_negative()) {
                return Err(MarketError::InvalidInstance(format!(
                    "player {i} must value the empty bundle at 0 and every bundle at >= 0"
                )));
            }
        }
        if budgets.iter().any(|b| b.is_negative()) {
            return Err(MarketError::InvalidInstance("budgets must be nonnegative".into()));
        }
        Ok(FisherInstance { k, valuations, budgets })
    }

    pub fn from_fn<F: Fn(usize, Bundle) -> T>(k: usize, budgets: Vec<T>, f: F) -> Result<Self, MarketError> {
        if k == 0 || k > MAX_GOODS {
            return Err(MarketError::InvalidInstance(format!("good count {k} outside 1..={MAX_GOODS}")));
        }
        let valuations = (0..budgets.len())
            .map(|i| {
                (0..1u32 << k)
                    .map(|s| if s == 0 { T::zero() } else { f(i, ItemSet(s)) })
                    .collect()
            })
            .collect();
        Self::new(k, valuations, budgets)
    }

    /// `v_i(S) = sum_{g in S} values[i][g]`.
    pub fn additive(values: &[Vec<T>], budgets: Vec<T>) -> Result<Self, MarketError> {
        let k = values.first().map_or(0, Vec::len);
        if values.iter().any(|v| v.len() != k) {
            return Err(MarketError::InvalidInstance("per-good values differ in length".into()));
        }
        Self::from_fn(k, budgets, |i, s| s.items().fold(T::zero(), |acc, g| acc + values[i][g].clone()))
    }

    pub fn players(&self) -> usize {
        self.budgets.len()
    }

    pub fn goods(&self) -> usize {
        self.k
    }

    pub fn budgets(&self) -> &[T] {
        &self.budgets
    }

    pub fn value(&self, i: usize, s: Bundle) -> &T {
        &self.valuations[i][s.bits()]
    }

    /// Label of bundle `s`: every player's value for it.
    pub fn label(&self, s: Bundle) -> Vec<T> {
        (0..self.players()).map(|i| self.value(i, s).clone()).collect()
    }

    pub fn sample(&self, s: Bundle) -> MarketSample<T> {
        MarketSample {
            bundle: s,
            values: self.label(s),
        }
    }
}

/// A sampled bundle and every player's value for it.
#[derive(Clone, Debug, PartialEq)]
pub struct MarketSample<T> {
    pub bundle: Bundle,
    pub values: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarketOutcome<T> {
    pub assignment: Vec<Bundle>,
    pub prices: Vec<T>,
    pub perturbed_budgets: Vec<T>,
    pub zeta: T,
    pub price_slack: T,
}

pub fn bundle_price<T: Scalar>(s: Bundle, prices: &[T]) -> T {
    s.items().fold(T::zero(), |acc, g| acc + prices[g].clone())
}

/// `true` iff the bundle costs at most `budget`.
pub fn affordability<T: Scalar>(s: Bundle, prices: &[T], budget: &T) -> bool {
    bundle_price(s, prices) <= *budget
}

fn player_violates<T: Scalar>(s: Bundle, value_s: &T, value_assigned: &T, outcome: &MarketOutcome<T>, i: usize) -> bool {
    value_s > value_assigned && affordability(s, &outcome.prices, &outcome.perturbed_budgets[i])
}

/// Player `i` can afford `s` and strictly prefers it to its assignment.
pub fn ce_player_loss<T: Scalar>(s: Bundle, instance: &FisherInstance<T>, outcome: &MarketOutcome<T>, i: usize) -> bool {
    player_violates(s, instance.value(i, s), instance.value(i, outcome.assignment[i]), outcome, i)
}

/// Some player can afford and strictly prefers `s`.
pub fn ce_loss<T: Scalar>(s: Bundle, instance: &FisherInstance<T>, outcome: &MarketOutcome<T>) -> bool {
    (0..instance.players()).any(|i| ce_player_loss(s, instance, outcome, i))
}

/// How per-player losses combine into one verdict.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossAggregation {
    /// One loss: any player violates.
    #[default]
    Any,
    /// One loss per player, each held to the accuracy target.
    PerPlayer,
}

/// `||sum_i pi(i) - 1||_2^2` with bundles as 0/1 vectors.
pub fn excess_allocation_sq(assignment: &[Bundle], k: usize) -> usize {
    (0..k)
        .map(|g| {
            let holders = assignment.iter().filter(|b| b.contains(g)).count() as isize;
            ((holders - 1) * (holders - 1)) as usize
        })
        .sum()
}

/// Whether `||sum_i pi(i) - 1||_2 <= k / 2`.
pub fn excess_compliant(assignment: &[Bundle], k: usize) -> bool {
    4 * excess_allocation_sq(assignment, k) <= k * k
}

/// Search limits and LP slack.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig<T> {
    pub zeta: T,
    /// `None` picks `max budget / 1000` (or `1/1000` when all budgets are 0).
    pub price_slack: Option<T>,
    pub max_players: usize,
    pub max_bundles: usize,
}

impl<T: Scalar> SearchConfig<T> {
    pub const DEFAULT_MAX_PLAYERS: usize = 4;
    pub const DEFAULT_MAX_BUNDLES: usize = 4;

    pub fn new(zeta: T) -> Self {
        SearchConfig {
            zeta,
            price_slack: None,
            max_players: Self::DEFAULT_MAX_PLAYERS,
            max_bundles: Self::DEFAULT_MAX_BUNDLES,
        }
    }

    pub fn with_slack(mut self, slack: T) -> Self {
        self.price_slack = Some(slack);
        self
    }
}

pub fn default_price_slack<T: Scalar>(budgets: &[T]) -> T {
    let thousand = <T as Scalar>::from_usize(1000);
    let max = budgets
        .iter()
        .fold(T::zero(), |m, b| if *b > m { b.clone() } else { m });
    if max.is_zero() {
        T::one() / thousand
    } else {
        max / thousand
    }
}

/// Distinct non-empty sampled bundles in order of first appearance, with
/// their value vectors.
fn distinct_bundles<T: Scalar>(batch: &[MarketSample<T>], n: usize, k: usize) -> Result<Vec<(Bundle, Vec<T>)>, MarketError> {
    let full = Bundle::full(k);
    let mut out: Vec<(Bundle, Vec<T>)> = Vec::new();
    for smp in batch {
        if !smp.bundle.is_subset_of(full) {
            return Err(MarketError::InvalidSample(format!("bundle {} uses goods beyond {k}", smp.bundle)));
        }
        if smp.values.len() != n {
            return Err(MarketError::InvalidSample(format!(
                "bundle {} has {} values for {n} players",
                smp.bundle,
                smp.values.len()
            )));
        }
        if smp.values.iter().any(|v| v.is_negative()) {
            return Err(MarketError::InvalidSample(format!("bundle {} has a negative value", smp.bundle)));
        }
        if smp.bundle.is_empty() {
            if smp.values.iter().any(|v| !v.is_zero()) {
                return Err(MarketError::InvalidSample("the empty bundle is worth 0".into()));
            }
            continue;
        }
        match out.iter().find(|(b, _)| *b == smp.bundle) {
            Some((_, vals)) if *vals != smp.values => {
                return Err(MarketError::InvalidSample(format!(
                    "bundle {} sampled with conflicting values",
                    smp.bundle
                )))
            }
            Some(_) => {}
            None => out.push((smp.bundle, smp.values.clone())),
        }
    }
    Ok(out)
}

/// Every choice vector in `{0..=m}^n`, where 0 is the empty bundle and `j`
/// the `j`-th distinct sampled bundle, ordered by excess then lexicographically.
fn ordered_assignments(n: usize, bundles: &[Bundle], k: usize) -> Vec<Vec<usize>> {
    let m = bundles.len();
    let total = (m + 1).pow(n as u32);
    let mut all: Vec<(usize, Vec<usize>)> = (0..total)
        .map(|mut code| {
            let mut choice = vec![0; n];
            for c in choice.iter_mut().rev() {
                *c = code % (m + 1);
                code /= m + 1;
            }
            let assignment: Vec<Bundle> = choice.iter().map(|&c| choice_bundle(bundles, c)).collect();
            (excess_allocation_sq(&assignment, k), choice)
        })
        .collect();
    all.sort();
    all.into_iter().map(|(_, c)| c).collect()
}

fn choice_bundle(bundles: &[Bundle], c: usize) -> Bundle {
    if c == 0 {
        Bundle::EMPTY
    } else {
        bundles[c - 1]
    }
}

struct Restricted<'a, T> {
    n: usize,
    k: usize,
    budgets: &'a [T],
    bundles: Vec<Bundle>,
    values: Vec<Vec<T>>,
    observed: Vec<usize>,
    unobserved_price: T,
    zeta: T,
    slack: T,
}

impl<T: Scalar> Restricted<'_, T> {
    fn assigned_value(&self, i: usize, c: usize) -> T {
        if c == 0 {
            T::zero()
        } else {
            self.values[c - 1][i].clone()
        }
    }

    /// Bundle indices (into `bundles`) player `i` strictly prefers to choice `c`.
    fn demanded(&self, i: usize, c: usize) -> Vec<usize> {
        let own = self.assigned_value(i, c);
        (0..self.bundles.len()).filter(|&j| self.values[j][i] > own).collect()
    }

    fn price_row(&self, s: Bundle, beta_col: Option<(usize, T)>) -> Vec<T> {
        let o = self.observed.len();
        let mut row = vec![T::zero(); o + self.n];
        for (col, &g) in self.observed.iter().enumerate() {
            if s.contains(g) {
                row[col] = T::one();
            }
        }
        if let Some((i, coef)) = beta_col {
            row[o + i] = coef;
        }
        row
    }

    fn solve(&self, choice: &[usize]) -> Result<Option<MarketOutcome<T>>, LpError> {
        let o = self.observed.len();
        let n = self.n;
        let mut objective = vec![T::one(); o];
        objective.extend(std::iter::repeat_n(T::zero(), n));
        let mut lp = LinearProgram::minimize(objective);
        for i in 0..n {
            let mut unit = vec![T::zero(); o + n];
            unit[o + i] = T::one();
            lp.add_constraint(unit.clone(), Relation::Le, self.budgets[i].clone() + self.zeta.clone())?;
            let lower = self.budgets[i].clone() - self.zeta.clone();
            if lower.is_positive() {
                lp.add_constraint(unit, Relation::Ge, lower)?;
            }
            let own = choice_bundle(&self.bundles, choice[i]);
            if !own.is_empty() {
                lp.add_constraint(self.price_row(own, Some((i, -T::one()))), Relation::Le, T::zero())?;
            }
            for j in self.demanded(i, choice[i]) {
                lp.add_constraint(
                    self.price_row(self.bundles[j], Some((i, -T::one()))),
                    Relation::Ge,
                    self.slack.clone(),
                )?;
            }
        }
        let sol = match simplex_solve(&lp) {
            Ok(sol) => sol,
            Err(LpError::Infeasible) => return Ok(None),
            Err(e) => return Err(e),
        };
        let mut prices = vec![self.unobserved_price.clone(); self.k];
        for (col, &g) in self.observed.iter().enumerate() {
            prices[g] = sol.x[col].clone();
        }
        let assignment: Vec<Bundle> = choice.iter().map(|&c| choice_bundle(&self.bundles, c)).collect();
        let perturbed_budgets = (0..n)
            .map(|i| self.settle_budget(i, choice[i], &assignment[i], &prices, sol.x[o + i].clone()))
            .collect();
        Ok(Some(MarketOutcome {
            assignment,
            prices,
            perturbed_budgets,
            zeta: self.zeta.clone(),
            price_slack: self.slack.clone(),
        }))
    }

    /// Moves `beta*_i` as close to `beta_i` as the fixed prices allow.
    fn settle_budget(&self, i: usize, c: usize, own: &Bundle, prices: &[T], fallback: T) -> T {
        let beta = &self.budgets[i];
        let mut lo = beta.clone() - self.zeta.clone();
        if lo.is_negative() {
            lo = T::zero();
        }
        let own_price = bundle_price(*own, prices);
        if own_price > lo {
            lo = own_price;
        }
        let mut hi = beta.clone() + self.zeta.clone();
        for j in self.demanded(i, c) {
            let cap = bundle_price(self.bundles[j], prices) - self.slack.clone();
            if cap < hi {
                hi = cap;
            }
        }
        if lo > hi {
            return fallback;
        }
        if *beta < lo {
            lo
        } else if *beta > hi {
            hi
        } else {
            beta.clone()
        }
    }
}

/// Restricted consistent-outcome search.
pub fn consistent_outcome_search<T: Scalar>(
    instance: &FisherInstance<T>,
    batch: &[MarketSample<T>],
    config: &SearchConfig<T>,
) -> Result<MarketOutcome<T>, MarketError> {
    search_from_samples(instance.goods(), instance.budgets(), batch, config)
}

/// Search that sees only the goods count, budgets and labelled samples.
pub fn search_from_samples<T: Scalar>(
    k: usize,
    budgets: &[T],
    batch: &[MarketSample<T>],
    config: &SearchConfig<T>,
) -> Result<MarketOutcome<T>, MarketError> {
    let n = budgets.len();
    if n == 0 || k == 0 || k > MAX_GOODS {
        return Err(MarketError::InvalidInstance(format!("{n} players and {k} goods")));
    }
    if n > config.max_players {
        return Err(MarketError::TooLarge(format!("{n} players, cap {}", config.max_players)));
    }
    if !config.zeta.is_positive() {
        return Err(MarketError::InvalidParams("zeta must be positive".into()));
    }
    let slack = config.price_slack.clone().unwrap_or_else(|| default_price_slack(budgets));
    if !slack.is_positive() {
        return Err(MarketError::InvalidParams("price slack must be positive".into()));
    }
    let distinct = distinct_bundles(batch, n, k)?;
    if distinct.len() > config.max_bundles {
        return Err(MarketError::TooLarge(format!(
            "{} distinct sampled bundles, cap {}",
            distinct.len(),
            config.max_bundles
        )));
    }
    let (bundles, values): (Vec<Bundle>, Vec<Vec<T>>) = distinct.into_iter().unzip();
    let seen = bundles.iter().fold(Bundle::EMPTY, |acc, b| acc.union(*b));
    let budget_sum = budgets.iter().fold(T::zero(), |acc, b| acc + b.clone());
    let problem = Restricted {
        n,
        k,
        budgets,
        observed: seen.items().collect(),
        unobserved_price: budget_sum + config.zeta.clone() + T::one(),
        bundles: bundles.clone(),
        values,
        zeta: config.zeta.clone(),
        slack,
    };
    let candidates = ordered_assignments(n, &bundles, k);
    let found = candidates
        .par_iter()
        .map(|choice| problem.solve(choice))
        .find_first(|r| !matches!(r, Ok(None)));
    match found {
        Some(Ok(Some(outcome))) => Ok(outcome),
        Some(Err(e)) => Err(MarketError::InvalidInstance(format!("price LP failed: {e}"))),
        _ => Err(MarketError::NotFound),
    }
}

/// Checks the outcome's invariants and zero loss on the batch.
pub fn validate_outcome<T: Scalar>(
    budgets: &[T],
    batch: &[MarketSample<T>],
    outcome: &MarketOutcome<T>,
) -> Result<(), String> {
    let n = budgets.len();
    if outcome.assignment.len() != n || outcome.perturbed_budgets.len() != n {
        return Err("outcome sized for a different player count".into());
    }
    if outcome.prices.iter().any(|p| p.is_negative()) {
        return Err("negative price".into());
    }
    for i in 0..n {
        let b = &outcome.perturbed_budgets[i];
        if b.is_negative() {
            return Err(format!("negative perturbed budget for player {i}"));
        }
        let diff = b.clone() - budgets[i].clone();
        if diff.abs() > outcome.zeta {
            return Err(format!("player {i}: perturbation exceeds zeta"));
        }
        if !affordability(outcome.assignment[i], &outcome.prices, b) {
            return Err(format!("player {i} cannot afford its bundle"));
        }
    }
    let valued = |i: usize, s: Bundle| -> Option<T> {
        if s.is_empty() {
            return Some(T::zero());
        }
        batch.iter().find(|smp| smp.bundle == s).map(|smp| smp.values[i].clone())
    };
    for smp in batch {
        for i in 0..n {
            let own = valued(i, outcome.assignment[i]).ok_or("assigned bundle was never sampled")?;
            if player_violates(smp.bundle, &smp.values[i], &own, outcome, i) {
                return Err(format!("player {i} violates on sampled bundle {}", smp.bundle));
            }
        }
    }
    Ok(())
}

pub fn empirical_ce_loss<T: Scalar>(
    instance: &FisherInstance<T>,
    batch: &[MarketSample<T>],
    outcome: &MarketOutcome<T>,
) -> Result<crate::Rational, FrameworkError> {
    empirical_loss_of(batch.iter().map(|smp| ce_loss(smp.bundle, instance, outcome)))
}

/// Market families used to build test corpora.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MarketGenerator {
    /// Per-good values uniform in `0..=max_value`, bundles add up.
    Additive {
        #[serde(default = "default_max_value")]
        max_value: u32,
        #[serde(default = "default_max_budget")]
        max_budget: u32,
    },
    /// A bundle is worth its best good.
    UnitDemand {
        #[serde(default = "default_max_value")]
        max_value: u32,
        #[serde(default = "default_max_budget")]
        max_budget: u32,
    },
}

fn default_max_value() -> u32 {
    5
}

fn default_max_budget() -> u32 {
    4
}

impl MarketGenerator {
    /// Budgets are uniform in `1..=max_budget`.
    pub fn generate<T: Scalar>(&self, n: usize, k: usize, rng: &mut StreamRng) -> Result<FisherInstance<T>, MarketError> {
        let (max_value, max_budget) = match self {
            MarketGenerator::Additive { max_value, max_budget } | MarketGenerator::UnitDemand { max_value, max_budget } => {
                (u64::from(*max_value), u64::from((*max_budget).max(1)))
            }
        };
        let values: Vec<Vec<T>> = (0..n)
            .map(|_| {
                (0..k)
                    .map(|_| <T as Scalar>::from_usize(rng.gen_range(0..=max_value) as usize))
                    .collect()
            })
            .collect();
        let budgets = (0..n)
            .map(|_| <T as Scalar>::from_usize(rng.gen_range(1..=max_budget) as usize))
            .collect();
        match self {
            MarketGenerator::Additive { .. } => FisherInstance::additive(&values, budgets),
            MarketGenerator::UnitDemand { .. } => FisherInstance::from_fn(k, budgets, |i, s| {
                s.items()
                    .map(|g| values[i][g].clone())
                    .fold(T::zero(), |m, v| if v > m { v } else { m })
            }),
        }
    }

    pub fn generate_seeded<T: Scalar>(&self, n: usize, k: usize, seed: u64) -> Result<FisherInstance<T>, MarketError> {
        self.generate(n, k, &mut rng::stream(seed, &[rng::purpose::GENERATOR]))
    }
}

/// Explicit instance: points are non-empty bundles (point `j` is bitmask
/// `j + 1`), games are the given markets, solutions the given outcomes,
/// labels are value vectors and loss is `ce_loss`.
pub fn market_problem_instance(
    markets: &[FisherInstance<crate::Rational>],
    outcomes: &[MarketOutcome<crate::Rational>],
) -> Result<ProblemInstance, MarketError> {
    let first = markets
        .first()
        .ok_or_else(|| MarketError::InvalidInstance("no markets".into()))?;
    let (n, k) = (first.players(), first.goods());
    if markets.iter().any(|m| m.players() != n || m.goods() != k) {
        return Err(MarketError::InvalidInstance("markets must share players and goods".into()));
    }
    if outcomes.iter().any(|o| o.assignment.len() != n || o.prices.len() != k) {
        return Err(MarketError::InvalidInstance("outcomes sized for a different market".into()));
    }
    let bundles: Vec<Bundle> = crate::coalition::nonempty_subsets(k).collect();
    let labels: Vec<Vec<Vec<crate::Rational>>> = markets
        .iter()
        .map(|m| bundles.iter().map(|&s| m.label(s)).collect())
        .collect();
    ProblemInstance::from_labelled_games(
        bundles.iter().map(Bundle::to_string).collect(),
        &labels,
        (0..outcomes.len()).map(|s| format!("o{s}")).collect(),
        |x, g, s| ce_loss(bundles[x], &markets[g], &outcomes[s]),
    )
    .map_err(|e| MarketError::InvalidInstance(e.to_string()))
}
