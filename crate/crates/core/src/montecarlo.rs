//! Seeded trial harness for PAC guarantees.
//!
//! Every trial draws a game, a labelled batch and (for holdout estimation) a
//! fresh evaluation sample from ChaCha8 streams keyed by
//! `(seed, trial, purpose)` through SplitMix64, so reports do not depend on
//! the number of worker threads.

use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::condorcet::{self, CandidateSample, PreferenceProfile, ProfileGenerator, TournamentGraph};
use crate::framework::{
    consistent_sample_size, uc_sample_size, DistributionSpec, FrameworkError, PacParameters, ProblemInstance,
};
use crate::hedonic::{self, BlockingRule, HedonicGame, HedonicGenerator, HedonicSample, Partition};
use crate::market::{self, FisherInstance, LossAggregation, MarketGenerator, MarketOutcome, MarketSample, SearchConfig};
use crate::rng::{self, purpose, StreamRng};
use crate::scalar::rational_str;
use crate::tu_core::{self, PayoffVector, TuGame, TuGenerator, TuSample};
use crate::{ItemSet, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("game generator failed: {0}")]
    Generator(String),
    #[error(transparent)]
    Framework(#[from] FrameworkError),
}

/// Which sample-size rule turns a dimension into `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleSizeRule {
    Consistent,
    UniformConvergence,
    Condorcet,
}

/// Batch size: a fixed count or derived from a dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampleSize {
    Explicit(usize),
    Derived { dimension: usize, rule: SampleSizeRule },
}

impl SampleSize {
    pub fn resolve(&self, params: &PacParameters) -> usize {
        match self {
            SampleSize::Explicit(m) => *m,
            SampleSize::Derived { dimension, rule } => match rule {
                SampleSizeRule::Consistent => consistent_sample_size(*dimension, params),
                SampleSizeRule::UniformConvergence => uc_sample_size(*dimension, params),
                SampleSizeRule::Condorcet => condorcet::condorcet_sample_size(params),
            },
        }
    }
}

/// How a trial's statistical loss is measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// Mean loss on `holdout` fresh draws.
    #[default]
    Holdout,
    /// Exact expectation over the distribution's explicit support.
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    #[serde(with = "rational_str")]
    pub epsilon: Rational,
    #[serde(with = "rational_str")]
    pub delta: Rational,
    pub m: SampleSize,
    pub trials: usize,
    #[serde(default = "default_holdout")]
    pub holdout: usize,
    pub seed: u64,
    #[serde(default = "default_slack_z", with = "rational_str")]
    pub slack_z: Rational,
    #[serde(default)]
    pub estimator: Estimator,
    /// Overrides of the sample-size constants.
    #[serde(default, with = "rational_str::option", skip_serializing_if = "Option::is_none")]
    pub alpha1: Option<Rational>,
    #[serde(default, with = "rational_str::option", skip_serializing_if = "Option::is_none")]
    pub alpha2: Option<Rational>,
}

fn default_holdout() -> usize {
    20_000
}

fn default_slack_z() -> Rational {
    Rational::from_integer(2.into())
}

impl ValidationConfig {
    pub fn new(epsilon: Rational, delta: Rational, m: SampleSize, trials: usize, seed: u64) -> Self {
        ValidationConfig {
            epsilon,
            delta,
            m,
            trials,
            holdout: default_holdout(),
            seed,
            slack_z: default_slack_z(),
            estimator: Estimator::Holdout,
            alpha1: None,
            alpha2: None,
        }
    }

    pub fn params(&self) -> Result<PacParameters, ValidationError> {
        let a1 = self
            .alpha1
            .clone()
            .unwrap_or_else(|| Rational::from_integer(PacParameters::DEFAULT_ALPHA1.into()));
        let a2 = self
            .alpha2
            .clone()
            .unwrap_or_else(|| Rational::from_integer(PacParameters::DEFAULT_ALPHA2.into()));
        PacParameters::with_constants(self.epsilon.clone(), self.delta.clone(), a1, a2)
            .map_err(|e| ValidationError::InvalidConfig(e.to_string()))
    }

    pub fn validate(&self) -> Result<PacParameters, ValidationError> {
        if self.trials == 0 {
            return Err(ValidationError::InvalidConfig("trials must be at least 1".into()));
        }
        if self.holdout == 0 {
            return Err(ValidationError::InvalidConfig("holdout must be at least 1".into()));
        }
        if self.slack_z.is_negative() {
            return Err(ValidationError::InvalidConfig("slack_z must be nonnegative".into()));
        }
        self.params()
    }

    /// `delta + z * sqrt(delta (1 - delta) / R)`.
    pub fn threshold(&self) -> f64 {
        let d = f(&self.delta);
        d + f(&self.slack_z) * (d * (1.0 - d) / self.trials as f64).sqrt()
    }
}

fn f(q: &Rational) -> f64 {
    q.to_f64().expect("bounded rational")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// Estimated (or exact) statistical loss; `None` when the solver failed.
    #[serde(with = "rational_str::option")]
    pub loss: Option<Rational>,
    pub exceeded: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub rng: String,
}

impl Provenance {
    pub fn current() -> Self {
        Provenance {
            version: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")).to_string(),
            rng: "chacha8 keyed by splitmix64(seed, trial, purpose)".to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub config: ValidationConfig,
    /// Resolved batch size.
    pub m: usize,
    pub per_trial: Vec<TrialRecord>,
    #[serde(with = "rational_str")]
    pub failure_fraction: Rational,
    pub threshold: f64,
    pub verdict: Verdict,
    pub provenance: Provenance,
}

impl ValidationReport {
    fn assemble(config: &ValidationConfig, m: usize, per_trial: Vec<TrialRecord>) -> Self {
        let flagged = per_trial.iter().filter(|t| t.exceeded).count();
        let failure_fraction = Rational::new(flagged.into(), per_trial.len().into());
        let threshold = config.threshold();
        let verdict = if f(&failure_fraction) <= threshold {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        ValidationReport {
            config: config.clone(),
            m,
            per_trial,
            failure_fraction,
            threshold,
            verdict,
            provenance: Provenance::current(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// A random game family with labels and a local loss over point codes.
pub trait ProblemFamily: Sync {
    type Game: Send + Sync;
    type Label: Clone + Send + Sync;
    type Solution: Send;

    fn draw_game(&self, rng: &mut StreamRng) -> Result<Self::Game, String>;
    fn label(&self, game: &Self::Game, x: usize) -> Self::Label;
    fn loss(&self, game: &Self::Game, x: usize, solution: &Self::Solution) -> bool;

    /// Separately tracked losses; the trial loss is their maximum.
    fn loss_components(&self, game: &Self::Game, x: usize, solution: &Self::Solution) -> Vec<bool> {
        vec![self.loss(game, x, solution)]
    }
}

/// A family that ships its own consistent solver.
pub trait ConsistentFamily: ProblemFamily {
    fn solve(&self, game: &Self::Game, batch: &[(usize, Self::Label)]) -> Result<Self::Solution, String>;
}

fn trial_stream(seed: u64, trial: usize, what: u64) -> StreamRng {
    rng::stream(seed, &[trial as u64, what])
}

fn component_losses<F: ProblemFamily>(
    family: &F,
    game: &F::Game,
    solution: &F::Solution,
    dist: &DistributionSpec,
    config: &ValidationConfig,
    trial: usize,
) -> Result<Rational, FrameworkError> {
    let mut hits: Vec<Rational> = Vec::new();
    let mut add = |flags: Vec<bool>, w: &Rational| {
        if hits.len() < flags.len() {
            hits.resize(flags.len(), Rational::zero());
        }
        for (h, flag) in hits.iter_mut().zip(flags) {
            if flag {
                *h += w;
            }
        }
    };
    match config.estimator {
        Estimator::Exact => {
            for (x, w) in dist.support()? {
                add(family.loss_components(game, x, solution), &w);
            }
        }
        Estimator::Holdout => {
            let mut r = trial_stream(config.seed, trial, purpose::HOLDOUT);
            let w = Rational::new(1.into(), config.holdout.into());
            for _ in 0..config.holdout {
                let x = dist.sample(&mut r);
                add(family.loss_components(game, x, solution), &w);
            }
        }
    }
    Ok(hits.into_iter().max().unwrap_or_else(Rational::zero))
}

/// Runs `config.trials` independent trials of: draw a game, draw `m`
/// labelled points, solve, measure the solution's statistical loss.
pub fn validate_pac<F, S>(
    family: &F,
    solver: S,
    dist: &DistributionSpec,
    config: &ValidationConfig,
) -> Result<ValidationReport, ValidationError>
where
    F: ProblemFamily,
    S: Fn(&F::Game, &[(usize, F::Label)]) -> Result<F::Solution, String> + Sync,
{
    let params = config.validate()?;
    dist.validate()?;
    if config.estimator == Estimator::Exact {
        dist.support()?;
    }
    let m = config.m.resolve(&params);
    let records: Vec<Result<TrialRecord, ValidationError>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let game = family
                .draw_game(&mut trial_stream(config.seed, t, purpose::GAME))
                .map_err(ValidationError::Generator)?;
            let mut r = trial_stream(config.seed, t, purpose::BATCH);
            let batch: Vec<(usize, F::Label)> = (0..m)
                .map(|_| {
                    let x = dist.sample(&mut r);
                    (x, family.label(&game, x))
                })
                .collect();
            Ok(match solver(&game, &batch) {
                Ok(sol) => {
                    let loss = component_losses(family, &game, &sol, dist, config, t)?;
                    TrialRecord {
                        trial: t,
                        exceeded: loss > config.epsilon,
                        loss: Some(loss),
                        error: None,
                    }
                }
                Err(e) => TrialRecord {
                    trial: t,
                    loss: None,
                    exceeded: true,
                    error: Some(e),
                },
            })
        })
        .collect();
    let per_trial = records.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(ValidationReport::assemble(config, m, per_trial))
}

/// [`validate_pac`] with the family's own solver.
pub fn validate_consistent<F: ConsistentFamily>(
    family: &F,
    dist: &DistributionSpec,
    config: &ValidationConfig,
) -> Result<ValidationReport, ValidationError> {
    validate_pac(family, |g, b| family.solve(g, b), dist, config)
}

/// Per trial: draw a game uniformly from the instance, draw `m` points, and
/// record `sup |empirical - exact|` over games consistent with the batch
/// and all solutions. A trial is flagged when the gap exceeds epsilon.
pub fn validate_uniform_convergence(
    problem: &ProblemInstance,
    dist: &DistributionSpec,
    config: &ValidationConfig,
) -> Result<ValidationReport, ValidationError> {
    let params = config.validate()?;
    dist.validate()?;
    let m = config.m.resolve(&params);
    let mut exact = vec![vec![Rational::zero(); problem.n_solutions()]; problem.n_games()];
    for (g, row) in exact.iter_mut().enumerate() {
        for (s, cell) in row.iter_mut().enumerate() {
            *cell = problem.exact_statistical_loss(dist, g, s)?;
        }
    }
    let records: Vec<Result<TrialRecord, ValidationError>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut gr = trial_stream(config.seed, t, purpose::GAME);
            let g = rand::Rng::gen_range(&mut gr, 0..problem.n_games() as u64) as usize;
            let batch = problem.draw_batch(g, dist, m, &mut trial_stream(config.seed, t, purpose::BATCH))?;
            let mut gap = Rational::zero();
            if !batch.is_empty() {
                for h in problem.consistent_games(&batch) {
                    for s in 0..problem.n_solutions() {
                        let d = (problem.empirical_loss(&batch, h, s)? - &exact[h][s]).abs();
                        if d > gap {
                            gap = d;
                        }
                    }
                }
            }
            Ok(TrialRecord {
                trial: t,
                exceeded: gap > config.epsilon,
                loss: Some(gap),
                error: None,
            })
        })
        .collect();
    let per_trial = records.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(ValidationReport::assemble(config, m, per_trial))
}

const MAX_REDRAWS: usize = 1000;

/// TU games over `n` players; point codes are coalition bitmasks, labels
/// coalition values, solutions minimal-subsidy payoffs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuFamily {
    pub players: usize,
    pub generator: TuGenerator,
    /// Redraw until the core is non-empty.
    #[serde(default)]
    pub require_nonempty_core: bool,
}

impl ProblemFamily for TuFamily {
    type Game = TuGame<Rational>;
    type Label = Rational;
    type Solution = PayoffVector<Rational>;

    fn draw_game(&self, rng: &mut StreamRng) -> Result<Self::Game, String> {
        for _ in 0..MAX_REDRAWS {
            let g = self.generator.generate(self.players, rng).map_err(|e| e.to_string())?;
            if !self.require_nonempty_core || g.has_nonempty_core().map_err(|e| e.to_string())? {
                return Ok(g);
            }
        }
        Err(format!("no game with a non-empty core in {MAX_REDRAWS} draws"))
    }

    fn label(&self, game: &Self::Game, x: usize) -> Rational {
        game.value(ItemSet(x as u32)).clone()
    }

    fn loss(&self, game: &Self::Game, x: usize, payoff: &Self::Solution) -> bool {
        tu_core::blocking_loss(ItemSet(x as u32), game, payoff)
    }
}

impl ConsistentFamily for TuFamily {
    fn solve(&self, _game: &Self::Game, batch: &[(usize, Rational)]) -> Result<Self::Solution, String> {
        let samples: Vec<TuSample<Rational>> = batch
            .iter()
            .map(|(x, v)| TuSample::new(ItemSet(*x as u32), v.clone()))
            .collect();
        tu_core::solve_core_lp(&samples, self.players).map_err(|e| e.to_string())
    }
}

/// Hedonic games; point codes are coalition bitmasks, labels value vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HedonicFamily {
    pub players: usize,
    pub generator: HedonicGenerator,
    #[serde(default)]
    pub rule: BlockingRule,
    #[serde(default)]
    pub require_nonempty_core: bool,
}

impl ProblemFamily for HedonicFamily {
    type Game = HedonicGame<Rational>;
    type Label = Vec<Rational>;
    type Solution = Partition;

    fn draw_game(&self, rng: &mut StreamRng) -> Result<Self::Game, String> {
        for _ in 0..MAX_REDRAWS {
            let g = self.generator.generate(self.players, rng).map_err(|e| e.to_string())?;
            if !self.require_nonempty_core || hedonic::find_core_partition(&g, self.rule).is_some() {
                return Ok(g);
            }
        }
        Err(format!("no game with a non-empty core in {MAX_REDRAWS} draws"))
    }

    fn label(&self, game: &Self::Game, x: usize) -> Vec<Rational> {
        game.label(ItemSet(x as u32))
    }

    fn loss(&self, game: &Self::Game, x: usize, partition: &Partition) -> bool {
        hedonic::blocking_loss(ItemSet(x as u32), game, partition, self.rule)
    }
}

impl ConsistentFamily for HedonicFamily {
    fn solve(&self, game: &Self::Game, batch: &[(usize, Vec<Rational>)]) -> Result<Partition, String> {
        let samples = batch
            .iter()
            .map(|(x, v)| HedonicSample::new(ItemSet(*x as u32), v.clone()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        hedonic::consistent_partition_bruteforce(&samples, game, self.players, self.rule).map_err(|e| e.to_string())
    }
}

/// Preference profiles; point codes are candidates, labels rank vectors,
/// solutions a single candidate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondorcetFamily {
    pub candidates: usize,
    pub voters: usize,
    pub generator: ProfileGenerator,
}

impl ProblemFamily for CondorcetFamily {
    type Game = (PreferenceProfile, TournamentGraph);
    type Label = Vec<usize>;
    type Solution = usize;

    fn draw_game(&self, rng: &mut StreamRng) -> Result<Self::Game, String> {
        let p = self
            .generator
            .generate(self.candidates, self.voters, rng)
            .map_err(|e| e.to_string())?;
        let t = condorcet::build_tournament(&p);
        Ok((p, t))
    }

    fn label(&self, game: &Self::Game, x: usize) -> Vec<usize> {
        game.0.ranks_of(x)
    }

    fn loss(&self, game: &Self::Game, x: usize, winner: &usize) -> bool {
        game.1.beats(x, *winner)
    }
}

impl ConsistentFamily for CondorcetFamily {
    fn solve(&self, _game: &Self::Game, batch: &[(usize, Vec<usize>)]) -> Result<usize, String> {
        let mut samples: Vec<CandidateSample> = Vec::new();
        for (c, ranks) in batch {
            if !samples.iter().any(|s| s.candidate == *c) {
                samples.push(CandidateSample {
                    candidate: *c,
                    ranks: ranks.clone(),
                });
            }
        }
        condorcet::winner_from_samples(&samples).map_err(|e| e.to_string())
    }
}

/// Fisher markets; point codes are bundle bitmasks, labels every player's
/// value for the bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarketFamily {
    pub players: usize,
    pub goods: usize,
    pub generator: MarketGenerator,
    #[serde(with = "rational_str")]
    pub zeta: Rational,
    #[serde(default, with = "rational_str::option", skip_serializing_if = "Option::is_none")]
    pub price_slack: Option<Rational>,
    #[serde(default = "default_cap")]
    pub max_bundles: usize,
    #[serde(default)]
    pub aggregation: LossAggregation,
}

fn default_cap() -> usize {
    SearchConfig::<Rational>::DEFAULT_MAX_BUNDLES
}

impl MarketFamily {
    fn search_config(&self) -> SearchConfig<Rational> {
        SearchConfig {
            zeta: self.zeta.clone(),
            price_slack: self.price_slack.clone(),
            max_players: self.players.max(SearchConfig::<Rational>::DEFAULT_MAX_PLAYERS),
            max_bundles: self.max_bundles,
        }
    }
}

impl ProblemFamily for MarketFamily {
    type Game = FisherInstance<Rational>;
    type Label = Vec<Rational>;
    type Solution = MarketOutcome<Rational>;

    fn draw_game(&self, rng: &mut StreamRng) -> Result<Self::Game, String> {
        self.generator
            .generate(self.players, self.goods, rng)
            .map_err(|e| e.to_string())
    }

    fn label(&self, game: &Self::Game, x: usize) -> Vec<Rational> {
        game.label(ItemSet(x as u32))
    }

    fn loss(&self, game: &Self::Game, x: usize, outcome: &Self::Solution) -> bool {
        market::ce_loss(ItemSet(x as u32), game, outcome)
    }

    fn loss_components(&self, game: &Self::Game, x: usize, outcome: &Self::Solution) -> Vec<bool> {
        match self.aggregation {
            LossAggregation::Any => vec![self.loss(game, x, outcome)],
            LossAggregation::PerPlayer => (0..game.players())
                .map(|i| market::ce_player_loss(ItemSet(x as u32), game, outcome, i))
                .collect(),
        }
    }
}

impl ConsistentFamily for MarketFamily {
    fn solve(&self, game: &Self::Game, batch: &[(usize, Vec<Rational>)]) -> Result<Self::Solution, String> {
        let samples: Vec<MarketSample<Rational>> = batch
            .iter()
            .map(|(x, v)| MarketSample {
                bundle: ItemSet(*x as u32),
                values: v.clone(),
            })
            .collect();
        market::search_from_samples(game.goods(), game.budgets(), &samples, &self.search_config())
            .map_err(|e| e.to_string())
    }
}
