use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use statsol::condorcet::{self, CondorcetError, PreferenceProfile};
use statsol::dimension::{self, ShatteringWitness};
use statsol::framework::{exact_statistical_loss, DistributionSpec, ProblemInstance};
use statsol::hedonic::{self, HedonicError, HedonicGenerator, HedonicSample};
use statsol::market::{self, MarketError, MarketOutcome, MarketSample, SearchConfig};
use statsol::montecarlo::{self, ValidationReport};
use statsol::rng::{self, purpose, StreamRng};
use statsol::scalar::format_rational;
use statsol::tu_core::{self, TuSample};
use statsol::{ItemSet, Rational};

use crate::config::*;
use crate::{Command, Format};

pub struct Options {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub quiet: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: line {line}, column {column}: {message}")]
    Schema {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Io(String),
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Ok,
    NotFound,
    Fail,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::NotFound => "not-found",
            Status::Fail => "fail",
        }
    }

    fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::NotFound | Status::Fail => 1,
        }
    }
}

/// What a subcommand hands back for writing.
struct Report {
    status: Status,
    config: Value,
    result: Value,
    csv_header: Vec<&'static str>,
    csv_rows: Vec<Vec<String>>,
    summary: String,
}

pub fn execute(command: &Command, options: &Options) -> Result<u8, CliError> {
    let report = match command {
        Command::Tucore => tucore(load(options, "tucore")?, options)?,
        Command::Hedonic => hedonic_cmd(load(options, "hedonic")?, options)?,
        Command::Condorcet => condorcet_cmd(load(options, "condorcet")?, options)?,
        Command::Market => market_cmd(load(options, "market")?, options)?,
        Command::Dimension { builtin, points } => {
            let cfg = match (builtin, &options.config) {
                (Some(b), None) => DimensionConfig {
                    domain: None,
                    instance: InstanceSpec::Builtin {
                        builtin: *b,
                        points: *points,
                    },
                    max_size: None,
                    natarajan: false,
                    bound: None,
                },
                (None, Some(_)) => load(options, "dimension")?,
                (Some(_), Some(_)) => return Err(bad("give either --builtin or --config, not both")),
                (None, None) => return Err(bad("dimension needs --config or --builtin")),
            };
            dimension_cmd(cfg)?
        }
        Command::Validate => validate(load(options, "validate")?, options)?,
        Command::Uc => uc(load(options, "uc")?, options)?,
    };
    write_report(command.name(), &report, options)?;
    Ok(report.status.exit_code())
}

/// Reads and parses the config; schema errors carry line and column.
fn load<T: DeserializeOwned + HasDomain>(options: &Options, command: &str) -> Result<T, CliError> {
    let path = options
        .config
        .as_ref()
        .ok_or_else(|| bad(format!("{command} needs --config <path>")))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let cfg: T = serde_json::from_str(&text).map_err(|e| CliError::Schema {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if let Some(d) = cfg.domain() {
        if d != command {
            return Err(bad(format!("config is for `{d}`, not `{command}`")));
        }
    }
    Ok(cfg)
}

trait HasDomain {
    fn domain(&self) -> Option<&str>;
}

macro_rules! has_domain {
    ($($t:ty),*) => {$(
        impl HasDomain for $t {
            fn domain(&self) -> Option<&str> {
                self.domain.as_deref()
            }
        }
    )*};
}

has_domain!(TuConfig, HedonicConfig, CondorcetConfig, MarketConfig, DimensionConfig, ValidateConfig, UcConfig);

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn q_str(q: &Rational) -> String {
    format_rational(q)
}

fn q_vec(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

fn items(s: ItemSet) -> Vec<usize> {
    s.items().collect()
}

fn set_from(members: &[usize], ground: usize, what: &str) -> Result<ItemSet, CliError> {
    if let Some(&i) = members.iter().find(|&&i| i >= ground) {
        return Err(bad(format!("{what} member {i} is out of range (size {ground})")));
    }
    Ok(ItemSet::from_items(members.iter().copied()))
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| bad(format!("{what} is stochastic and needs a seed (config `seed` or --seed)")))
}

fn batch_stream(seed: u64) -> StreamRng {
    rng::stream(seed, &[purpose::BATCH])
}

fn draw_points(dist: &DistributionSpec, m: usize, seed: u64) -> Result<Vec<usize>, CliError> {
    dist.validate().map_err(|e| bad(e.to_string()))?;
    let mut r = batch_stream(seed);
    Ok((0..m).map(|_| dist.sample(&mut r)).collect())
}

fn exact_or_null<F: Fn(usize) -> bool>(dist: &DistributionSpec, loss: F) -> Value {
    match exact_statistical_loss(dist, loss) {
        Ok(q) => json!(q_str(&q)),
        Err(_) => Value::Null,
    }
}

fn tucore(mut cfg: TuConfig, options: &Options) -> Result<Report, CliError> {
    if options.seed.is_some() {
        cfg.seed = options.seed;
    }
    let n = cfg.players;
    let (batch, game, dist) = match (&cfg.batch, &cfg.generator) {
        (Some(samples), None) => {
            let batch = samples
                .iter()
                .map(|s| Ok(TuSample::new(set_from(&s.coalition, n, "coalition")?, s.value.clone())))
                .collect::<Result<Vec<_>, CliError>>()?;
            (batch, None, None)
        }
        (None, Some(generator)) => {
            let seed = require_seed(cfg.seed, "a generated game")?;
            let game = generator
                .generate_seeded::<Rational>(n, seed)
                .map_err(|e| bad(e.to_string()))?;
            let m = cfg.samples.ok_or_else(|| bad("`samples` is required with `generator`"))?;
            let dist = match &cfg.distribution {
                Some(d) => d.clone(),
                None => DistributionSpec::uniform_nonempty_subsets(n, seed).map_err(|e| bad(e.to_string()))?,
            };
            let batch = draw_points(&dist, m, seed)?
                .into_iter()
                .map(|x| {
                    let s = ItemSet(x as u32);
                    TuSample::new(s, game.value(s).clone())
                })
                .collect();
            (batch, Some(game), Some(dist))
        }
        _ => return Err(bad("give exactly one of `batch` and `generator`")),
    };
    let payoff = tu_core::solve_core_lp(&batch, n).map_err(|e| bad(e.to_string()))?;
    let empirical = (!batch.is_empty()).then(|| tu_core::empirical_blocking_loss(&batch, &payoff).unwrap());
    let statistical = match (&game, &dist) {
        (Some(g), Some(d)) => exact_or_null(d, |x| tu_core::blocking_loss(ItemSet(x as u32), g, &payoff)),
        _ => Value::Null,
    };
    let grand = game.as_ref().map(|g| g.grand_value().clone()).or(cfg.grand_value.clone());
    let rescaled = grand.map(|v| match tu_core::rescale_to_efficiency(payoff.clone(), &v) {
        Ok(p) => json!({ "payoff": q_vec(p.as_slice()) }),
        Err(e) => json!({ "subsidy_required": q_str(&e.excess) }),
    });
    let result = json!({
        "payoff": q_vec(payoff.as_slice()),
        "total": q_str(&payoff.total()),
        "batch_size": batch.len(),
        "empirical_loss": empirical.as_ref().map(q_str),
        "statistical_loss": statistical,
        "efficient": rescaled,
    });
    Ok(Report {
        status: Status::Ok,
        summary: format!("payoff [{}], total {}", q_vec(payoff.as_slice()).join(", "), q_str(&payoff.total())),
        csv_header: vec!["player", "payoff"],
        csv_rows: payoff
            .as_slice()
            .iter()
            .enumerate()
            .map(|(i, v)| vec![i.to_string(), q_str(v)])
            .collect(),
        config: to_value(&cfg),
        result,
    })
}

fn is_random(generator: &HedonicGenerator) -> bool {
    !matches!(generator, HedonicGenerator::AdditivelySeparable { weights: Some(_), .. })
}

fn hedonic_cmd(mut cfg: HedonicConfig, options: &Options) -> Result<Report, CliError> {
    if options.seed.is_some() {
        cfg.seed = options.seed;
    }
    let n = cfg.players;
    let game_seed = if is_random(&cfg.generator) {
        require_seed(cfg.seed, "a random hedonic generator")?
    } else {
        cfg.seed.unwrap_or(0)
    };
    let game = cfg
        .generator
        .generate_seeded::<Rational>(n, game_seed)
        .map_err(|e| bad(e.to_string()))?;
    let (batch, dist) = match (&cfg.batch, cfg.samples) {
        (Some(b), None) => (b.clone(), cfg.distribution.clone()),
        (None, Some(m)) => {
            let seed = require_seed(cfg.seed, "a sampled batch")?;
            let dist = match &cfg.distribution {
                Some(d) => d.clone(),
                None => DistributionSpec::uniform_nonempty_subsets(n, seed).map_err(|e| bad(e.to_string()))?,
            };
            let batch: Vec<HedonicSample<Rational>> = draw_points(&dist, m, seed)?
                .into_iter()
                .map(|x| game.sample(ItemSet(x as u32)))
                .collect();
            (batch, Some(dist))
        }
        _ => return Err(bad("give exactly one of `batch` and `samples`")),
    };
    let base = |status, result, summary: String, rows| Report {
        status,
        config: to_value(&cfg),
        result,
        csv_header: vec!["player", "block"],
        csv_rows: rows,
        summary,
    };
    match hedonic::consistent_partition_bruteforce(&batch, &game, n, cfg.rule) {
        Ok(p) => {
            let empirical = (!batch.is_empty())
                .then(|| hedonic::empirical_blocking_loss(&batch, &game, &p, cfg.rule).unwrap());
            let blocking: Vec<Vec<usize>> = (1..1u32 << n)
                .map(ItemSet)
                .filter(|&s| hedonic::blocking_loss(s, &game, &p, cfg.rule))
                .map(items)
                .collect();
            let statistical = dist
                .as_ref()
                .map_or(Value::Null, |d| exact_or_null(d, |x| hedonic::blocking_loss(ItemSet(x as u32), &game, &p, cfg.rule)));
            let rows = p.rgs().iter().enumerate().map(|(i, b)| vec![i.to_string(), b.to_string()]).collect();
            let result = json!({
                "partition": p,
                "batch_size": batch.len(),
                "empirical_loss": empirical.as_ref().map(q_str),
                "statistical_loss": statistical,
                "in_core": blocking.is_empty(),
                "blocking_coalitions": blocking,
            });
            Ok(base(Status::Ok, result, format!("partition {p}"), rows))
        }
        Err(HedonicError::NoConsistentPartition) => Ok(base(
            Status::NotFound,
            json!({ "error": HedonicError::NoConsistentPartition.to_string() }),
            "no partition is consistent with the batch".into(),
            Vec::new(),
        )),
        Err(e) => Err(bad(e.to_string())),
    }
}

fn condorcet_cmd(mut cfg: CondorcetConfig, options: &Options) -> Result<Report, CliError> {
    if options.seed.is_some() {
        cfg.seed = options.seed;
    }
    let profile: PreferenceProfile = match (&cfg.profile, &cfg.generator) {
        (Some(p), None) => p.clone(),
        (None, Some(generator)) => {
            let seed = require_seed(cfg.seed, "a generated profile")?;
            let k = cfg.candidates.ok_or_else(|| bad("`candidates` is required with `generator`"))?;
            let v = cfg.voters.ok_or_else(|| bad("`voters` is required with `generator`"))?;
            generator
                .generate(k, v, &mut rng::stream(seed, &[purpose::GENERATOR]))
                .map_err(|e| bad(e.to_string()))?
        }
        _ => return Err(bad("give exactly one of `profile` and `generator`")),
    };
    let k = profile.candidates();
    let sample = match (&cfg.sample, cfg.samples) {
        (Some(s), None) => s.clone(),
        (None, Some(m)) => {
            let seed = require_seed(cfg.seed, "a sampled candidate set")?;
            let dist = match &cfg.distribution {
                Some(d) => d.clone(),
                None => DistributionSpec::uniform_points(k, seed).map_err(|e| bad(e.to_string()))?,
            };
            draw_points(&dist, m, seed)?
        }
        _ => return Err(bad("give exactly one of `sample` and `samples`")),
    };
    if let Some(&c) = sample.iter().find(|&&c| c >= k) {
        return Err(bad(format!("sampled candidate {c} is out of range ({k} candidates)")));
    }
    let t = condorcet::build_tournament(&profile);
    let ties = t.has_ties();
    let (transitive, core) = if ties {
        (Value::Null, Value::Null)
    } else {
        let core = condorcet::three_cycle_core_size(&t).unwrap();
        (
            json!(condorcet::is_transitive(&t).unwrap()),
            json!({ "size": core, "dimension_bound": dimension::floor_log2_plus_two(core) }),
        )
    };
    let weights = condorcet::uniform_weights(k);
    let winner = condorcet::empirical_condorcet_winner(&profile, &sample);
    let (status, winner_value, loss, summary) = match winner {
        Ok(w) => {
            let loss = condorcet::winner_loss(&t, w, &weights);
            (Status::Ok, json!(w), json!(q_str(&loss)), format!("winner {w}, loss {}", q_str(&loss)))
        }
        Err(CondorcetError::NoEmpiricalWinner) => (
            Status::NotFound,
            Value::Null,
            Value::Null,
            "no sampled candidate beats all others".to_string(),
        ),
        Err(e) => return Err(bad(e.to_string())),
    };
    let winner_idx = winner.ok();
    let result = json!({
        "tournament": t,
        "ties": ties,
        "transitive": transitive,
        "three_cycle_core": core,
        "sample": sample,
        "winner": winner_value,
        "winner_loss": loss,
    });
    Ok(Report {
        status,
        config: to_value(&cfg),
        result,
        csv_header: vec!["candidate", "wins", "winner"],
        csv_rows: (0..k)
            .map(|c| {
                vec![
                    c.to_string(),
                    t.out_neighbours(c).len().to_string(),
                    (winner_idx == Some(c)).to_string(),
                ]
            })
            .collect(),
        summary,
    })
}

fn outcome_json(outcome: &MarketOutcome<Rational>, k: usize) -> Value {
    json!({
        "assignment": outcome.assignment.iter().map(|b| items(*b)).collect::<Vec<_>>(),
        "prices": q_vec(&outcome.prices),
        "perturbed_budgets": q_vec(&outcome.perturbed_budgets),
        "zeta": q_str(&outcome.zeta),
        "price_slack": q_str(&outcome.price_slack),
        "excess_sq": market::excess_allocation_sq(&outcome.assignment, k),
        "excess_compliant": market::excess_compliant(&outcome.assignment, k),
    })
}

fn market_cmd(mut cfg: MarketConfig, options: &Options) -> Result<Report, CliError> {
    if options.seed.is_some() {
        cfg.seed = options.seed;
    }
    let k = cfg.goods;
    let mut search = SearchConfig::new(cfg.zeta.clone());
    search.price_slack = cfg.price_slack.clone();
    if let Some(cap) = cfg.max_bundles {
        search.max_bundles = cap;
    }
    let (budgets, batch, instance, dist) = match (&cfg.budgets, &cfg.generator) {
        (Some(budgets), None) => {
            let samples = cfg.batch.as_ref().ok_or_else(|| bad("`samples` is required with `budgets`"))?;
            let batch = samples
                .iter()
                .map(|s| {
                    Ok(MarketSample {
                        bundle: set_from(&s.bundle, k, "bundle")?,
                        values: s.values.clone(),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            (budgets.clone(), batch, None, None)
        }
        (None, Some(generator)) => {
            let seed = require_seed(cfg.seed, "a generated market")?;
            let n = cfg.players.ok_or_else(|| bad("`players` is required with `generator`"))?;
            let m = cfg.m.ok_or_else(|| bad("`m` is required with `generator`"))?;
            let instance = generator
                .generate_seeded::<Rational>(n, k, seed)
                .map_err(|e| bad(e.to_string()))?;
            let dist = match &cfg.distribution {
                Some(d) => d.clone(),
                None => DistributionSpec::uniform_nonempty_subsets(k, seed).map_err(|e| bad(e.to_string()))?,
            };
            let batch = draw_points(&dist, m, seed)?
                .into_iter()
                .map(|x| instance.sample(ItemSet(x as u32)))
                .collect();
            (instance.budgets().to_vec(), batch, Some(instance), Some(dist))
        }
        _ => return Err(bad("give exactly one of `budgets` (with `samples`) and `generator`")),
    };
    search.max_players = search.max_players.max(budgets.len());
    let found = market::search_from_samples(k, &budgets, &batch, &search);
    let config = to_value(&cfg);
    match found {
        Ok(outcome) => {
            let statistical = match (&instance, &dist) {
                (Some(inst), Some(d)) => exact_or_null(d, |x| market::ce_loss(ItemSet(x as u32), inst, &outcome)),
                _ => Value::Null,
            };
            let mut rows: Vec<Vec<String>> = outcome
                .prices
                .iter()
                .enumerate()
                .map(|(g, p)| vec!["price".into(), g.to_string(), q_str(p)])
                .collect();
            for (i, (b, beta)) in outcome.assignment.iter().zip(&outcome.perturbed_budgets).enumerate() {
                let goods: Vec<String> = b.items().map(|g| g.to_string()).collect();
                rows.push(vec!["bundle".into(), i.to_string(), goods.join(" ")]);
                rows.push(vec!["budget".into(), i.to_string(), q_str(beta)]);
            }
            let summary = format!(
                "assignment {:?}, excess_sq {}",
                outcome.assignment.iter().map(|b| items(*b)).collect::<Vec<_>>(),
                market::excess_allocation_sq(&outcome.assignment, k)
            );
            Ok(Report {
                status: Status::Ok,
                config,
                result: json!({
                    "outcome": outcome_json(&outcome, k),
                    "batch_size": batch.len(),
                    "statistical_loss": statistical,
                }),
                csv_header: vec!["entity", "index", "value"],
                csv_rows: rows,
                summary,
            })
        }
        Err(MarketError::NotFound) => Ok(Report {
            status: Status::NotFound,
            config,
            result: json!({ "error": MarketError::NotFound.to_string() }),
            csv_header: vec!["entity", "index", "value"],
            csv_rows: Vec::new(),
            summary: "no consistent restricted outcome".into(),
        }),
        Err(e) => Err(bad(e.to_string())),
    }
}

fn build_instance(spec: &InstanceSpec) -> Result<ProblemInstance, CliError> {
    match spec {
        InstanceSpec::Builtin {
            builtin: Builtin::Argmax,
            points,
        } => {
            if !(1..=8).contains(points) {
                return Err(bad("argmax instance supports 1..=8 points"));
            }
            Ok(dimension::argmax_instance(*points))
        }
        InstanceSpec::Builtin {
            builtin: Builtin::Thresholds,
            points,
        } => {
            if *points == 0 {
                return Err(bad("thresholds instance needs at least one point"));
            }
            Ok(dimension::thresholds_instance(*points))
        }
        InstanceSpec::Explicit(p) => Ok(p.clone()),
    }
}

fn witness_json(p: &ProblemInstance, w: &ShatteringWitness) -> Value {
    json!({
        "points": w.points.iter().map(|&x| &p.point_names()[x]).collect::<Vec<_>>(),
        "games": w.games,
        "realized_labelings": w.realized_labelings.iter().map(|&s| &p.solution_names()[s]).collect::<Vec<_>>(),
    })
}

fn dimension_cmd(cfg: DimensionConfig) -> Result<Report, CliError> {
    let p = build_instance(&cfg.instance)?;
    let max_size = cfg.max_size.unwrap_or_else(|| dimension::default_max_size(&p));
    let sd = dimension::solution_dimension(&p, max_size);
    let nd = cfg.natarajan.then(|| dimension::natarajan_dimension(&p, max_size));
    let holds = cfg.bound.map(|b| sd.dimension <= b);
    let status = if holds == Some(false) { Status::Fail } else { Status::Ok };
    let mut summary = format!("d = {}", sd.dimension);
    if let Some(n) = &nd {
        summary.push_str(&format!(", natarajan = {}", n.dimension));
    }
    if let (Some(b), Some(h)) = (cfg.bound, holds) {
        summary.push_str(&format!(", bound {b} {}", if h { "holds" } else { "violated" }));
    }
    let result = json!({
        "dimension": sd.dimension,
        "max_size": max_size,
        "witness": witness_json(&p, &sd.witness),
        "natarajan": nd.as_ref().map(|n| json!({ "dimension": n.dimension, "witness": witness_json(&p, &n.witness) })),
        "bound_holds": holds,
    });
    Ok(Report {
        status,
        config: to_value(&cfg),
        result,
        csv_header: vec!["kind", "dimension", "witness_points"],
        csv_rows: std::iter::once(("solution", &sd))
            .chain(nd.as_ref().map(|n| ("natarajan", n)))
            .map(|(kind, r)| {
                let pts: Vec<&str> = r.witness.points.iter().map(|&x| p.point_names()[x].as_str()).collect();
                vec![kind.to_string(), r.dimension.to_string(), pts.join(" ")]
            })
            .collect(),
        summary,
    })
}

fn validation_report(config: Value, report: ValidationReport) -> Report {
    let status = if report.passed() { Status::Ok } else { Status::Fail };
    let summary = format!(
        "{}: failure_fraction {} vs threshold {:.4} (m = {}, {} trials)",
        if report.passed() { "pass" } else { "fail" },
        q_str(&report.failure_fraction),
        report.threshold,
        report.m,
        report.per_trial.len()
    );
    let rows = report
        .per_trial
        .iter()
        .map(|t| {
            vec![
                t.trial.to_string(),
                t.loss.as_ref().map(q_str).unwrap_or_default(),
                t.exceeded.to_string(),
                t.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    Report {
        status,
        config,
        result: to_value(&report),
        csv_header: vec!["trial", "loss", "exceeded", "error"],
        csv_rows: rows,
        summary,
    }
}

fn validate(mut cfg: ValidateConfig, options: &Options) -> Result<Report, CliError> {
    if let Some(seed) = options.seed {
        cfg.validation.seed = seed;
        cfg.distribution.seed = seed;
    }
    let (dist, vc) = (&cfg.distribution, &cfg.validation);
    let report = match &cfg.family {
        Family::Tucore(f) => montecarlo::validate_consistent(f, dist, vc),
        Family::Hedonic(f) => montecarlo::validate_consistent(f, dist, vc),
        Family::Condorcet(f) => montecarlo::validate_consistent(f, dist, vc),
        Family::Market(f) => montecarlo::validate_consistent(f, dist, vc),
    }
    .map_err(|e| bad(e.to_string()))?;
    Ok(validation_report(to_value(&cfg), report))
}

fn uc(mut cfg: UcConfig, options: &Options) -> Result<Report, CliError> {
    if let Some(seed) = options.seed {
        cfg.validation.seed = seed;
        cfg.distribution.seed = seed;
    }
    let p = build_instance(&cfg.instance)?;
    let report = montecarlo::validate_uniform_convergence(&p, &cfg.distribution, &cfg.validation)
        .map_err(|e| bad(e.to_string()))?;
    Ok(validation_report(to_value(&cfg), report))
}

fn render(command: &str, report: &Report, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => {
            let doc = json!({
                "command": command,
                "status": report.status.as_str(),
                "config": report.config,
                "result": report.result,
            });
            let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
            text.push('\n');
            Ok(text.into_bytes())
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Io(e.to_string());
            w.write_record(&report.csv_header).map_err(io)?;
            for row in &report.csv_rows {
                w.write_record(row).map_err(io)?;
            }
            w.into_inner().map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn write_report(command: &str, report: &Report, options: &Options) -> Result<(), CliError> {
    let bytes = render(command, report, options.format)?;
    match &options.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            let ext = match options.format {
                Format::Json => "json",
                Format::Csv => "csv",
            };
            let path: PathBuf = Path::new(dir).join(format!("{command}.{ext}"));
            fs::write(&path, &bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
        None => {
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    if !options.quiet {
        eprintln!("{command}: {}", report.summary);
    }
    Ok(())
}

