//! JSON config schemas, one per subcommand. Rationals are `"p/q"` strings.

use serde::{Deserialize, Serialize};
use statsol::condorcet::{PreferenceProfile, ProfileGenerator};
use statsol::framework::{DistributionSpec, ProblemInstance};
use statsol::hedonic::{BlockingRule, HedonicGenerator, HedonicSample};
use statsol::market::MarketGenerator;
use statsol::montecarlo::{CondorcetFamily, HedonicFamily, MarketFamily, TuFamily, ValidationConfig};
use statsol::scalar::rational_str;
use statsol::tu_core::TuGenerator;
use statsol::Rational;

/// `{"coalition": [players], "value": "p/q"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuSampleJson {
    pub coalition: Vec<usize>,
    #[serde(with = "rational_str")]
    pub value: Rational,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    pub players: usize,
    /// Labelled coalitions; alternative to `generator`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch: Option<Vec<TuSampleJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<TuGenerator>,
    /// Batch size drawn from the generated game.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Defaults to uniform over non-empty coalitions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionSpec>,
    /// `v(N)` for rescaling an explicit batch to efficiency.
    #[serde(default, with = "rational_str::option", skip_serializing_if = "Option::is_none")]
    pub grand_value: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HedonicConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    pub players: usize,
    /// The labelling game; the solver reads it for assigned blocks.
    pub generator: HedonicGenerator,
    #[serde(default)]
    pub rule: BlockingRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch: Option<Vec<HedonicSample<Rational>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CondorcetConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    /// Voter rankings, best first; alternative to `generator`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<PreferenceProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<ProfileGenerator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voters: Option<usize>,
    /// Sampled candidates; alternative to `samples`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Defaults to uniform over candidates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// `{"bundle": [goods], "values": ["p/q" per player]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSampleJson {
    pub bundle: Vec<usize>,
    #[serde(with = "rational_str::vec")]
    pub values: Vec<Rational>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    pub goods: usize,
    /// Explicit budgets and samples; alternative to `generator`.
    #[serde(default, with = "rational_str::vec_option", skip_serializing_if = "Option::is_none")]
    pub budgets: Option<Vec<Rational>>,
    #[serde(default, rename = "samples", skip_serializing_if = "Option::is_none")]
    pub batch: Option<Vec<MarketSampleJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub players: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<MarketGenerator>,
    /// Batch size drawn from the generated market.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionSpec>,
    #[serde(with = "rational_str")]
    pub zeta: Rational,
    #[serde(default, with = "rational_str::option", skip_serializing_if = "Option::is_none")]
    pub price_slack: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_bundles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    Argmax,
    Thresholds,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceSpec {
    Builtin { builtin: Builtin, points: usize },
    Explicit(ProblemInstance),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    pub instance: InstanceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_size: Option<usize>,
    #[serde(default)]
    pub natarajan: bool,
    /// Claimed upper bound; exit 1 when exceeded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "kebab-case")]
pub enum Family {
    Tucore(TuFamily),
    Hedonic(HedonicFamily),
    Condorcet(CondorcetFamily),
    Market(MarketFamily),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    pub family: Family,
    pub distribution: DistributionSpec,
    pub validation: ValidationConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UcConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    pub instance: InstanceSpec,
    pub distribution: DistributionSpec,
    pub validation: ValidationConfig,
}
