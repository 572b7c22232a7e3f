//! Statistical solution concepts.
//!
//! A solution concept is learned from samples: a latent game labels points
//! drawn from a distribution, and a solver must return a solution whose
//! probability of violating the concept on a fresh point is small. This
//! crate provides the generic machinery ([`framework`], [`dimension`],
//! [`montecarlo`]) and four concrete domains: TU-game cores ([`tu_core`]),
//! hedonic-game partitions ([`hedonic`]), Condorcet winners ([`condorcet`])
//! and Fisher-market outcomes ([`market`]).
//!
//! Numeric domain types are generic over [`Scalar`]; exact rationals are the
//! default everywhere a result is compared bit-for-bit.

#![allow(clippy::needless_range_loop)]

pub mod coalition;
pub mod condorcet;
pub mod dimension;
pub mod framework;
pub mod hedonic;
pub mod lp;
pub mod market;
pub mod montecarlo;
pub mod rng;
pub mod scalar;
pub mod tu_core;

pub use coalition::{Bundle, Coalition, ItemSet};
pub use scalar::Scalar;

/// Exact rational scalar used for probabilities, losses and exact solvers.
pub type Rational = num_rational::BigRational;

/// Exact-rational domain types.
pub type TuGameQ = tu_core::TuGame<Rational>;
pub type PayoffVectorQ = tu_core::PayoffVector<Rational>;
pub type HedonicGameQ = hedonic::HedonicGame<Rational>;
pub type FisherInstanceQ = market::FisherInstance<Rational>;
pub type MarketOutcomeQ = market::MarketOutcome<Rational>;
pub type LinearProgramQ = lp::LinearProgram<Rational>;

/// Double-precision domain types.
pub type TuGameF64 = tu_core::TuGame<f64>;
pub type PayoffVectorF64 = tu_core::PayoffVector<f64>;
pub type HedonicGameF64 = hedonic::HedonicGame<f64>;
pub type FisherInstanceF64 = market::FisherInstance<f64>;
pub type MarketOutcomeF64 = market::MarketOutcome<f64>;
pub type LinearProgramF64 = lp::LinearProgram<f64>;
