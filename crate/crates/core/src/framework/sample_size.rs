//! Sample-size calculators for uniform convergence and consistent solving.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::FrameworkError;
use crate::scalar::{rational_int, rational_str};
use crate::Rational;

/// Accuracy, confidence and the two universal constants of the sample-size
/// bounds. `epsilon` lies in `(0, 1]`, `delta` in `(0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct PacParameters {
    #[serde(with = "rational_str")]
    epsilon: Rational,
    #[serde(with = "rational_str")]
    delta: Rational,
    #[serde(with = "rational_str")]
    alpha1: Rational,
    #[serde(with = "rational_str")]
    alpha2: Rational,
}

#[derive(Deserialize)]
struct RawParams {
    #[serde(with = "rational_str")]
    epsilon: Rational,
    #[serde(with = "rational_str")]
    delta: Rational,
    #[serde(default, with = "rational_str::option")]
    alpha1: Option<Rational>,
    #[serde(default, with = "rational_str::option")]
    alpha2: Option<Rational>,
}

impl TryFrom<RawParams> for PacParameters {
    type Error = FrameworkError;

    fn try_from(raw: RawParams) -> Result<Self, Self::Error> {
        PacParameters::with_constants(
            raw.epsilon,
            raw.delta,
            raw.alpha1.unwrap_or_else(|| rational_int(PacParameters::DEFAULT_ALPHA1)),
            raw.alpha2.unwrap_or_else(|| rational_int(PacParameters::DEFAULT_ALPHA2)),
        )
    }
}

impl PacParameters {
    pub const DEFAULT_ALPHA1: i64 = 8;
    pub const DEFAULT_ALPHA2: i64 = 4;

    pub fn new(epsilon: Rational, delta: Rational) -> Result<Self, FrameworkError> {
        Self::with_constants(
            epsilon,
            delta,
            rational_int(Self::DEFAULT_ALPHA1),
            rational_int(Self::DEFAULT_ALPHA2),
        )
    }

    pub fn with_constants(
        epsilon: Rational,
        delta: Rational,
        alpha1: Rational,
        alpha2: Rational,
    ) -> Result<Self, FrameworkError> {
        let invalid = |m: String| Err(FrameworkError::InvalidParams(m));
        if !epsilon.is_positive() || epsilon > BigRational::one() {
            return invalid(format!("epsilon = {epsilon} must lie in (0, 1]"));
        }
        if !delta.is_positive() || delta >= BigRational::one() {
            return invalid(format!("delta = {delta} must lie in (0, 1)"));
        }
        if !alpha1.is_positive() || !alpha2.is_positive() {
            return invalid("alpha constants must be positive".into());
        }
        Ok(PacParameters {
            epsilon,
            delta,
            alpha1,
            alpha2,
        })
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    pub fn delta(&self) -> &Rational {
        &self.delta
    }

    pub fn alpha1(&self) -> &Rational {
        &self.alpha1
    }

    pub fn alpha2(&self) -> &Rational {
        &self.alpha2
    }
}

pub(crate) fn f(q: &Rational) -> f64 {
    q.to_f64().expect("bounded rational")
}

pub(crate) fn ceil_count(x: f64) -> usize {
    // guards against 1e-15 overshoot turning an exact integer into the next one
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r.max(0.0) as usize
    } else {
        x.ceil().max(0.0) as usize
    }
}

/// `ceil(alpha1 * (d + ln(1/delta)) / epsilon^2)`.
pub fn uc_sample_size(d: usize, params: &PacParameters) -> usize {
    let eps = f(&params.epsilon);
    let ln_inv_delta = (1.0 / f(&params.delta)).ln();
    ceil_count(f(&params.alpha1) * (d as f64 + ln_inv_delta) / (eps * eps))
}

/// `ceil((alpha2 / epsilon) * (d * ln(1/epsilon) + ln(1/delta)))`, with
/// `ln(1/epsilon)` clamped below at 1 (i.e. for `epsilon >= 1/e`).
pub fn consistent_sample_size(d: usize, params: &PacParameters) -> usize {
    let eps = f(&params.epsilon);
    let ln_inv_eps = (1.0 / eps).ln().max(1.0);
    let ln_inv_delta = (1.0 / f(&params.delta)).ln();
    ceil_count(f(&params.alpha2) / eps * (d as f64 * ln_inv_eps + ln_inv_delta))
}
