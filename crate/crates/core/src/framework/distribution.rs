//! Seedable sampling distributions over point codes.
//!
//! A point code is a plain `usize`: an index into an instance space, or a
//! bitmask when the distribution ranges over subsets of a ground set.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::FrameworkError;
use crate::rng::{self, StreamRng};
use crate::scalar::rational_str;
use crate::Rational;

/// Subset distributions enumerate their support only up to this ground size.
pub const MAX_ENUMERABLE_GROUND: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DistributionKind {
    /// Uniform over the listed point codes; repeated codes carry extra weight.
    UniformOverListedPoints { points: Vec<usize> },
    /// Uniform over the non-empty subsets of `{0, .., ground-1}` (bitmasks).
    UniformNonemptySubsets { ground: usize },
    /// Each element of `{0, .., ground-1}` is included independently with
    /// probability `p`; the empty set can be drawn.
    IndependentInclusion {
        ground: usize,
        #[serde(with = "rational_str")]
        p: Rational,
    },
    /// Point `i` is drawn with probability `weights[i]`.
    ExplicitWeighted {
        #[serde(with = "rational_str::vec")]
        weights: Vec<Rational>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionSpec {
    #[serde(flatten)]
    pub kind: DistributionKind,
    #[serde(default)]
    pub seed: u64,
}

/// Monte-Carlo estimate of a statistical loss.
#[derive(Clone, Debug, PartialEq)]
pub struct LossEstimate {
    pub estimate: Rational,
    /// 95% normal-approximation half-width, `1.96 * sqrt(p(1-p)/H)`.
    pub half_width: f64,
}

impl DistributionSpec {
    pub fn new(kind: DistributionKind, seed: u64) -> Result<Self, FrameworkError> {
        let spec = DistributionSpec { kind, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn uniform_points(count: usize, seed: u64) -> Result<Self, FrameworkError> {
        Self::new(
            DistributionKind::UniformOverListedPoints {
                points: (0..count).collect(),
            },
            seed,
        )
    }

    pub fn uniform_nonempty_subsets(ground: usize, seed: u64) -> Result<Self, FrameworkError> {
        Self::new(DistributionKind::UniformNonemptySubsets { ground }, seed)
    }

    pub fn explicit(weights: Vec<Rational>, seed: u64) -> Result<Self, FrameworkError> {
        Self::new(DistributionKind::ExplicitWeighted { weights }, seed)
    }

    pub fn validate(&self) -> Result<(), FrameworkError> {
        let bad = |m: String| Err(FrameworkError::InvalidDistribution(m));
        match &self.kind {
            DistributionKind::UniformOverListedPoints { points } => {
                if points.is_empty() {
                    return bad("no points listed".into());
                }
            }
            DistributionKind::UniformNonemptySubsets { ground } => {
                if *ground == 0 || *ground > 31 {
                    return bad(format!("ground size {ground} outside 1..=31"));
                }
            }
            DistributionKind::IndependentInclusion { ground, p } => {
                if *ground == 0 || *ground > 31 {
                    return bad(format!("ground size {ground} outside 1..=31"));
                }
                if p.is_negative() || *p > BigRational::one() {
                    return bad(format!("inclusion probability {p} outside [0, 1]"));
                }
                if p.denom().to_u64().is_none() {
                    return bad("inclusion probability denominator exceeds 64 bits".into());
                }
            }
            DistributionKind::ExplicitWeighted { weights } => {
                if weights.is_empty() {
                    return bad("no weights".into());
                }
                if weights.iter().any(|w| w.is_negative()) {
                    return bad("negative weight".into());
                }
                let total: BigRational = weights.iter().sum();
                if !total.is_one() {
                    return bad(format!("weights sum to {total}, not 1"));
                }
                let (den, _) = common_denominator(weights);
                if den.to_u64().is_none() {
                    return bad("common denominator of weights exceeds 64 bits".into());
                }
            }
        }
        Ok(())
    }

    /// Largest point code this distribution can produce, when it is bounded
    /// by an index space rather than a subset lattice.
    pub(crate) fn max_point(&self) -> Option<usize> {
        match &self.kind {
            DistributionKind::UniformOverListedPoints { points } => points.iter().copied().max(),
            DistributionKind::ExplicitWeighted { weights } => Some(weights.len() - 1),
            DistributionKind::UniformNonemptySubsets { ground }
            | DistributionKind::IndependentInclusion { ground, .. } => Some((1usize << ground) - 1),
        }
    }

    /// Stream keyed by this distribution's own seed plus `keys`.
    pub fn stream(&self, keys: &[u64]) -> StreamRng {
        rng::stream(self.seed, keys)
    }

    /// One draw. Assumes the spec validated.
    pub fn sample(&self, rng: &mut StreamRng) -> usize {
        match &self.kind {
            DistributionKind::UniformOverListedPoints { points } => {
                points[rng.gen_range(0..points.len() as u64) as usize]
            }
            DistributionKind::UniformNonemptySubsets { ground } => {
                rng.gen_range(1..(1u64 << ground)) as usize
            }
            DistributionKind::IndependentInclusion { ground, p } => {
                let num = p.numer().to_u64().expect("validated");
                let den = p.denom().to_u64().expect("validated");
                (0..*ground)
                    .filter(|_| rng.gen_range(0..den) < num)
                    .fold(0usize, |acc, i| acc | (1 << i))
            }
            DistributionKind::ExplicitWeighted { weights } => {
                let (den, nums) = common_denominator(weights);
                let den = den.to_u64().expect("validated");
                let u = rng.gen_range(0..den);
                let mut acc = 0u64;
                for (i, n) in nums.iter().enumerate() {
                    acc += n.to_u64().expect("numerator bounded by denominator");
                    if u < acc {
                        return i;
                    }
                }
                unreachable!("weights sum to one")
            }
        }
    }

    /// Explicit support with exact weights, in increasing point order.
    pub fn support(&self) -> Result<Vec<(usize, Rational)>, FrameworkError> {
        match &self.kind {
            DistributionKind::UniformOverListedPoints { points } => {
                let mut sorted = points.clone();
                sorted.sort_unstable();
                let total = BigInt::from(points.len());
                let mut out: Vec<(usize, Rational)> = Vec::new();
                for p in sorted {
                    match out.last_mut() {
                        Some((q, w)) if *q == p => *w += BigRational::new(BigInt::one(), total.clone()),
                        _ => out.push((p, BigRational::new(BigInt::one(), total.clone()))),
                    }
                }
                Ok(out)
            }
            DistributionKind::UniformNonemptySubsets { ground } => {
                check_enumerable(*ground)?;
                let count = (1u64 << ground) - 1;
                let w = BigRational::new(BigInt::one(), BigInt::from(count));
                Ok((1..=count as usize).map(|s| (s, w.clone())).collect())
            }
            DistributionKind::IndependentInclusion { ground, p } => {
                check_enumerable(*ground)?;
                let q = BigRational::one() - p;
                let out = (0..(1usize << ground))
                    .map(|s| {
                        let k = s.count_ones() as usize;
                        let w = num_traits::pow(p.clone(), k) * num_traits::pow(q.clone(), ground - k);
                        (s, w)
                    })
                    .filter(|(_, w)| !w.is_zero())
                    .collect();
                Ok(out)
            }
            DistributionKind::ExplicitWeighted { weights } => Ok(weights
                .iter()
                .cloned()
                .enumerate()
                .filter(|(_, w)| !w.is_zero())
                .collect()),
        }
    }
}

fn check_enumerable(ground: usize) -> Result<(), FrameworkError> {
    if ground > MAX_ENUMERABLE_GROUND {
        Err(FrameworkError::UnsupportedDistribution(format!(
            "support over 2^{ground} subsets is too large to enumerate"
        )))
    } else {
        Ok(())
    }
}

/// Least common denominator `D` and numerators `w_i * D`.
fn common_denominator(weights: &[Rational]) -> (BigInt, Vec<BigInt>) {
    let den = weights
        .iter()
        .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let nums = weights
        .iter()
        .map(|w| w.numer() * (&den / w.denom()))
        .collect();
    (den, nums)
}

/// `sum_x weight(x) * loss(x)` over the explicit support of `dist`.
pub fn exact_statistical_loss<F>(dist: &DistributionSpec, loss: F) -> Result<Rational, FrameworkError>
where
    F: Fn(usize) -> bool,
{
    Ok(dist
        .support()?
        .into_iter()
        .filter(|(x, _)| loss(*x))
        .map(|(_, w)| w)
        .sum())
}

/// Mean loss over `holdout` fresh draws from `dist`, using the stream keyed
/// by `(dist.seed, seed)`.
pub fn statistical_loss_estimate<F>(
    dist: &DistributionSpec,
    holdout: usize,
    seed: u64,
    loss: F,
) -> Result<LossEstimate, FrameworkError>
where
    F: Fn(usize) -> bool,
{
    if holdout == 0 {
        return Err(FrameworkError::InvalidParams("holdout size must be at least 1".into()));
    }
    let mut rng = dist.stream(&[seed, rng::purpose::HOLDOUT]);
    let hits = (0..holdout).filter(|_| loss(dist.sample(&mut rng))).count();
    Ok(estimate_from_counts(hits, holdout))
}

pub(crate) fn estimate_from_counts(hits: usize, total: usize) -> LossEstimate {
    let p = hits as f64 / total as f64;
    LossEstimate {
        estimate: BigRational::new(BigInt::from(hits), BigInt::from(total)),
        half_width: 1.96 * (p * (1.0 - p) / total as f64).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rational, rational_int};

    #[test]
    fn rejects_weights_not_summing_to_one() {
        let r = DistributionSpec::explicit(vec![rational(1, 3), rational(1, 3)], 0);
        assert!(matches!(r, Err(FrameworkError::InvalidDistribution(_))));
    }

    #[test]
    fn exact_loss_weights() {
        let d = DistributionSpec::explicit(vec![rational(1, 3), rational(2, 3)], 0).unwrap();
        assert_eq!(exact_statistical_loss(&d, |_| false).unwrap(), rational_int(0));
        assert_eq!(exact_statistical_loss(&d, |x| x == 0).unwrap(), rational(1, 3));
    }

    #[test]
    fn estimate_of_constant_losses() {
        let d = DistributionSpec::uniform_points(5, 3).unwrap();
        let zero = statistical_loss_estimate(&d, 100, 1, |_| false).unwrap();
        assert_eq!(zero.estimate, rational_int(0));
        assert_eq!(zero.half_width, 0.0);
        let one = statistical_loss_estimate(&d, 100, 1, |_| true).unwrap();
        assert_eq!(one.estimate, rational_int(1));
    }

    #[test]
    fn estimate_two_point_support_near_half() {
        let d = DistributionSpec::uniform_points(2, 11).unwrap();
        let exact = exact_statistical_loss(&d, |x| x == 1).unwrap();
        assert_eq!(exact, rational(1, 2));
        let est = statistical_loss_estimate(&d, 10_000, 5, |x| x == 1).unwrap();
        assert!((est.estimate.to_f64().unwrap() - 0.5).abs() <= 0.02);
    }

    #[test]
    fn subset_supports_sum_to_one() {
        let u = DistributionSpec::uniform_nonempty_subsets(4, 0).unwrap();
        let s = u.support().unwrap();
        assert_eq!(s.len(), 15);
        assert_eq!(s.iter().map(|(_, w)| w).sum::<Rational>(), rational_int(1));

        let ind = DistributionSpec::new(
            DistributionKind::IndependentInclusion { ground: 3, p: rational(1, 4) },
            0,
        )
        .unwrap();
        let s = ind.support().unwrap();
        assert_eq!(s.len(), 8);
        assert_eq!(s.iter().map(|(_, w)| w).sum::<Rational>(), rational_int(1));
        assert_eq!(s[0].1, rational(27, 64));
    }

    #[test]
    fn large_ground_is_unsupported_for_exact() {
        let u = DistributionSpec::uniform_nonempty_subsets(25, 0).unwrap();
        assert!(matches!(u.support(), Err(FrameworkError::UnsupportedDistribution(_))));
    }

    #[test]
    fn weighted_sampling_hits_only_support() {
        let d = DistributionSpec::explicit(vec![rational(1, 2), rational_int(0), rational(1, 2)], 9).unwrap();
        let mut rng = d.stream(&[0]);
        for _ in 0..500 {
            assert_ne!(d.sample(&mut rng), 1);
        }
    }

    #[test]
    fn json_shape() {
        let d: DistributionSpec = serde_json::from_str(
            r#"{"kind":"explicit-weighted","weights":["1/3","2/3"],"seed":4}"#,
        )
        .unwrap();
        assert_eq!(d.seed, 4);
        assert!(d.validate().is_ok());
        let u: DistributionSpec =
            serde_json::from_str(r#"{"kind":"uniform-nonempty-subsets","ground":6}"#).unwrap();
        assert_eq!(u.kind, DistributionKind::UniformNonemptySubsets { ground: 6 });
    }
}
