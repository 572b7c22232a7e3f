//! Brute-force shattering dimensions of explicit instances.
//!
//! A set `C` of points is *S-shattered* when a single game realizes every
//! binary labeling of `C` through the loss of some solution. The solution
//! dimension is the size of the largest such set. The generalized Natarajan
//! variant asks for two games disagreeing on all of `C` whose losses realize
//! complementary labelings through one solution. Both are computed by
//! enumerating subsets in lexicographic order, smallest sizes first; since
//! every subset of a shattered set is shattered by the same game, the search
//! stops at the first size with no witness.

use serde::{Deserialize, Serialize};

use crate::framework::ProblemInstance;

/// Cap on witness size used when the caller has no preference.
pub const DEFAULT_MAX_SIZE: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShatteringWitness {
    /// Shattered points, increasing.
    pub points: Vec<usize>,
    /// One game for S-shattering, the disagreeing pair `[g0, g1]` for
    /// N-shattering. Empty when the witness is the empty set.
    pub games: Vec<usize>,
    /// `realized_labelings[b]` is a solution whose loss pattern on `points`
    /// equals `b`, where bit `t` of `b` is the label of `points[t]`.
    pub realized_labelings: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionResult {
    pub dimension: usize,
    pub witness: ShatteringWitness,
}

impl ShatteringWitness {
    fn empty() -> Self {
        ShatteringWitness {
            points: Vec::new(),
            games: Vec::new(),
            realized_labelings: Vec::new(),
        }
    }

    /// Replays every recorded labeling through the loss.
    pub fn validate(&self, problem: &ProblemInstance) -> bool {
        if self.points.is_empty() {
            return self.games.is_empty() && self.realized_labelings.is_empty();
        }
        let d = self.points.len();
        if self.realized_labelings.len() != 1 << d {
            return false;
        }
        let in_range = self.points.iter().all(|&x| x < problem.n_points())
            && self.games.iter().all(|&g| g < problem.n_games())
            && self.realized_labelings.iter().all(|&s| s < problem.n_solutions());
        if !in_range {
            return false;
        }
        match self.games.as_slice() {
            [g] => self
                .realized_labelings
                .iter()
                .enumerate()
                .all(|(b, &s)| pattern(problem, &self.points, *g, s) == b),
            [g0, g1] => {
                let disagree = self
                    .points
                    .iter()
                    .all(|&x| problem.label(*g0, x) != problem.label(*g1, x));
                let mask = (1 << d) - 1;
                disagree
                    && self.realized_labelings.iter().enumerate().all(|(b, &s)| {
                        pattern(problem, &self.points, *g0, s) == b
                            && pattern(problem, &self.points, *g1, s) == !b & mask
                    })
            }
            _ => false,
        }
    }
}

/// `min(|X|, DEFAULT_MAX_SIZE)`.
pub fn default_max_size(problem: &ProblemInstance) -> usize {
    problem.n_points().min(DEFAULT_MAX_SIZE)
}

/// Loss bits of `(g, s)` over `points`, bit `t` for `points[t]`.
fn pattern(problem: &ProblemInstance, points: &[usize], g: usize, s: usize) -> usize {
    points
        .iter()
        .enumerate()
        .fold(0, |acc, (t, &x)| acc | ((problem.loss(x, g, s) as usize) << t))
}

/// Advances `c` to the next `k`-combination of `0..n` in lexicographic
/// order; false when `c` was the last one.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// First witness of size `d` in canonical order (subsets lexicographic, then
/// the per-subset check).
fn first_witness<F>(n_points: usize, d: usize, mut check: F) -> Option<ShatteringWitness>
where
    F: FnMut(&[usize]) -> Option<ShatteringWitness>,
{
    if d > n_points {
        return None;
    }
    let mut c: Vec<usize> = (0..d).collect();
    loop {
        if let Some(w) = check(&c) {
            return Some(w);
        }
        if !next_combination(&mut c, n_points) {
            return None;
        }
    }
}

fn search<F>(problem: &ProblemInstance, max_size: usize, mut check: F) -> DimensionResult
where
    F: FnMut(&[usize]) -> Option<ShatteringWitness>,
{
    let cap = max_size.min(problem.n_points());
    let mut best = DimensionResult {
        dimension: 0,
        witness: ShatteringWitness::empty(),
    };
    for d in 1..=cap {
        match first_witness(problem.n_points(), d, &mut check) {
            Some(w) => {
                best = DimensionResult {
                    dimension: d,
                    witness: w,
                }
            }
            None => break,
        }
    }
    best
}

/// Size of the largest S-shattered set with at most `max_size` points, with
/// the first witness of that size.
pub fn solution_dimension(problem: &ProblemInstance, max_size: usize) -> DimensionResult {
    let ns = problem.n_solutions();
    search(problem, max_size, |points| {
        let full = 1usize << points.len();
        if ns < full {
            return None;
        }
        let mut realized = vec![usize::MAX; full];
        for g in 0..problem.n_games() {
            realized.iter_mut().for_each(|r| *r = usize::MAX);
            let mut covered = 0;
            for s in 0..ns {
                let b = pattern(problem, points, g, s);
                if realized[b] == usize::MAX {
                    realized[b] = s;
                    covered += 1;
                    if covered == full {
                        return Some(ShatteringWitness {
                            points: points.to_vec(),
                            games: vec![g],
                            realized_labelings: realized,
                        });
                    }
                }
            }
        }
        None
    })
}

/// Generalized Natarajan dimension: two games disagreeing on every point of
/// `C`, with one solution per labeling `b` realizing `b` under the first game
/// and its complement under the second.
pub fn natarajan_dimension(problem: &ProblemInstance, max_size: usize) -> DimensionResult {
    let ns = problem.n_solutions();
    let ng = problem.n_games();
    search(problem, max_size, |points| {
        let full = 1usize << points.len();
        let mask = full - 1;
        if ns < full {
            return None;
        }
        let mut realized = vec![usize::MAX; full];
        for g0 in 0..ng {
            for g1 in g0 + 1..ng {
                if points.iter().any(|&x| problem.label(g0, x) == problem.label(g1, x)) {
                    continue;
                }
                realized.iter_mut().for_each(|r| *r = usize::MAX);
                let mut covered = 0;
                for s in 0..ns {
                    let b0 = pattern(problem, points, g0, s);
                    if pattern(problem, points, g1, s) != !b0 & mask || realized[b0] != usize::MAX {
                        continue;
                    }
                    realized[b0] = s;
                    covered += 1;
                    if covered == full {
                        return Some(ShatteringWitness {
                            points: points.to_vec(),
                            games: vec![g0, g1],
                            realized_labelings: realized,
                        });
                    }
                }
            }
        }
        None
    })
}

/// Classical VC dimension of a finite class of binary hypotheses over
/// `n_points` points; `hypotheses[h][x]` is the label of `x`.
pub fn vc_dimension(n_points: usize, hypotheses: &[Vec<bool>]) -> usize {
    assert!(hypotheses.iter().all(|h| h.len() == n_points));
    let mut best = 0;
    for d in 1..=n_points.min(usize::BITS as usize - 1) {
        if hypotheses.len() < 1 << d {
            break;
        }
        let mut c: Vec<usize> = (0..d).collect();
        let mut found = false;
        loop {
            let mut seen = vec![false; 1 << d];
            let mut count = 0;
            for h in hypotheses {
                let b = c
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (t, &x)| acc | ((h[x] as usize) << t));
                if !seen[b] {
                    seen[b] = true;
                    count += 1;
                }
            }
            if count == 1 << d {
                found = true;
                break;
            }
            if !next_combination(&mut c, n_points) {
                break;
            }
        }
        if !found {
            break;
        }
        best = d;
    }
    best
}

/// Whether the solution dimension is at most `bound`. Only sizes up to
/// `bound + 1` are searched.
pub fn verify_dimension_bound(problem: &ProblemInstance, bound: usize) -> bool {
    solution_dimension(problem, bound.saturating_add(1)).dimension <= bound
}

/// Largest `d` with `2^d <= k + 2`, i.e. `floor(log2(k + 2))`.
pub fn floor_log2_plus_two(k: usize) -> usize {
    (usize::BITS - 1 - (k + 2).leading_zeros()) as usize
}

/// Learning instance with `S = G = hypotheses` and the disagreement loss
/// `loss(x, g, h) = [g(x) != h(x)]`. Labels are `{0, 1}`.
pub fn disagreement_instance(hypotheses: &[Vec<bool>]) -> ProblemInstance {
    let n = hypotheses.first().map_or(0, Vec::len);
    let games: Vec<Vec<usize>> = hypotheses
        .iter()
        .map(|h| h.iter().map(|&b| b as usize).collect())
        .collect();
    ProblemInstance::new(
        (0..n).map(|x| format!("x{x}")).collect(),
        vec!["0".into(), "1".into()],
        games,
        (0..hypotheses.len()).map(|h| format!("h{h}")).collect(),
        |x, g, s| hypotheses[g][x] != hypotheses[s][x],
    )
    .expect("hypotheses over a non-empty point set")
}

/// Threshold classifiers `h_t(x) = [x >= t]`, `t = 0..=n`, on `n` points of
/// a line.
pub fn threshold_hypotheses(n: usize) -> Vec<Vec<bool>> {
    (0..=n).map(|t| (0..n).map(|x| x >= t).collect()).collect()
}

pub fn thresholds_instance(n: usize) -> ProblemInstance {
    disagreement_instance(&threshold_hypotheses(n))
}

/// Argmax problem on `n` points: games are all bijections onto ranks
/// `1..=n`, solutions are the points, and `loss(x, g, x*) = [g(x) > g(x*)]`.
pub fn argmax_instance(n: usize) -> ProblemInstance {
    assert!((1..=8).contains(&n), "argmax instance supports 1..=8 points");
    let mut games = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    permutations(&mut perm, 0, &mut games);
    ProblemInstance::new(
        (0..n).map(|x| format!("x{x}")).collect(),
        (1..=n).map(|r| r.to_string()).collect(),
        games.clone(),
        (0..n).map(|x| format!("x{x}")).collect(),
        |x, g, s| games[g][x] > games[g][s],
    )
    .expect("non-empty argmax instance")
}

fn permutations(p: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == p.len() {
        out.push(p.clone());
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, out);
        p.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_enumerate_in_order() {
        let mut c = vec![0, 1];
        let mut all = vec![c.clone()];
        while next_combination(&mut c, 4) {
            all.push(c.clone());
        }
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
    }

    #[test]
    fn single_solution_has_dimension_zero() {
        let p = ProblemInstance::new(
            vec!["a".into(), "b".into()],
            vec!["y".into()],
            vec![vec![0, 0]],
            vec!["s".into()],
            |x, _, _| x == 0,
        )
        .unwrap();
        let r = solution_dimension(&p, 2);
        assert_eq!(r.dimension, 0);
        assert!(r.witness.points.is_empty());
        assert!(r.witness.validate(&p));
    }

    #[test]
    fn argmax_three_points() {
        let p = argmax_instance(3);
        let r = solution_dimension(&p, 3);
        assert_eq!(r.dimension, 1);
        assert!(r.witness.validate(&p));
    }

    #[test]
    fn vc_basics() {
        assert_eq!(vc_dimension(3, &[vec![true, false, true]]), 0);
        let cube: Vec<Vec<bool>> = (0..8).map(|b| (0..3).map(|i| b >> i & 1 == 1).collect()).collect();
        assert_eq!(vc_dimension(3, &cube), 3);
        assert_eq!(vc_dimension(4, &threshold_hypotheses(4)), 1);
    }

    #[test]
    fn thresholds_collapse_to_vc() {
        let p = thresholds_instance(4);
        assert_eq!(solution_dimension(&p, 4).dimension, 1);
    }

    #[test]
    fn natarajan_needs_two_games() {
        let p = ProblemInstance::new(
            vec!["a".into()],
            vec!["0".into(), "1".into()],
            vec![vec![0]],
            vec!["s".into(), "t".into()],
            |_, _, s| s == 1,
        )
        .unwrap();
        assert_eq!(natarajan_dimension(&p, 1).dimension, 0);
        assert_eq!(solution_dimension(&p, 1).dimension, 1);
    }

    #[test]
    fn log2_floor() {
        assert_eq!(floor_log2_plus_two(0), 1);
        assert_eq!(floor_log2_plus_two(2), 2);
        assert_eq!(floor_log2_plus_two(3), 2);
        assert_eq!(floor_log2_plus_two(6), 3);
    }

    #[test]
    fn bound_check_searches_one_past() {
        let p = thresholds_instance(5);
        assert!(verify_dimension_bound(&p, 1));
        assert!(!verify_dimension_bound(&p, 0));
    }
}
