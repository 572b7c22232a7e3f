#![allow(dead_code)]

//! Independent oracles for the integration and acceptance suites.

use num_traits::{One, Signed, Zero};
use rand::Rng;

use statsol::framework::{ProblemInstance, SampleBatch};
use statsol::lp::{LinearProgram, Relation, Sense};
use statsol::market::MarketSample;
use statsol::rng::StreamRng;
use statsol::{Bundle, ItemSet, Rational};

pub fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Unique solution of the square system `a x = b`, if any.
pub fn gauss_solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = Rational::one() / &a[col][col];
        for v in &mut a[col][col..] {
            *v = &*v * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (v, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *v -= &factor * p;
                }
                let delta = &factor * &b[col];
                b[r] -= delta;
            }
        }
    }
    Some(b)
}

fn combinations(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Vertices of `{x >= 0 : a_r x >= b_r}` by brute force over tight sets.
pub fn vertices(rows: &[(Vec<Rational>, Rational)], dim: usize) -> Vec<Vec<Rational>> {
    let mut all: Vec<(Vec<Rational>, Rational)> = rows.to_vec();
    for j in 0..dim {
        let mut e = vec![q(0); dim];
        e[j] = q(1);
        all.push((e, q(0)));
    }
    let mut out = Vec::new();
    if dim == 0 {
        if rows.iter().all(|(_, b)| *b <= q(0)) {
            out.push(Vec::new());
        }
        return out;
    }
    combinations(all.len(), dim, |tight| {
        let a = tight.iter().map(|&r| all[r].0.clone()).collect();
        let b = tight.iter().map(|&r| all[r].1.clone()).collect();
        if let Some(x) = gauss_solve(a, b) {
            let feasible = all.iter().all(|(row, rhs)| {
                let lhs: Rational = row.iter().zip(&x).map(|(c, v)| c * v).sum();
                lhs >= *rhs
            });
            if feasible && !out.contains(&x) {
                out.push(x);
            }
        }
    });
    out
}

/// Optimal objective of a bounded LP by enumerating basic feasible
/// solutions; `None` when no vertex is feasible.
pub fn lp_vertex_optimum(lp: &LinearProgram<Rational>) -> Option<Rational> {
    let n = lp.variables();
    let mut rows = Vec::new();
    for c in lp.constraints() {
        let neg: Vec<Rational> = c.coefficients.iter().map(|v| -v).collect();
        match c.relation {
            Relation::Ge => rows.push((c.coefficients.clone(), c.rhs.clone())),
            Relation::Le => rows.push((neg, -c.rhs.clone())),
            Relation::Eq => {
                rows.push((c.coefficients.clone(), c.rhs.clone()));
                rows.push((neg, -c.rhs.clone()));
            }
        }
    }
    let values = vertices(&rows, n).into_iter().map(|x| lp.evaluate(&x));
    match lp.sense() {
        Sense::Min => values.min(),
        Sense::Max => values.max(),
    }
}

/// Random LP with `n <= 4` variables and `k <= 6` constraints whose
/// feasible region is bounded by a box.
pub fn random_bounded_lp(rng: &mut StreamRng) -> LinearProgram<Rational> {
    let n = rng.gen_range(1..=4usize);
    let k = rng.gen_range(1..=6usize);
    let coef = |rng: &mut StreamRng| q(rng.gen_range(-3i64..=3));
    let objective = (0..n).map(|_| coef(rng)).collect();
    let mut lp = if rng.gen_bool(0.5) {
        LinearProgram::minimize(objective)
    } else {
        LinearProgram::maximize(objective)
    };
    // the box takes one constraint slot
    lp.add_constraint(vec![q(1); n], Relation::Le, q(rng.gen_range(1i64..=8))).unwrap();
    for _ in 1..k {
        let row = (0..n).map(|_| coef(rng)).collect();
        let rel = match rng.gen_range(0..3) {
            0 => Relation::Le,
            1 => Relation::Ge,
            _ => Relation::Eq,
        };
        lp.add_constraint(row, rel, Rational::new(rng.gen_range(-6i64..=6).into(), rng.gen_range(1i64..=3).into()))
            .unwrap();
    }
    lp
}

fn choice_bundle(bundles: &[Bundle], c: usize) -> Bundle {
    if c == 0 {
        Bundle::EMPTY
    } else {
        bundles[c - 1]
    }
}

/// Best restricted assignment by (excess, lexicographic) order that admits
/// feasible prices, with perturbed budgets eliminated analytically and
/// feasibility decided by vertex enumeration in price space.
pub fn market_oracle(
    k: usize,
    budgets: &[Rational],
    batch: &[MarketSample<Rational>],
    zeta: &Rational,
    slack: &Rational,
) -> Option<Vec<Bundle>> {
    let n = budgets.len();
    let mut bundles: Vec<Bundle> = Vec::new();
    let mut values: Vec<Vec<Rational>> = Vec::new();
    for smp in batch {
        if !smp.bundle.is_empty() && !bundles.contains(&smp.bundle) {
            bundles.push(smp.bundle);
            values.push(smp.values.clone());
        }
    }
    let observed: Vec<usize> = (0..k).filter(|&g| bundles.iter().any(|b| b.contains(g))).collect();
    let value = |i: usize, c: usize| if c == 0 { q(0) } else { values[c - 1][i].clone() };
    let row = |s: Bundle| -> Vec<Rational> {
        observed.iter().map(|&g| if s.contains(g) { q(1) } else { q(0) }).collect()
    };

    let m = bundles.len();
    let mut choices: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..n {
        choices = choices
            .into_iter()
            .flat_map(|prefix| {
                (0..=m).map(move |c| {
                    let mut p = prefix.clone();
                    p.push(c);
                    p
                })
            })
            .collect();
    }
    let excess = |choice: &[usize]| -> i64 {
        (0..k)
            .map(|g| {
                let h = choice.iter().filter(|&&c| choice_bundle(&bundles, c).contains(g)).count() as i64;
                (h - 1) * (h - 1)
            })
            .sum()
    };
    choices.sort_by(|a, b| excess(a).cmp(&excess(b)).then(a.cmp(b)));

    for choice in choices {
        let mut rows: Vec<(Vec<Rational>, Rational)> = Vec::new();
        for i in 0..n {
            let own = choice_bundle(&bundles, choice[i]);
            let own_row = row(own);
            let upper = &budgets[i] + zeta;
            rows.push((own_row.iter().map(|v| -v).collect(), -upper));
            let floor = {
                let l = &budgets[i] - zeta;
                if l.is_negative() {
                    q(0)
                } else {
                    l
                }
            };
            for j in 0..m {
                if values[j][i] > value(i, choice[i]) {
                    let s_row = row(bundles[j]);
                    rows.push((s_row.clone(), &floor + slack));
                    let diff = s_row.iter().zip(&own_row).map(|(a, b)| a - b).collect();
                    rows.push((diff, slack.clone()));
                }
            }
        }
        if !vertices(&rows, observed.len()).is_empty() {
            return Some(choice.iter().map(|&c| choice_bundle(&bundles, c)).collect());
        }
    }
    None
}

/// `min_s max_{g consistent} empirical loss`, by counting.
pub fn worst_case_oracle(p: &ProblemInstance, batch: &SampleBatch) -> Option<Rational> {
    let m = batch.len() as i64;
    let consistent: Vec<usize> = (0..p.n_games())
        .filter(|&g| batch.iter().all(|(x, y)| p.label(g, x) == y))
        .collect();
    if consistent.is_empty() {
        return None;
    }
    (0..p.n_solutions())
        .map(|s| {
            consistent
                .iter()
                .map(|&g| Rational::new(batch.iter().filter(|(x, _)| p.loss(*x, g, s)).count().into(), m.into()))
                .max()
                .unwrap()
        })
        .min()
}

/// `min_s` of the posterior-weighted empirical loss, by counting.
pub fn bayesian_oracle(p: &ProblemInstance, prior: &[Rational], batch: &SampleBatch) -> Option<Rational> {
    let m = batch.len() as i64;
    let consistent: Vec<usize> = (0..p.n_games())
        .filter(|&g| batch.iter().all(|(x, y)| p.label(g, x) == y))
        .collect();
    let mass: Rational = consistent.iter().map(|&g| prior[g].clone()).sum();
    if mass.is_zero() {
        return None;
    }
    (0..p.n_solutions())
        .map(|s| {
            let total: Rational = consistent
                .iter()
                .map(|&g| {
                    &prior[g] * Rational::new(batch.iter().filter(|(x, _)| p.loss(*x, g, s)).count().into(), m.into())
                })
                .sum();
            total / &mass
        })
        .min()
}

/// Random explicit instance with `1..=5` points, up to 3 labels, 4 games
/// and 4 solutions.
pub fn random_instance(rng: &mut StreamRng) -> ProblemInstance {
    let nx = rng.gen_range(1..=5usize);
    let ny = rng.gen_range(1..=3usize);
    let ng = rng.gen_range(1..=4usize);
    let ns = rng.gen_range(1..=4usize);
    let games: Vec<Vec<usize>> = (0..ng)
        .map(|_| (0..nx).map(|_| rng.gen_range(0..ny)).collect())
        .collect();
    let table: Vec<bool> = (0..nx * ng * ns).map(|_| rng.gen_bool(0.5)).collect();
    let names = |p: &str, n: usize| (0..n).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
    ProblemInstance::new(names("x", nx), names("y", ny), games, names("s", ns), |x, g, s| {
        table[(x * ng + g) * ns + s]
    })
    .unwrap()
}

/// Random instance over a fixed point set and game set, with `ns`
/// solutions and loss drawn at density `p`.
pub fn random_loss_instance(
    rng: &mut StreamRng,
    nx: usize,
    games: &[Vec<usize>],
    ns: usize,
    p: f64,
) -> ProblemInstance {
    let ng = games.len();
    let ny = games.iter().flatten().max().map_or(1, |m| m + 1);
    let table: Vec<bool> = (0..nx * ng * ns).map(|_| rng.gen_bool(p)).collect();
    let names = |p: &str, n: usize| (0..n).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
    ProblemInstance::new(names("x", nx), names("y", ny), games.to_vec(), names("s", ns), |x, g, s| {
        table[(x * ng + g) * ns + s]
    })
    .unwrap()
}

pub fn coalition(bits: usize) -> ItemSet {
    ItemSet(bits as u32)
}
