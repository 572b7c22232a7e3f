//! Dense two-phase simplex over any [`Scalar`].
//!
//! All variables are nonnegative. Pivoting follows Bland's rule (lowest
//! eligible column enters; ratio ties leave by lowest basic column), so the
//! method terminates on degenerate problems and returns the same vertex on
//! every run. With exact rationals the optimum is exact.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<T> {
    pub coefficients: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram<T> {
    variables: usize,
    constraints: Vec<Constraint<T>>,
    objective: Vec<T>,
    sense: Sense,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("expected {expected} coefficients, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(sense: Sense, objective: Vec<T>) -> Self {
        LinearProgram {
            variables: objective.len(),
            constraints: Vec::new(),
            objective,
            sense,
        }
    }

    pub fn minimize(objective: Vec<T>) -> Self {
        Self::new(Sense::Min, objective)
    }

    pub fn maximize(objective: Vec<T>) -> Self {
        Self::new(Sense::Max, objective)
    }

    pub fn add_constraint(&mut self, coefficients: Vec<T>, relation: Relation, rhs: T) -> Result<&mut Self, LpError> {
        if coefficients.len() != self.variables {
            return Err(LpError::DimensionMismatch {
                expected: self.variables,
                got: coefficients.len(),
            });
        }
        self.constraints.push(Constraint {
            coefficients,
            relation,
            rhs,
        });
        Ok(self)
    }

    pub fn variables(&self) -> usize {
        self.variables
    }

    pub fn constraints(&self) -> &[Constraint<T>] {
        &self.constraints
    }

    pub fn objective(&self) -> &[T] {
        &self.objective
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    /// Objective value of `x` in the program's own sense.
    pub fn evaluate(&self, x: &[T]) -> T {
        dot(&self.objective, x)
    }

    /// Whether `x >= 0` satisfies every constraint (with the scalar's
    /// tolerance).
    pub fn is_feasible(&self, x: &[T]) -> bool {
        x.len() == self.variables
            && x.iter().all(|v| !v.is_negative_tol())
            && self.constraints.iter().all(|c| {
                let lhs = dot(&c.coefficients, x) - c.rhs.clone();
                match c.relation {
                    Relation::Le => !lhs.is_positive_tol(),
                    Relation::Ge => !lhs.is_negative_tol(),
                    Relation::Eq => lhs.is_zero_tol(),
                }
            })
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (u, v)| acc + u.clone() * v.clone())
}

struct Tableau<T> {
    /// Constraint rows; the last entry of each row is the right-hand side.
    rows: Vec<Vec<T>>,
    /// Reduced costs; the last entry is minus the current objective value.
    cost: Vec<T>,
    basis: Vec<usize>,
    /// Columns allowed to enter the basis.
    active: usize,
}

impl<T: Scalar> Tableau<T> {
    fn rhs_col(&self) -> usize {
        self.cost.len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / piv.clone();
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row, &pivot_row, c);
            }
        }
        eliminate(&mut self.cost, &pivot_row, c);
        self.basis[r] = c;
    }

    fn price_out(&mut self) {
        for r in 0..self.rows.len() {
            let row = self.rows[r].clone();
            eliminate(&mut self.cost, &row, self.basis[r]);
        }
    }

    /// Runs Bland pivots to optimality.
    fn optimize(&mut self) -> Result<(), LpError> {
        let rhs = self.rhs_col();
        loop {
            let Some(enter) = (0..self.active).find(|&j| self.cost[j].is_negative_tol()) else {
                return Ok(());
            };
            let mut leave: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive_tol() {
                    continue;
                }
                let ratio = row[rhs].clone() / row[enter].clone();
                let better = match &leave {
                    None => true,
                    Some((l, best)) => {
                        let diff = ratio.clone() - best.clone();
                        diff.is_negative_tol() || (diff.is_zero_tol() && self.basis[i] < self.basis[*l])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return Err(LpError::Unbounded);
            };
            self.pivot(r, enter);
        }
    }
}

fn eliminate<T: Scalar>(row: &mut [T], pivot_row: &[T], c: usize) {
    let f = row[c].clone();
    if f.is_zero() {
        return;
    }
    for (v, p) in row.iter_mut().zip(pivot_row) {
        if !p.is_zero() {
            *v = v.clone() - f.clone() * p.clone();
        }
    }
}

/// Solves `lp` to optimality.
pub fn simplex_solve<T: Scalar>(lp: &LinearProgram<T>) -> Result<LpSolution<T>, LpError> {
    let n = lp.variables;
    let m = lp.constraints.len();

    // Normalize to nonnegative right-hand sides.
    let normalized: Vec<(Vec<T>, Relation, T)> = lp
        .constraints
        .iter()
        .map(|c| {
            if c.rhs.is_negative() {
                let flipped = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (c.coefficients.iter().map(|a| -a.clone()).collect(), flipped, -c.rhs.clone())
            } else {
                (c.coefficients.clone(), c.relation, c.rhs.clone())
            }
        })
        .collect();

    let n_slack = normalized.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
    let n_art = normalized.iter().filter(|(_, r, _)| *r != Relation::Le).count();
    let width = n + n_slack + n_art;
    let art_start = n + n_slack;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut next_slack, mut next_art) = (n, art_start);
    for (coeffs, rel, rhs) in normalized {
        let mut row = vec![T::zero(); width + 1];
        row[..n].clone_from_slice(&coeffs);
        row[width] = rhs;
        match rel {
            Relation::Le => {
                row[next_slack] = T::one();
                basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -T::one();
                next_slack += 1;
                row[next_art] = T::one();
                basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = T::one();
                basis.push(next_art);
                next_art += 1;
            }
        }
        rows.push(row);
    }

    let mut t = Tableau {
        rows,
        cost: vec![T::zero(); width + 1],
        basis,
        active: width,
    };

    if n_art > 0 {
        for j in art_start..width {
            t.cost[j] = T::one();
        }
        t.price_out();
        t.optimize().expect("phase one is bounded below by zero");
        let phase_one = -t.cost[width].clone();
        if phase_one.is_positive_tol() {
            return Err(LpError::Infeasible);
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= art_start {
                match (0..art_start).find(|&j| !t.rows[r][j].is_zero_tol()) {
                    Some(j) => {
                        t.pivot(r, j);
                        r += 1;
                    }
                    None => {
                        t.rows.remove(r);
                        t.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
        t.active = art_start;
    }

    t.cost = vec![T::zero(); width + 1];
    for (j, c) in lp.objective.iter().enumerate() {
        t.cost[j] = match lp.sense {
            Sense::Min => c.clone(),
            Sense::Max => -c.clone(),
        };
    }
    t.price_out();
    t.optimize()?;

    let mut x = vec![T::zero(); n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rows[r][width].clone();
        }
    }
    let objective = lp.evaluate(&x);
    Ok(LpSolution { x, objective })
}
