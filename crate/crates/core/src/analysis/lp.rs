//! Small exact linear programs over `BigRational`.
//!
//! A dense two-phase tableau simplex with Bland's rule, plus a vertex
//! enumerator that is only practical for a handful of variables.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

pub fn ratio(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

pub fn to_f64(x: &Q) -> f64 {
    num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Q>,
    pub relation: Relation,
    pub rhs: Q,
}

/// Maximize `objective · x` subject to `constraints` and `x >= 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub objective: Vec<Q>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<Q>,
    pub value: Q,
}

impl LinearProgram {
    pub fn new(objective: Vec<Q>) -> Self {
        LinearProgram {
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<Q>, relation: Relation, rhs: Q) {
        debug_assert_eq!(coeffs.len(), self.vars());
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn le(&mut self, coeffs: Vec<Q>, rhs: Q) {
        self.add(coeffs, Relation::Le, rhs);
    }

    pub fn ge(&mut self, coeffs: Vec<Q>, rhs: Q) {
        self.add(coeffs, Relation::Ge, rhs);
    }

    pub fn is_feasible(&self, x: &[Q]) -> bool {
        x.iter().all(|v| !v.is_negative())
            && self.constraints.iter().all(|c| {
                let lhs: Q = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                }
            })
    }

    pub fn value_at(&self, x: &[Q]) -> Q {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Solves with the two-phase simplex method.
    pub fn maximize(&self) -> Result<LpSolution> {
        Tableau::build(self).solve(self)
    }
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
    n_struct: usize,
    n_cols: usize,
    artificial: Vec<bool>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.vars();
        let m = lp.constraints.len();
        // column layout: structural, then one slack/surplus per inequality, then artificials
        let mut n_slack = 0;
        let mut n_art = 0;
        let normalized: Vec<(Vec<Q>, Relation, Q)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (
                        c.coeffs.iter().map(|a| -a).collect(),
                        flipped,
                        -c.rhs.clone(),
                    )
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();
        for (_, rel, _) in &normalized {
            match rel {
                Relation::Le => n_slack += 1,
                Relation::Ge => {
                    n_slack += 1;
                    n_art += 1
                }
                Relation::Eq => n_art += 1,
            }
        }
        let n_cols = n + n_slack + n_art;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut artificial = vec![false; n_cols];
        let mut next_slack = n;
        let mut next_art = n + n_slack;
        for (coeffs, rel, rhs) in normalized {
            let mut row = vec![Q::zero(); n_cols + 1];
            row[..n].clone_from_slice(&coeffs);
            row[n_cols] = rhs;
            match rel {
                Relation::Le => {
                    row[next_slack] = Q::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -Q::one();
                    next_slack += 1;
                    row[next_art] = Q::one();
                    artificial[next_art] = true;
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = Q::one();
                    artificial[next_art] = true;
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(row);
        }
        Tableau {
            rows,
            basis,
            n_struct: n,
            n_cols,
            artificial,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations for `cost` over the allowed columns.
    /// Returns false when unbounded.
    fn optimize(&mut self, cost: &[Q], allowed: &[bool]) -> bool {
        loop {
            let mut entering = None;
            for j in 0..self.n_cols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j].clone();
                for (i, row) in self.rows.iter().enumerate() {
                    if !row[j].is_zero() {
                        d -= &cost[self.basis[i]] * &row[j];
                    }
                }
                if d.is_positive() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, Q)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let t = &row[self.n_cols] / &row[c];
                    let better = match &leave {
                        None => true,
                        Some((li, lt)) => t < *lt || (t == *lt && self.basis[i] < self.basis[*li]),
                    };
                    if better {
                        leave = Some((i, t));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }

    fn solve(mut self, lp: &LinearProgram) -> Result<LpSolution> {
        let all: Vec<bool> = vec![true; self.n_cols];
        if self.artificial.iter().any(|&a| a) {
            let phase1: Vec<Q> = self
                .artificial
                .iter()
                .map(|&a| if a { -Q::one() } else { Q::zero() })
                .collect();
            self.optimize(&phase1, &all);
            let infeasible = self
                .basis
                .iter()
                .zip(&self.rows)
                .any(|(&b, row)| self.artificial[b] && row[self.n_cols].is_positive());
            if infeasible {
                return Err(Error::Lp("infeasible".into()));
            }
            // drive zero-level artificials out of the basis
            let mut r = 0;
            while r < self.rows.len() {
                if self.artificial[self.basis[r]] {
                    match (0..self.n_cols)
                        .find(|&j| !self.artificial[j] && !self.rows[r][j].is_zero())
                    {
                        Some(c) => self.pivot(r, c),
                        None => {
                            self.rows.remove(r);
                            self.basis.remove(r);
                            continue;
                        }
                    }
                }
                r += 1;
            }
        }
        let mut cost = vec![Q::zero(); self.n_cols];
        cost[..self.n_struct].clone_from_slice(&lp.objective);
        let allowed: Vec<bool> = self.artificial.iter().map(|a| !a).collect();
        if !self.optimize(&cost, &allowed) {
            return Err(Error::Lp("unbounded".into()));
        }
        let mut x = vec![Q::zero(); self.n_struct];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_struct {
                x[b] = self.rows[i][self.n_cols].clone();
            }
        }
        let value = lp.value_at(&x);
        Ok(LpSolution { x, value })
    }
}

/// Solves `a x = b` for square `a`; `None` when singular.
fn solve_square(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, p);
        b.swap(col, p);
        let pv = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v /= &pv;
        }
        b[col] /= &pv;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let prow = a[col].clone();
                for (v, pv) in a[r].iter_mut().zip(&prow) {
                    *v -= &f * pv;
                }
                let bc = b[col].clone();
                b[r] -= f * bc;
            }
        }
    }
    Some(b)
}

/// Brute-force optimum over all basic feasible points. Exponential in the
/// number of constraints; meant for cross-checking tiny programs. Assumes
/// the optimum is attained.
pub fn maximize_by_vertices(lp: &LinearProgram) -> Option<LpSolution> {
    let n = lp.vars();
    // every constraint as an equality candidate, plus x_i = 0
    let mut planes: Vec<(Vec<Q>, Q)> = lp
        .constraints
        .iter()
        .map(|c| (c.coeffs.clone(), c.rhs.clone()))
        .collect();
    for i in 0..n {
        let mut e = vec![Q::zero(); n];
        e[i] = Q::one();
        planes.push((e, Q::zero()));
    }
    let mut best: Option<LpSolution> = None;
    let mut pick: Vec<usize> = (0..n).collect();
    if n == 0 {
        return Some(LpSolution {
            x: Vec::new(),
            value: Q::zero(),
        });
    }
    loop {
        let a: Vec<Vec<Q>> = pick.iter().map(|&i| planes[i].0.clone()).collect();
        let b: Vec<Q> = pick.iter().map(|&i| planes[i].1.clone()).collect();
        if let Some(x) = solve_square(a, b) {
            if lp.is_feasible(&x) {
                let value = lp.value_at(&x);
                if best.as_ref().is_none_or(|s| value > s.value) {
                    best = Some(LpSolution { x, value });
                }
            }
        }
        // next combination
        let m = planes.len();
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < m - n + i {
                pick[i] += 1;
                for k in i + 1..n {
                    pick[k] = pick[k - 1] + 1;
                }
                break;
            }
        }
    }
}
