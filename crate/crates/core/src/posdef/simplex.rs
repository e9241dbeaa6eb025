//! Dense two-phase simplex over exact rationals with Bland's rule.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// Maximise `objective . x` subject to the rows; variables flagged `free`
/// are unrestricted, the rest are nonnegative.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub objective: Vec<BigRational>,
    pub free: Vec<bool>,
    pub rows: Vec<(Vec<BigRational>, Relation, BigRational)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<BigRational>, value: BigRational },
    Infeasible,
    Unbounded,
}

/// Guard against a malformed tableau; Bland's rule never cycles.
const MAX_PIVOTS: usize = 200_000;

struct Tableau {
    a: Vec<Vec<BigRational>>,
    rhs: Vec<BigRational>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.a[r][c].clone();
        for v in self.a[r].iter_mut() {
            *v = &*v / &p;
        }
        self.rhs[r] = &self.rhs[r] / &p;
        let prow = self.a[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.a.len() {
            if i == r || self.a[i][c].is_zero() {
                continue;
            }
            let f = self.a[i][c].clone();
            for (v, pv) in self.a[i].iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v = &*v - &f * pv;
                }
            }
            self.rhs[i] = &self.rhs[i] - &f * &prhs;
        }
        self.basis[r] = c;
    }

    /// Maximises `cost . x` over the columns in `allowed`. Returns false if unbounded.
    fn optimise(&mut self, cost: &[BigRational], allowed: &[bool]) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            // Bland: lowest-index column with positive reduced cost
            let entering = (0..cost.len()).filter(|&j| allowed[j] && !self.basis.contains(&j)).find(|&j| {
                let mut r = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !self.a[i][j].is_zero() {
                        r -= &cost[b] * &self.a[i][j];
                    }
                }
                r.is_positive()
            });
            let Some(c) = entering else { return Ok(true) };
            let mut best: Option<(usize, BigRational)> = None;
            for i in 0..self.a.len() {
                if self.a[i][c].is_positive() {
                    let ratio = &self.rhs[i] / &self.a[i][c];
                    let better = match &best {
                        None => true,
                        Some((k, b)) => ratio < *b || (ratio == *b && self.basis[i] < self.basis[*k]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = best else { return Ok(false) };
            self.pivot(r, c);
        }
        Err(Error::SizeLimit(format!("simplex exceeded {MAX_PIVOTS} pivots")))
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.objective.len();
    if lp.free.len() != n || lp.rows.iter().any(|(r, _, _)| r.len() != n) {
        return Err(Error::InvalidParameter("linear program dimensions disagree".into()));
    }
    // columns: x+ for every variable, x- for free ones, then slacks, then artificials
    let mut col_of = Vec::with_capacity(n);
    let mut ncols = 0;
    for &f in &lp.free {
        col_of.push((ncols, f.then_some(ncols + 1)));
        ncols += if f { 2 } else { 1 };
    }
    let structural = ncols;
    let n_slack = lp.rows.iter().filter(|(_, rel, _)| *rel != Relation::Eq).count();
    let m = lp.rows.len();
    let total = structural + n_slack + m;
    let zero = BigRational::zero();
    let mut a = vec![vec![zero.clone(); total]; m];
    let mut rhs = Vec::with_capacity(m);
    let mut slack = structural;
    for (i, (coeffs, rel, b)) in lp.rows.iter().enumerate() {
        for (j, v) in coeffs.iter().enumerate() {
            let (p, q) = col_of[j];
            a[i][p] = v.clone();
            if let Some(q) = q {
                a[i][q] = -v;
            }
        }
        match rel {
            Relation::Le => {
                a[i][slack] = BigRational::from_integer(1.into());
                slack += 1;
            }
            Relation::Ge => {
                a[i][slack] = BigRational::from_integer((-1).into());
                slack += 1;
            }
            Relation::Eq => {}
        }
        let mut b = b.clone();
        if b.is_negative() {
            for v in a[i].iter_mut() {
                *v = -&*v;
            }
            b = -b;
        }
        a[i][structural + n_slack + i] = BigRational::from_integer(1.into());
        rhs.push(b);
    }
    let basis = (0..m).map(|i| structural + n_slack + i).collect();
    let mut t = Tableau { a, rhs, basis };

    // phase one: maximise minus the sum of artificials
    let mut cost1 = vec![zero.clone(); total];
    for c in cost1.iter_mut().skip(structural + n_slack) {
        *c = BigRational::from_integer((-1).into());
    }
    t.optimise(&cost1, &vec![true; total])?;
    let infeasibility: BigRational = t
        .basis
        .iter()
        .zip(&t.rhs)
        .filter(|(&b, _)| b >= structural + n_slack)
        .map(|(_, v)| v.clone())
        .sum();
    if infeasibility.is_positive() {
        return Ok(LpOutcome::Infeasible);
    }
    // drive zero-level artificials out; drop redundant rows
    let mut i = 0;
    while i < t.basis.len() {
        if t.basis[i] >= structural + n_slack {
            match (0..structural + n_slack).find(|&j| !t.a[i][j].is_zero()) {
                Some(j) => t.pivot(i, j),
                None => {
                    t.a.remove(i);
                    t.rhs.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    let mut cost2 = vec![zero.clone(); total];
    for (j, c) in lp.objective.iter().enumerate() {
        let (p, q) = col_of[j];
        cost2[p] = c.clone();
        if let Some(q) = q {
            cost2[q] = -c;
        }
    }
    let allowed: Vec<bool> = (0..total).map(|j| j < structural + n_slack).collect();
    if !t.optimise(&cost2, &allowed)? {
        return Ok(LpOutcome::Unbounded);
    }
    let mut col_value = vec![zero.clone(); total];
    for (&b, v) in t.basis.iter().zip(&t.rhs) {
        col_value[b] = v.clone();
    }
    let x: Vec<BigRational> = col_of
        .iter()
        .map(|&(p, q)| match q {
            Some(q) => &col_value[p] - &col_value[q],
            None => col_value[p].clone(),
        })
        .collect();
    let value = x.iter().zip(&lp.objective).map(|(x, c)| x * c).sum();
    Ok(LpOutcome::Optimal { x, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let lp = LinearProgram {
            objective: vec![r(3), r(5)],
            free: vec![false, false],
            rows: vec![
                (vec![r(1), r(0)], Relation::Le, r(4)),
                (vec![r(0), r(2)], Relation::Le, r(12)),
                (vec![r(3), r(2)], Relation::Le, r(18)),
            ],
        };
        assert_eq!(solve(&lp).unwrap(), LpOutcome::Optimal { x: vec![r(2), r(6)], value: r(36) });
    }

    #[test]
    fn free_variables_and_equalities() {
        // max t, t <= x, t <= -x - 2, x free -> x = -1, t = -1
        let lp = LinearProgram {
            objective: vec![r(0), r(1)],
            free: vec![true, true],
            rows: vec![
                (vec![r(-1), r(1)], Relation::Le, r(0)),
                (vec![r(1), r(1)], Relation::Le, r(-2)),
                (vec![r(1), r(0)], Relation::Eq, r(-1)),
            ],
        };
        assert_eq!(solve(&lp).unwrap(), LpOutcome::Optimal { x: vec![r(-1), r(-1)], value: r(-1) });
    }

    #[test]
    fn infeasible_and_unbounded() {
        let infeasible = LinearProgram {
            objective: vec![r(1)],
            free: vec![false],
            rows: vec![(vec![r(1)], Relation::Ge, r(2)), (vec![r(1)], Relation::Le, r(1))],
        };
        assert_eq!(solve(&infeasible).unwrap(), LpOutcome::Infeasible);
        let unbounded = LinearProgram { objective: vec![r(1)], free: vec![true], rows: vec![(vec![r(1)], Relation::Ge, r(0))] };
        assert_eq!(solve(&unbounded).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn degenerate_redundant_rows() {
        let lp = LinearProgram {
            objective: vec![r(1), r(1)],
            free: vec![false, false],
            rows: vec![
                (vec![r(1), r(1)], Relation::Eq, r(1)),
                (vec![r(2), r(2)], Relation::Eq, r(2)),
                (vec![r(1), r(0)], Relation::Le, r(1)),
            ],
        };
        match solve(&lp).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, r(1)),
            other => panic!("{other:?}"),
        }
    }
}
