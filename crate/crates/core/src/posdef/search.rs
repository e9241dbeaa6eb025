//! Search for witnesses on a grid by exact linear programming.
//!
//! By symmetrising `x -> -x` a feasible `P` may be taken real and even, so
//! `P = sum_h c_h cos(2 pi h.x)` over one representative `h` of each pair
//! `±h` in `D`. The search maximises `t` subject to `sum c_h = 1` and
//! `P(x_g) >= t` on the grid `x_g = g / G`, adding violated grid points to
//! the active set until the optimum is feasible on the whole grid. Cosines
//! are rounded to multiples of `2^-20`; the returned polynomial is then
//! certified on the continuum, so the rounding never leaks into a claim.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::certify::{verify_kmf_witness, GridParams, WitnessCheck};
use super::simplex::{solve, LinearProgram, LpOutcome, Relation};
use super::CoefficientFamily;
use crate::error::{Error, Result};
use crate::exact::format_rational;
use crate::lattice::{FiniteSet, IndexBox, MultiIndex};
use crate::numeric::e_ratio;

/// Largest number of frequency pairs.
pub const MAX_FREQUENCIES: usize = 12;
/// Largest number of grid points.
pub const MAX_GRID_POINTS: usize = 10_000;
const COS_BITS: u32 = 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchParams {
    pub eps: f64,
    /// Grid points per coordinate.
    pub grid: usize,
    /// Extra slack for the continuum check; computed from the Lipschitz
    /// constant and the grid spacing when absent.
    pub margin: Option<f64>,
    /// Violated points added per round.
    pub batch: usize,
    pub max_rounds: usize,
    pub certify: GridParams,
}

impl SearchParams {
    pub fn new(eps: f64, grid: usize) -> Self {
        Self { eps, grid, margin: None, batch: 8, max_rounds: 500, certify: GridParams::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum SearchOutcome {
    Found {
        witness: CoefficientFamily,
        /// Grid optimum `max t`, exact and rounded.
        t_star: f64,
        t_star_exact: String,
        margin: f64,
        eps_certified: f64,
        check: WitnessCheck,
        rounds: usize,
        active_points: usize,
    },
    /// The grid problem has optimum below `-eps`. Says nothing about `D`
    /// beyond this grid.
    InfeasibleAtGrid { t_star: f64, t_star_exact: String, eps: f64, grid: usize, rounds: usize, active_points: usize },
}

impl SearchOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, Self::Found { check, .. } if check.is_witness)
    }
}

/// One representative of each pair `±h`, zero dropped, in lexicographic order.
fn representatives(d: &FiniteSet) -> Vec<MultiIndex> {
    let mut reps: Vec<MultiIndex> = d
        .points()
        .iter()
        .filter(|h| !h.is_zero())
        .map(|h| {
            let first = h.coords().iter().find(|&&c| c != 0).copied().unwrap_or(0);
            if first < 0 {
                -h
            } else {
                h.clone()
            }
        })
        .collect();
    reps.sort();
    reps.dedup();
    reps
}

pub fn witness_search(d: &FiniteSet, params: &SearchParams) -> Result<SearchOutcome> {
    if d.is_empty() {
        return Err(Error::InvalidParameter("frequency set is empty".into()));
    }
    if params.eps.is_nan() || params.eps <= 0.0 {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let reps = representatives(d);
    if reps.is_empty() {
        return Err(Error::InvalidParameter("frequency set contains only zero".into()));
    }
    if reps.len() > MAX_FREQUENCIES {
        return Err(Error::SizeLimit(format!("{} frequency pairs, limit {MAX_FREQUENCIES}", reps.len())));
    }
    let dim = d.dim();
    let g = params.grid;
    let n_points = (g as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    if g < 2 || n_points > MAX_GRID_POINTS as u128 {
        return Err(Error::SizeLimit(format!("grid {g}^{dim} must have between 2 and {MAX_GRID_POINTS} points")));
    }
    let points: Vec<MultiIndex> = IndexBox::from_zero(&MultiIndex::splat(dim, g as i64))?.points().collect();
    // rounded cosines as numerators over 2^COS_BITS
    let scale = f64::from(1u32 << COS_BITS);
    let gb = BigInt::from(g);
    let table: Vec<Vec<i64>> = points
        .iter()
        .map(|p| {
            reps.iter()
                .map(|h| {
                    let dot: i64 = h.coords().iter().zip(p.coords()).map(|(a, b)| a * b).sum();
                    (e_ratio(&BigInt::from(dot), &gb).re * scale).round() as i64
                })
                .collect()
        })
        .collect();
    let denom = BigInt::from(1u64 << COS_BITS);

    // seed: the origin, half-turns, and a coarse sub-grid
    let mut active: Vec<usize> = Vec::new();
    let step = (g / 8).max(1);
    for (i, p) in points.iter().enumerate() {
        let on_coarse = p.coords().iter().all(|&c| (c as usize).is_multiple_of(step));
        let half = p.coords().iter().all(|&c| c == 0 || 2 * c as usize == g);
        if i == 0 || half || (dim == 1 && on_coarse) {
            active.push(i);
        }
    }

    let k = reps.len();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut lp = LinearProgram {
            objective: (0..=k).map(|j| BigRational::from_integer(BigInt::from(u8::from(j == k)))).collect(),
            free: vec![true; k + 1],
            rows: Vec::with_capacity(active.len() + 1),
        };
        let mut sum_row = vec![BigRational::from_integer(1.into()); k + 1];
        sum_row[k] = BigRational::zero();
        lp.rows.push((sum_row, Relation::Eq, BigRational::from_integer(1.into())));
        for &i in &active {
            let mut row: Vec<BigRational> =
                table[i].iter().map(|&c| BigRational::new(BigInt::from(c), denom.clone())).collect();
            row.push(BigRational::from_integer((-1).into()));
            lp.rows.push((row, Relation::Ge, BigRational::zero()));
        }
        let (x, t_star) = match solve(&lp)? {
            LpOutcome::Optimal { x, value } => (x, value),
            // the origin row bounds t by 1 and the sum row is always satisfiable
            other => return Err(Error::Verification(format!("grid program unexpectedly {other:?}"))),
        };
        let t_f = t_star.to_f64().unwrap_or(f64::NAN);
        if t_f < -params.eps {
            return Ok(SearchOutcome::InfeasibleAtGrid {
                t_star: t_f,
                t_star_exact: format_rational(&t_star),
                eps: params.eps,
                grid: g,
                rounds,
                active_points: active.len(),
            });
        }
        let c: Vec<f64> = x[..k].iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
        let mut violated: Vec<(f64, usize)> = table
            .iter()
            .enumerate()
            .map(|(i, row)| (row.iter().zip(&c).map(|(&r, c)| r as f64 / scale * c).sum::<f64>(), i))
            .filter(|&(v, _)| v < t_f - 1e-12)
            .collect();
        if violated.is_empty() || rounds >= params.max_rounds {
            if !violated.is_empty() {
                return Err(Error::SizeLimit(format!("cutting planes did not settle in {} rounds", params.max_rounds)));
            }
            let half = BigRational::new(1.into(), 2.into());
            let mut entries = Vec::with_capacity(2 * k);
            for (h, ch) in reps.iter().zip(&x[..k]) {
                let v = ch * &half;
                entries.push((h.clone(), Complex::new(v.clone(), BigRational::zero())));
                entries.push((-h, Complex::new(v, BigRational::zero())));
            }
            let witness = CoefficientFamily::new(dim, entries)?;
            let rounding = c.iter().map(|v| v.abs()).sum::<f64>() / scale;
            let margin = params
                .margin
                .unwrap_or_else(|| witness.lipschitz() * 0.5 / g as f64 * (dim as f64).sqrt() + rounding + 1e-12);
            let eps_certified = params.eps + margin;
            let check = verify_kmf_witness(&witness, d, eps_certified, &params.certify)?;
            return Ok(SearchOutcome::Found {
                witness,
                t_star: t_f,
                t_star_exact: format_rational(&t_star),
                margin,
                eps_certified,
                check,
                rounds,
                active_points: active.len(),
            });
        }
        violated.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        active.extend(violated.iter().take(params.batch.max(1)).map(|&(_, i)| i));
        active.sort_unstable();
        active.dedup();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fejer_range_is_feasible() {
        let d = FiniteSet::from_integers([1, 2, 3]);
        let out = witness_search(&d, &SearchParams::new(0.34, 1000)).unwrap();
        match &out {
            SearchOutcome::Found { t_star, check, .. } => {
                // the Fejér point gives -1/3; the optimum can only be higher
                assert!(*t_star >= -1.0 / 3.0 - 1e-6, "t* = {t_star}");
                assert!(check.is_witness && check.certified_min >= -0.34);
            }
            other => panic!("{other:?}"),
        }
        assert!(out.is_certified());
    }

    #[test]
    fn single_frequency_is_infeasible() {
        let d = FiniteSet::from_integers([1]);
        let out = witness_search(&d, &SearchParams::new(0.1, 64)).unwrap();
        assert!(matches!(out, SearchOutcome::InfeasibleAtGrid { t_star, .. } if (t_star + 1.0).abs() < 1e-12));
    }

    #[test]
    fn odd_numbers_are_infeasible() {
        let d = FiniteSet::from_integers((1..=21).step_by(2));
        let out = witness_search(&d, &SearchParams::new(0.05, 200)).unwrap();
        assert!(matches!(out, SearchOutcome::InfeasibleAtGrid { .. }));
    }

    #[test]
    fn size_limits() {
        let d = FiniteSet::from_integers(1..=13);
        assert!(matches!(witness_search(&d, &SearchParams::new(0.1, 64)), Err(Error::SizeLimit(_))));
        let d = FiniteSet::from_integers([1]);
        assert!(matches!(witness_search(&d, &SearchParams::new(0.1, 20_000)), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn two_dimensional_search() {
        let d = FiniteSet::new(2, [MultiIndex::new(vec![1, 0]), MultiIndex::new(vec![0, 1]), MultiIndex::new(vec![1, 1])])
            .unwrap();
        let out = witness_search(&d, &SearchParams::new(0.6, 40)).unwrap();
        if let SearchOutcome::Found { witness, .. } = &out {
            assert_eq!(witness.sum(), Complex::new(BigRational::from_integer(1.into()), BigRational::zero()));
        }
    }
}
