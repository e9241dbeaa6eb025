//! Certification of nonnegativity and of witness properties.
//!
//! Two routes. The quadratic-form route builds the multilevel Toeplitz
//! matrix `G = (a_{h - h'})` over the window `[0, c)^d`; for every unit
//! vector `z`, `z* G z` is an average of `T` against a probability density,
//! so `min T <= lambda_min(G)`, and averaging over the Fejér vectors gives
//! `lambda_min(G) <= min T + S/c` with `S = sum |a_h| |h|_1`. The grid route
//! runs a branch-and-bound over cubes of the torus with rigorous lower
//! bounds on each cube: the Lipschitz constant `2 pi sum |a_h| |h|_2`, a
//! second-order Taylor bound, and a third-order one whose quadratic part is
//! minimised over the ball through Lagrangian duality. The largest wins.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{exact_to_c64, CoefficientFamily};
use crate::error::{Error, Result};
use crate::lattice::{FiniteSet, IndexBox, MultiIndex};
use crate::numeric::{e, frac};

/// `sum a_h e(h . x)` over float terms.
pub fn eval_terms(terms: &[(Vec<i64>, Complex64)], x: &[f64]) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for (h, a) in terms {
        let phase: f64 = h.iter().zip(x).map(|(&k, &xi)| frac(k as f64 * xi)).sum();
        s += a * e(phase);
    }
    s
}

/// Real part of `T`, its gradient and its Hessian (row-major).
fn eval_with_hessian(terms: &[(Vec<i64>, Complex64)], x: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
    let d = x.len();
    let tau = std::f64::consts::TAU;
    let mut v = 0.0;
    let mut g = vec![0.0; d];
    let mut hess = vec![0.0; d * d];
    for (h, a) in terms {
        let phase: f64 = h.iter().zip(x).map(|(&k, &xi)| frac(k as f64 * xi)).sum();
        let z = a * e(phase);
        v += z.re;
        for i in 0..d {
            g[i] -= tau * h[i] as f64 * z.im;
            for j in 0..d {
                hess[i * d + j] -= tau * tau * (h[i] * h[j]) as f64 * z.re;
            }
        }
    }
    (v, g, hess)
}

/// Lower bound on `min g.u + u^T H u / 2` over `|u| <= r`. For every `mu`
/// with `H + mu I` positive definite the value is at least
/// `-g^T (H + mu I)^-1 g / 2 - mu r^2 / 2`; `mu` is tuned by bisection on the
/// secular equation, but any `mu` gives a valid bound.
fn ball_quadratic_lower(g: &[f64], hess: &[f64], r: f64) -> f64 {
    let d = g.len();
    let (lambdas, gt): (Vec<f64>, Vec<f64>) = if d == 1 {
        (vec![hess[0]], vec![g[0]])
    } else {
        let eig = nalgebra::SymmetricEigen::new(DMatrix::from_row_slice(d, d, hess));
        let gv = nalgebra::DVector::from_column_slice(g);
        let proj = eig.eigenvectors.transpose() * gv;
        (eig.eigenvalues.iter().copied().collect(), proj.iter().copied().collect())
    };
    let lam_min = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let gnorm = gt.iter().map(|x| x * x).sum::<f64>().sqrt();
    let value = |mu: f64| {
        -0.5 * lambdas.iter().zip(&gt).map(|(l, x)| if *x == 0.0 { 0.0 } else { x * x / (l + mu) }).sum::<f64>() - 0.5 * mu * r * r
    };
    let slope = |mu: f64| lambdas.iter().zip(&gt).map(|(l, x)| x * x / ((l + mu) * (l + mu))).sum::<f64>() - r * r;
    let floor = (-lam_min).max(0.0);
    let mut lo = floor + 1e-12 * (1.0 + floor);
    if slope(lo) <= 0.0 {
        return value(lo);
    }
    let mut hi = floor + gnorm / r + 1e-12 * (1.0 + floor);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    value(lo).max(value(hi))
}

/// Parameters of the branch-and-bound minimiser.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridParams {
    /// Initial grid points per coordinate (spacing `1/initial`).
    pub initial: usize,
    /// Budget on evaluated cells.
    pub max_cells: usize,
    /// Stop once the bracket `[lower, upper]` is this narrow.
    pub gap: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        Self { initial: 256, max_cells: 2_000_000, gap: 1e-9 }
    }
}

impl GridParams {
    /// Defaults scaled so the initial grid has at most about `10^4` points.
    pub fn for_dim(dim: usize) -> Self {
        let initial = match dim {
            1 => 256,
            2 => 96,
            3 => 20,
            _ => 8,
        };
        Self { initial, ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundStatus {
    /// `lower >= threshold`.
    Certified,
    /// A point with `T < threshold` was found.
    Refuted,
    /// `upper - lower <= gap`.
    Converged,
    /// Cell budget exhausted.
    Budget,
}

/// Rigorous bracket on `min T` over the torus.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimumBound {
    pub lower: f64,
    pub upper: f64,
    pub argmin: Vec<f64>,
    pub cells: usize,
    pub status: BoundStatus,
    pub lipschitz: f64,
    pub curvature: f64,
    /// Min of `T` over the initial uniform grid.
    pub grid_min: f64,
    /// `grid_min - L delta sqrt(d) / 2`, the one-shot Lipschitz bound.
    pub grid_lipschitz_bound: f64,
}

struct Cell {
    center: Vec<f64>,
    half: f64,
    lower: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.lower.total_cmp(&other.lower) == Ordering::Equal
    }
}

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cell {
    // reversed so the heap pops the smallest lower bound; ties by centre
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .lower
            .total_cmp(&self.lower)
            .then_with(|| other.center.iter().zip(&self.center).fold(Ordering::Equal, |o, (a, b)| o.then(a.total_cmp(b))))
    }
}

/// Branch-and-bound bracket on `min Re T` for a Hermitian family. With a
/// `threshold`, stops as soon as the sign of `min T - threshold` is known.
pub fn certified_minimum(a: &CoefficientFamily, params: &GridParams, threshold: Option<f64>) -> Result<MinimumBound> {
    a.require_hermitian()?;
    if params.initial == 0 {
        return Err(Error::InvalidParameter("grid needs at least one point per coordinate".into()));
    }
    let d = a.dim();
    let terms = a.float_terms();
    let lip = a.lipschitz();
    let curv = std::f64::consts::TAU.powi(2)
        * a.entries().map(|(h, c)| exact_to_c64(c).norm() * h.norm_l2().powi(2)).sum::<f64>();
    // bound on third directional derivatives
    let third = std::f64::consts::TAU.powi(3)
        * a.entries().map(|(h, c)| exact_to_c64(c).norm() * h.norm_l2().powi(3)).sum::<f64>();
    // rounding in the float evaluation
    let slack = 1e-13 * (1.0 + a.l1_norm()) * (1.0 + terms.len() as f64).sqrt();
    let sqrt_d = (d as f64).sqrt();
    let bound = |value: f64, grad: &[f64], hess: &[f64], half: f64| {
        let r = half * sqrt_d;
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let first = value - lip * r;
        let second = value - gnorm * r - 0.5 * curv * r * r;
        let cubic = value + ball_quadratic_lower(grad, hess, r) - third * r.powi(3) / 6.0 - 1e-13 * (lip * r + curv * r * r);
        first.max(second).max(cubic) - slack
    };

    let g = params.initial;
    let grid_box = IndexBox::from_zero(&MultiIndex::splat(d, g as i64))?;
    let half0 = 0.5 / g as f64;
    let mut cells: Vec<(Cell, f64)> = grid_box
        .points()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|p| {
            let center: Vec<f64> = p.coords().iter().map(|&k| k as f64 / g as f64).collect();
            let (v, grad, hess) = eval_with_hessian(&terms, &center);
            let lower = bound(v, &grad, &hess, half0);
            (Cell { center, half: half0, lower }, v)
        })
        .collect();
    let mut count = cells.len();
    let (grid_min, argmin) = cells
        .iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(c, v)| (*v, c.center.clone()))
        .expect("non-empty grid");
    let grid_lipschitz_bound = grid_min - lip * half0 * sqrt_d - slack;
    let mut upper = grid_min;
    let mut best = argmin;
    let mut heap: BinaryHeap<Cell> = cells.drain(..).map(|(c, _)| c).collect();

    let status = loop {
        let lower = heap.peek().map_or(upper, |c| c.lower);
        if let Some(t) = threshold {
            if upper < t {
                break BoundStatus::Refuted;
            }
            if lower >= t {
                break BoundStatus::Certified;
            }
        }
        if upper - lower <= params.gap {
            break BoundStatus::Converged;
        }
        if count >= params.max_cells {
            break BoundStatus::Budget;
        }
        let cell = heap.pop().expect("heap non-empty while lower < upper");
        let h = cell.half / 2.0;
        for mask in 0..(1usize << d) {
            let center: Vec<f64> = cell
                .center
                .iter()
                .enumerate()
                .map(|(i, &c)| if mask >> i & 1 == 1 { c + h } else { c - h })
                .collect();
            let (v, grad, hess) = eval_with_hessian(&terms, &center);
            if v < upper {
                upper = v;
                best = center.clone();
            }
            heap.push(Cell { lower: bound(v, &grad, &hess, h), center, half: h });
            count += 1;
        }
    };
    let lower = heap.peek().map_or(upper, |c| c.lower).min(upper);
    Ok(MinimumBound {
        lower,
        upper,
        argmin: best.iter().map(|&x| frac(x)).collect(),
        cells: count,
        status,
        lipschitz: lip,
        curvature: curv,
        grid_min,
        grid_lipschitz_bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PdMethod {
    Gram,
    Grid,
}

impl std::str::FromStr for PdMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gram" => Ok(Self::Gram),
            "grid" => Ok(Self::Grid),
            other => Err(Error::Parse(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PdParams {
    /// Largest Toeplitz window side.
    pub cmax: usize,
    /// Largest Gram matrix order `c^d`.
    pub max_order: usize,
    pub tol: f64,
    pub grid: GridParams,
}

impl Default for PdParams {
    fn default() -> Self {
        Self { cmax: 32, max_order: 400, tol: 1e-9, grid: GridParams::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PdVerdict {
    PositiveDefinite,
    Not,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PdWitness {
    /// `T(x) < -tol`.
    Point { x: Vec<f64>, value: f64 },
    /// `z* G z / |z|^2 < -tol` for the Toeplitz window of side `c`.
    Vector { c: usize, z: Vec<[f64; 2]>, rayleigh: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PositiveDefiniteCertificate {
    pub method: PdMethod,
    pub verdict: PdVerdict,
    pub witness: Option<PdWitness>,
    /// Rigorous bracket `lower <= min T <= upper`.
    pub lower: f64,
    pub upper: f64,
    pub tol: f64,
    /// Gram only: window side, smallest eigenvalue, and `S/c`.
    pub gram_c: Option<usize>,
    pub lambda_min: Option<f64>,
    pub smoothing_gap: Option<f64>,
    pub grid: Option<MinimumBound>,
}

/// Smallest eigenvalue and its eigenvector of the Toeplitz window `[0, c)^d`.
pub fn gram_lambda_min(a: &CoefficientFamily, c: usize) -> Result<(f64, Vec<Complex64>)> {
    let d = a.dim();
    let window = IndexBox::from_zero(&MultiIndex::splat(d, c as i64))?;
    let pts: Vec<MultiIndex> = window.points().collect();
    let n = pts.len();
    let m = DMatrix::<Complex64>::from_fn(n, n, |i, j| exact_to_c64(&a.get(&(&pts[i] - &pts[j]))));
    let eig = m.symmetric_eigen();
    let (k, lam) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .map(|(k, &l)| (k, l))
        .expect("non-empty matrix");
    let z: Vec<Complex64> = eig.eigenvectors.column(k).iter().copied().collect();
    Ok((lam, z))
}

/// `z* G z / |z|^2`, recomputed directly from the entries.
fn rayleigh(a: &CoefficientFamily, c: usize, z: &[Complex64]) -> Result<f64> {
    let window = IndexBox::from_zero(&MultiIndex::splat(a.dim(), c as i64))?;
    let pts: Vec<MultiIndex> = window.points().collect();
    let mut num = Complex64::new(0.0, 0.0);
    for (i, p) in pts.iter().enumerate() {
        for (j, q) in pts.iter().enumerate() {
            num += z[i].conj() * exact_to_c64(&a.get(&(p - q))) * z[j];
        }
    }
    let den: f64 = z.iter().map(|w| w.norm_sqr()).sum();
    Ok(num.re / den)
}

/// Positive-definiteness of a Hermitian family, with a three-valued verdict.
pub fn is_positive_definite(a: &CoefficientFamily, method: PdMethod, params: &PdParams) -> Result<PositiveDefiniteCertificate> {
    a.require_hermitian()?;
    match method {
        PdMethod::Gram => {
            let d = a.dim() as u32;
            let mut c = params.cmax.max(1);
            while c > 1 && c.pow(d) > params.max_order {
                c -= 1;
            }
            let (lam, z) = gram_lambda_min(a, c)?;
            let gap = a.first_moment() / c as f64;
            let (verdict, witness, upper) = if lam < -params.tol {
                let rq = rayleigh(a, c, &z)?;
                if rq < -params.tol {
                    let w = PdWitness::Vector { c, z: z.iter().map(|w| [w.re, w.im]).collect(), rayleigh: rq };
                    (PdVerdict::Not, Some(w), rq)
                } else {
                    (PdVerdict::Inconclusive, None, lam)
                }
            } else if lam - gap >= -params.tol {
                (PdVerdict::PositiveDefinite, None, lam)
            } else {
                (PdVerdict::Inconclusive, None, lam)
            };
            Ok(PositiveDefiniteCertificate {
                method,
                verdict,
                witness,
                lower: lam - gap,
                upper,
                tol: params.tol,
                gram_c: Some(c),
                lambda_min: Some(lam),
                smoothing_gap: Some(gap),
                grid: None,
            })
        }
        PdMethod::Grid => {
            let b = certified_minimum(a, &params.grid, Some(-params.tol))?;
            let (verdict, witness) = match b.status {
                BoundStatus::Certified => (PdVerdict::PositiveDefinite, None),
                BoundStatus::Refuted => {
                    let value = a.evaluate(&b.argmin).re;
                    (PdVerdict::Not, Some(PdWitness::Point { x: b.argmin.clone(), value }))
                }
                _ if b.lower >= -params.tol => (PdVerdict::PositiveDefinite, None),
                _ => (PdVerdict::Inconclusive, None),
            };
            Ok(PositiveDefiniteCertificate {
                method,
                verdict,
                witness,
                lower: b.lower,
                upper: b.upper,
                tol: params.tol,
                gram_c: None,
                lambda_min: None,
                smoothing_gap: None,
                grid: Some(b),
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessCheck {
    pub is_witness: bool,
    pub eps: f64,
    /// `P(0) = sum of coefficients`, exact.
    pub p_at_zero: String,
    pub normalized: bool,
    /// Rigorous lower bound on `min P`.
    pub certified_min: f64,
    /// Smallest value of `P` actually observed.
    pub observed_min: f64,
    pub argmin: Vec<f64>,
    pub bound: MinimumBound,
}

/// Checks that `P` is a witness for `D` at level `eps`: spectrum inside
/// `±D ∪ {0}`, `P(0) = 1` exactly, and `min P >= -eps` certified.
pub fn verify_kmf_witness(p: &CoefficientFamily, d: &FiniteSet, eps: f64, grid: &GridParams) -> Result<WitnessCheck> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    p.require_hermitian()?;
    if !d.is_empty() && d.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: d.dim() });
    }
    let outside: Vec<MultiIndex> =
        p.support().into_iter().filter(|h| !h.is_zero() && !d.contains(h) && !d.contains(&-h)).collect();
    if !outside.is_empty() {
        return Err(Error::SpectrumViolation(outside));
    }
    let s = p.sum();
    let normalized = num_traits::One::is_one(&s.re) && num_traits::Zero::is_zero(&s.im);
    let bound = certified_minimum(p, grid, Some(-eps))?;
    let is_witness = normalized && bound.lower >= -eps;
    Ok(WitnessCheck {
        is_witness,
        eps,
        p_at_zero: crate::exact::format_rational(&s.re),
        normalized,
        certified_min: bound.lower,
        observed_min: bound.upper,
        argmin: bound.argmin.clone(),
        bound,
    })
}
