//! Points, boxes and finite sets in `Z^d`.
//!
//! Every finite average in the crate is indexed by an [`IndexBox`], whose
//! points are enumerated in lexicographic order (first coordinate slowest)
//! so that downstream sums are reproducible bit for bit.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of `Z^d`, `d >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<i64>);

impl MultiIndex {
    /// Panics on an empty coordinate list.
    pub fn new(coords: Vec<i64>) -> Self {
        assert!(!coords.is_empty(), "a multi-index needs at least one coordinate");
        Self(coords)
    }

    pub fn scalar(x: i64) -> Self {
        Self(vec![x])
    }

    pub fn zero(dim: usize) -> Self {
        Self::splat(dim, 0)
    }

    pub fn splat(dim: usize, value: i64) -> Self {
        Self::new(vec![value; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Componentwise `self <= other`.
    pub fn le_componentwise(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Componentwise `self < other`.
    pub fn lt_componentwise(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a < b)
    }

    pub fn abs(&self) -> Self {
        Self(self.0.iter().map(|c| c.abs()).collect())
    }

    pub fn norm_inf(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn norm_l2(&self) -> f64 {
        self.0.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>().sqrt()
    }

    /// Product of the coordinates, as `f64`.
    pub fn product_f64(&self) -> f64 {
        self.0.iter().map(|&c| c as f64).product()
    }

    /// Concatenation `(self, other)` in `Z^{k+l}`.
    pub fn concat(&self, other: &Self) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self(v)
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: self.dim() });
        }
        Ok(())
    }
}

impl From<Vec<i64>> for MultiIndex {
    fn from(v: Vec<i64>) -> Self {
        Self::new(v)
    }
}

impl<const N: usize> From<[i64; N]> for MultiIndex {
    fn from(v: [i64; N]) -> Self {
        Self::new(v.to_vec())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    /// `"1,2,-3"`, optionally wrapped in parentheses.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        let coords = s
            .split(',')
            .map(|t| t.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad integer {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if coords.is_empty() {
            return Err(Error::Parse("empty multi-index".into()));
        }
        Ok(Self(coords))
    }
}

macro_rules! componentwise {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&MultiIndex> for &MultiIndex {
            type Output = MultiIndex;
            fn $method(self, rhs: &MultiIndex) -> MultiIndex {
                assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
                MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a $op b).collect())
            }
        }
    };
}
componentwise!(Add, add, +);
componentwise!(Sub, sub, -);

impl Neg for &MultiIndex {
    type Output = MultiIndex;
    fn neg(self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|c| -c).collect())
    }
}

/// Axis-aligned box `lo <= p < hi` in `Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexBox {
    lo: MultiIndex,
    hi: MultiIndex,
}

impl IndexBox {
    pub fn new(lo: MultiIndex, hi: MultiIndex) -> Result<Self> {
        hi.check_dim(lo.dim())?;
        if !lo.le_componentwise(&hi) {
            return Err(Error::InvalidParameter(format!("box lower corner {lo} exceeds upper corner {hi}")));
        }
        Ok(Self { lo, hi })
    }

    /// The box `0 < n <= n_max`, i.e. `[1, N_1] x ... x [1, N_d]`.
    pub fn upto(n_max: &MultiIndex) -> Result<Self> {
        let d = n_max.dim();
        Self::new(MultiIndex::splat(d, 1), n_max + &MultiIndex::splat(d, 1))
    }

    /// The box `0 <= n < n_max`.
    pub fn from_zero(n_max: &MultiIndex) -> Result<Self> {
        Self::new(MultiIndex::zero(n_max.dim()), n_max.clone())
    }

    pub fn lo(&self) -> &MultiIndex {
        &self.lo
    }

    pub fn hi(&self) -> &MultiIndex {
        &self.hi
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    /// Side lengths `hi - lo`.
    pub fn sides(&self) -> MultiIndex {
        &self.hi - &self.lo
    }

    pub fn volume(&self) -> u64 {
        self.lo.0.iter().zip(&self.hi.0).map(|(a, b)| (b - a) as u64).product()
    }

    pub fn is_empty(&self) -> bool {
        self.volume() == 0
    }

    pub fn contains(&self, p: &MultiIndex) -> bool {
        p.dim() == self.dim() && self.lo.le_componentwise(p) && p.lt_componentwise(&self.hi)
    }

    /// Whether `other` lies inside `self` (empty boxes are contained anywhere).
    pub fn contains_box(&self, other: &IndexBox) -> bool {
        other.is_empty() || (other.dim() == self.dim() && self.lo.le_componentwise(&other.lo) && other.hi.le_componentwise(&self.hi))
    }

    /// Lexicographic offset of `p` inside the box.
    pub fn offset(&self, p: &MultiIndex) -> Option<usize> {
        if !self.contains(p) {
            return None;
        }
        let mut off = 0usize;
        for i in 0..self.dim() {
            let side = (self.hi.0[i] - self.lo.0[i]) as usize;
            off = off * side + (p.0[i] - self.lo.0[i]) as usize;
        }
        Some(off)
    }

    /// Intersection of two boxes (possibly empty).
    pub fn intersect(&self, other: &IndexBox) -> IndexBox {
        let lo: Vec<i64> = self.lo.0.iter().zip(&other.lo.0).map(|(a, b)| *a.max(b)).collect();
        let hi: Vec<i64> = self
            .hi
            .0
            .iter()
            .zip(&other.hi.0)
            .zip(&lo)
            .map(|((a, b), l)| (*a.min(b)).max(*l))
            .collect();
        IndexBox { lo: MultiIndex(lo), hi: MultiIndex(hi) }
    }

    /// Translate by `h`.
    pub fn shift(&self, h: &MultiIndex) -> IndexBox {
        IndexBox { lo: &self.lo + h, hi: &self.hi + h }
    }

    /// All points in lexicographic order.
    pub fn points(&self) -> BoxPoints {
        BoxPoints::new(self.clone())
    }
}

/// Iterator over the points of an [`IndexBox`].
#[derive(Clone, Debug)]
pub struct BoxPoints {
    bx: IndexBox,
    next: Option<Vec<i64>>,
    remaining: u64,
}

impl BoxPoints {
    fn new(bx: IndexBox) -> Self {
        let remaining = bx.volume();
        let next = (remaining > 0).then(|| bx.lo.0.clone());
        Self { bx, next, remaining }
    }
}

impl Iterator for BoxPoints {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        let cur = self.next.take()?;
        self.remaining -= 1;
        let mut succ = cur.clone();
        let mut i = succ.len();
        let mut carried_out = true;
        while i > 0 {
            i -= 1;
            succ[i] += 1;
            if succ[i] < self.bx.hi.0[i] {
                carried_out = false;
                break;
            }
            succ[i] = self.bx.lo.0[i];
        }
        if !carried_out {
            self.next = Some(succ);
        }
        Some(MultiIndex(cur))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = self.remaining as usize;
        (r, Some(r))
    }
}

impl ExactSizeIterator for BoxPoints {}

/// A finite, deduplicated set of points of a common dimension, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteSet {
    dim: usize,
    points: Vec<MultiIndex>,
}

impl FiniteSet {
    pub fn new(dim: usize, points: impl IntoIterator<Item = MultiIndex>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        let mut pts: Vec<MultiIndex> = Vec::new();
        for p in points {
            p.check_dim(dim)?;
            pts.push(p);
        }
        pts.sort();
        pts.dedup();
        Ok(Self { dim, points: pts })
    }

    /// Builds a set from 1-d integers.
    pub fn from_integers(values: impl IntoIterator<Item = i64>) -> Self {
        Self::new(1, values.into_iter().map(MultiIndex::scalar)).expect("dimension 1")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[MultiIndex] {
        &self.points
    }

    pub fn contains(&self, p: &MultiIndex) -> bool {
        self.points.binary_search(p).is_ok()
    }

    /// `D ∪ (-D)`.
    pub fn symmetrized(&self) -> FiniteSet {
        let pts = self.points.iter().flat_map(|p| [p.clone(), -p]);
        FiniteSet::new(self.dim, pts).expect("same dimension")
    }

    /// Parses the text format: one point per line, comma-separated integers,
    /// `#` starts a comment.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut pts = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let p: MultiIndex = line
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            pts.push(p);
        }
        let dim = pts.first().map(MultiIndex::dim).ok_or_else(|| Error::Parse("empty set file".into()))?;
        Self::new(dim, pts)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            let parts: Vec<String> = p.coords().iter().map(i64::to_string).collect();
            out.push_str(&parts.join(","));
            out.push('\n');
        }
        out
    }
}

/// Truncated density
/// `max_{0 <= H <= hmax} |D ∩ [-H, H]| / prod(2 H_i + 1)`.
pub fn delta_density(set: &FiniteSet, hmax: &MultiIndex) -> Result<Ratio<u64>> {
    hmax.check_dim(set.dim())?;
    if hmax.coords().iter().any(|&h| h < 0) {
        return Err(Error::InvalidParameter(format!("Hmax {hmax} has a negative coordinate")));
    }
    let windows = IndexBox::new(MultiIndex::zero(set.dim()), hmax + &MultiIndex::splat(set.dim(), 1))?;
    let abs_points: Vec<MultiIndex> = set.points().iter().map(MultiIndex::abs).collect();
    let mut best = Ratio::new(0u64, 1);
    for h in windows.points() {
        let count = abs_points.iter().filter(|p| p.le_componentwise(&h)).count() as u64;
        let cells = h
            .coords()
            .iter()
            .try_fold(1u64, |acc, &c| acc.checked_mul(2 * c as u64 + 1))
            .ok_or_else(|| Error::InvalidParameter("window volume overflows u64".into()))?;
        let r = Ratio::new(count, cells);
        if r > best {
            best = r;
        }
    }
    Ok(best)
}

/// Image of a finite set under an integer matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransformedSet {
    pub set: FiniteSet,
    /// Whether `0` belongs to `L(D)`; the image of a vdC set stays vdC only when it does not.
    pub contains_zero: bool,
}

/// `L(D)` for an `e x d` integer matrix given by rows.
pub fn transform_set(set: &FiniteSet, matrix: &[Vec<i64>]) -> Result<TransformedSet> {
    let e = matrix.len();
    if e == 0 {
        return Err(Error::InvalidParameter("matrix has no rows".into()));
    }
    for row in matrix {
        if row.len() != set.dim() {
            return Err(Error::DimensionMismatch { expected: set.dim(), got: row.len() });
        }
    }
    let image: Vec<MultiIndex> = set.points().iter().map(|p| apply_matrix(matrix, p)).collect();
    let contains_zero = image.iter().any(MultiIndex::is_zero);
    Ok(TransformedSet { set: FiniteSet::new(e, image)?, contains_zero })
}

/// `L p` for a matrix given by rows.
pub fn apply_matrix(matrix: &[Vec<i64>], p: &MultiIndex) -> MultiIndex {
    MultiIndex::new(
        matrix
            .iter()
            .map(|row| row.iter().zip(p.coords()).map(|(a, b)| a * b).sum())
            .collect(),
    )
}

/// Parses a matrix written as `"1,0;0,1"` (rows separated by `;`).
pub fn parse_matrix(s: &str) -> Result<Vec<Vec<i64>>> {
    s.split(';')
        .map(|row| row.parse::<MultiIndex>().map(|m| m.0))
        .collect()
}
