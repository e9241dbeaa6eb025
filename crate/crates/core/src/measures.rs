//! Positive measures on the torus `T^d`.
//!
//! Only two kinds are representable: finite sums of point masses, and
//! oracles that return Fourier coefficients. Both can refute the vdC or FC+
//! property of a set (a measure whose transform is small along `D` but
//! which charges the origin is an obstruction); neither can prove it, and
//! the spectral reports are worded accordingly.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{format_rational, parse_rational};
use crate::lattice::{apply_matrix, MultiIndex};
use crate::numeric::{e, e_rational, frac, ComplexSum};

/// Default tolerance for merging floating atoms.
pub const FLOAT_MERGE_TOL: f64 = 1e-12;

/// A point of `T^d`, coordinates reduced to `[0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Rational(Vec<BigRational>),
    Float(Vec<f64>),
}

fn reduce_rational(x: &BigRational) -> BigRational {
    x - BigRational::from_integer(x.floor().to_integer())
}

impl Point {
    pub fn rational(coords: Vec<BigRational>) -> Self {
        Point::Rational(coords.iter().map(reduce_rational).collect())
    }

    pub fn float(coords: Vec<f64>) -> Self {
        Point::Float(coords.into_iter().map(frac).collect())
    }

    pub fn dim(&self) -> usize {
        match self {
            Point::Rational(c) => c.len(),
            Point::Float(c) => c.len(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Point::Rational(c) => c.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect(),
            Point::Float(c) => c.clone(),
        }
    }

    pub fn is_origin(&self) -> bool {
        match self {
            Point::Rational(c) => c.iter().all(Zero::is_zero),
            Point::Float(c) => c.iter().all(|&x| x == 0.0),
        }
    }

    /// `e(n . x)`; exact roots of unity for rational points.
    pub fn character(&self, n: &MultiIndex) -> Complex64 {
        match self {
            Point::Rational(c) => {
                let phase = c
                    .iter()
                    .zip(n.coords())
                    .fold(BigRational::zero(), |acc, (x, &k)| acc + x * BigRational::from_integer(k.into()));
                e_rational(&phase)
            }
            Point::Float(c) => {
                // reduce each product separately to keep the phase small
                let phase: f64 = c.iter().zip(n.coords()).map(|(&x, &k)| frac(x * k as f64)).sum();
                e(phase)
            }
        }
    }

    fn add(&self, other: &Point) -> Point {
        match (self, other) {
            (Point::Rational(a), Point::Rational(b)) => {
                Point::rational(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            _ => Point::float(self.to_f64().iter().zip(other.to_f64()).map(|(x, y)| x + y).collect()),
        }
    }

    fn same_as(&self, other: &Point, tol: f64) -> bool {
        match (self, other) {
            (Point::Rational(a), Point::Rational(b)) => a == b,
            _ => self.to_f64().iter().zip(other.to_f64()).all(|(x, y)| {
                let d = (x - y).abs();
                d.min(1.0 - d) <= tol
            }),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = match self {
            Point::Rational(c) => c.iter().map(format_rational).collect(),
            Point::Float(c) => c.iter().map(|x| x.to_string()).collect(),
        };
        write!(f, "({})", parts.join(","))
    }
}

/// Finite positive combination of point masses on `T^d`.
#[derive(Clone, Debug)]
pub struct AtomicTorusMeasure {
    dim: usize,
    atoms: Vec<Point>,
    weights: Vec<f64>,
    exact_weights: Option<Vec<BigRational>>,
    merge_tol: f64,
}

impl AtomicTorusMeasure {
    fn build(
        dim: usize,
        atoms: Vec<Point>,
        weights: Vec<f64>,
        exact_weights: Option<Vec<BigRational>>,
        merge_tol: f64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("measure dimension must be at least 1".into()));
        }
        if atoms.len() != weights.len() {
            return Err(Error::InvalidParameter(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidParameter("measure has no atoms".into()));
        }
        for a in &atoms {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: a.dim() });
            }
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidParameter(format!("atom weight {w} is not positive")));
        }
        let mut m = Self { dim, atoms: Vec::new(), weights: Vec::new(), exact_weights: None, merge_tol };
        let mut exact_acc: Option<Vec<BigRational>> = exact_weights.as_ref().map(|_| Vec::new());
        for (i, (a, w)) in atoms.into_iter().zip(weights).enumerate() {
            match m.atoms.iter().position(|b| b.same_as(&a, merge_tol)) {
                Some(j) => {
                    m.weights[j] += w;
                    if let (Some(acc), Some(ew)) = (exact_acc.as_mut(), exact_weights.as_ref()) {
                        acc[j] = &acc[j] + &ew[i];
                    }
                }
                None => {
                    m.atoms.push(a);
                    m.weights.push(w);
                    if let (Some(acc), Some(ew)) = (exact_acc.as_mut(), exact_weights.as_ref()) {
                        acc.push(ew[i].clone());
                    }
                }
            }
        }
        if let Some(acc) = &exact_acc {
            m.weights = acc.iter().map(|w| w.to_f64().unwrap_or(f64::NAN)).collect();
        }
        m.exact_weights = exact_acc;
        Ok(m)
    }

    /// Atoms with exact rational coordinates and weights.
    pub fn from_rational(dim: usize, atoms: Vec<Vec<BigRational>>, weights: Vec<BigRational>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
            return Err(Error::InvalidParameter(format!("atom weight {} is not positive", format_rational(w))));
        }
        let fw = weights.iter().map(|w| w.to_f64().unwrap_or(f64::NAN)).collect();
        Self::build(dim, atoms.into_iter().map(Point::rational).collect(), fw, Some(weights), FLOAT_MERGE_TOL)
    }

    pub fn from_float(dim: usize, atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        Self::build(dim, atoms.into_iter().map(Point::float).collect(), weights, None, FLOAT_MERGE_TOL)
    }

    /// General constructor; `exact_weights`, when given, overrides `weights`.
    pub fn from_points(
        dim: usize,
        atoms: Vec<Point>,
        weights: Vec<f64>,
        exact_weights: Option<Vec<BigRational>>,
    ) -> Result<Self> {
        Self::build(dim, atoms, weights, exact_weights, FLOAT_MERGE_TOL)
    }

    /// Same measure with a different floating merge tolerance.
    pub fn with_merge_tol(&self, tol: f64) -> Result<Self> {
        Self::build(self.dim, self.atoms.clone(), self.weights.clone(), self.exact_weights.clone(), tol)
    }

    /// Point mass at a rational point.
    pub fn dirac(point: Vec<BigRational>) -> Self {
        let dim = point.len();
        Self::from_rational(dim, vec![point], vec![BigRational::one()]).expect("valid dirac mass")
    }

    pub fn dirac_zero(dim: usize) -> Self {
        Self::dirac(vec![BigRational::zero(); dim])
    }

    /// Uniform probability on the `q`-th roots of unity in `T`.
    pub fn uniform_roots(q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParameter("q must be at least 1".into()));
        }
        let qb = BigInt::from(q);
        let atoms = (0..q).map(|j| vec![BigRational::new(j.into(), qb.clone())]).collect();
        let w = BigRational::new(BigInt::one(), qb);
        Self::from_rational(1, atoms, vec![w; q as usize])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Point] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exact_weights(&self) -> Option<&[BigRational]> {
        self.exact_weights.as_deref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact_weights.is_some() && self.atoms.iter().all(|a| matches!(a, Point::Rational(_)))
    }

    pub fn merge_tol(&self) -> f64 {
        self.merge_tol
    }

    pub fn total_mass(&self) -> f64 {
        match &self.exact_weights {
            Some(w) => w.iter().fold(BigRational::zero(), |a, b| a + b).to_f64().unwrap_or(f64::NAN),
            None => self.weights.iter().sum(),
        }
    }

    pub fn exact_total_mass(&self) -> Option<BigRational> {
        self.exact_weights.as_ref().map(|w| w.iter().fold(BigRational::zero(), |a, b| a + b))
    }

    /// `sigma({0})`.
    pub fn mass_at_zero(&self) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .filter(|(a, _)| a.is_origin())
            .map(|(_, &w)| w)
            .sum()
    }

    pub fn exact_mass_at_zero(&self) -> Option<BigRational> {
        let w = self.exact_weights.as_ref()?;
        Some(
            self.atoms
                .iter()
                .zip(w)
                .filter(|(a, _)| a.is_origin())
                .fold(BigRational::zero(), |acc, (_, w)| acc + w),
        )
    }

    /// Probability check: exact for rational weights, `1e-12` otherwise.
    pub fn ensure_probability(&self) -> Result<()> {
        match self.exact_total_mass() {
            Some(m) if m.is_one() => Ok(()),
            Some(m) => Err(Error::NotProbability(format_rational(&m))),
            None => {
                let m = self.total_mass();
                if (m - 1.0).abs() <= 1e-12 {
                    Ok(())
                } else {
                    Err(Error::NotProbability(m.to_string()))
                }
            }
        }
    }

    /// `sigma^(n) = sum_j w_j e(n . x_j)`.
    pub fn fourier_coefficient(&self, n: &MultiIndex) -> Result<Complex64> {
        n.check_dim(self.dim)?;
        Ok(self
            .atoms
            .iter()
            .zip(&self.weights)
            .map(|(a, &w)| a.character(n) * w)
            .collect::<ComplexSum>()
            .value())
    }

    /// Convolution; atoms add modulo 1 and equal sums merge.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        let mut exact = match (&self.exact_weights, &other.exact_weights) {
            (Some(_), Some(_)) => Some(Vec::new()),
            _ => None,
        };
        for (i, a) in self.atoms.iter().enumerate() {
            for (j, b) in other.atoms.iter().enumerate() {
                atoms.push(a.add(b));
                weights.push(self.weights[i] * other.weights[j]);
                if let (Some(ex), Some(wa), Some(wb)) = (exact.as_mut(), &self.exact_weights, &other.exact_weights) {
                    ex.push(&wa[i] * &wb[j]);
                }
            }
        }
        Self::build(self.dim, atoms, weights, exact, self.merge_tol.max(other.merge_tol))
    }

    /// Affinity `sum over common atoms of sqrt(w_j v_j)`.
    pub fn affinity(&self, other: &Self) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let tol = self.merge_tol.max(other.merge_tol);
        let mut total = 0.0;
        for (a, &w) in self.atoms.iter().zip(&self.weights) {
            for (b, &v) in other.atoms.iter().zip(&other.weights) {
                if a.same_as(b, tol) {
                    total += (w * v).sqrt();
                }
            }
        }
        Ok(total)
    }

    /// Image under `x -> L^T x` for an integer matrix `L` of shape `e x d`
    /// acting on a measure on `T^e`. The result lives on `T^d` and
    /// satisfies `sigma'^(k) = sigma^(L k)`.
    pub fn push_forward(&self, matrix: &[Vec<i64>]) -> Result<Self> {
        if matrix.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: matrix.len() });
        }
        let d = matrix.first().map_or(0, Vec::len);
        if d == 0 || matrix.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidParameter("ragged or empty matrix".into()));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| match a {
                Point::Rational(x) => Point::rational(
                    (0..d)
                        .map(|j| {
                            (0..self.dim).fold(BigRational::zero(), |acc, i| {
                                acc + &x[i] * BigRational::from_integer(matrix[i][j].into())
                            })
                        })
                        .collect(),
                ),
                Point::Float(x) => Point::float(
                    (0..d)
                        .map(|j| (0..self.dim).map(|i| frac(x[i] * matrix[i][j] as f64)).sum())
                        .collect(),
                ),
            })
            .collect();
        Self::build(d, atoms, self.weights.clone(), self.exact_weights.clone(), self.merge_tol)
    }

    pub fn to_json(&self) -> Value {
        let atoms: Vec<Value> = self
            .atoms
            .iter()
            .map(|a| {
                let coords: Vec<Value> = match a {
                    Point::Rational(c) => c
                        .iter()
                        .map(|x| match (x.numer().to_i64(), x.denom().to_i64()) {
                            (Some(n), Some(d)) => json!([n, d]),
                            _ => Value::String(format_rational(x)),
                        })
                        .collect(),
                    Point::Float(c) => c.iter().map(|&x| json!(x)).collect(),
                };
                if self.dim == 1 {
                    coords.into_iter().next().unwrap_or(Value::Null)
                } else {
                    Value::Array(coords)
                }
            })
            .collect();
        let weights: Vec<Value> = match &self.exact_weights {
            Some(w) => w.iter().map(|x| Value::String(format_rational(x))).collect(),
            None => self.weights.iter().map(|&x| json!(x)).collect(),
        };
        json!({ "dim": self.dim, "atoms": atoms, "weights": weights })
    }

    /// Parses `{dim, atoms, weights}`. A coordinate is `[num, den]`, a string
    /// `"p/q"`, or a float; in dimension 1 an atom may be a bare coordinate.
    /// Weights are numbers or rational strings.
    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("measure JSON: {m}"));
        let dim = v.get("dim").and_then(Value::as_u64).ok_or_else(|| bad("missing dim"))? as usize;
        let atoms_v = v.get("atoms").and_then(Value::as_array).ok_or_else(|| bad("missing atoms"))?;
        let weights_v = v.get("weights").and_then(Value::as_array).ok_or_else(|| bad("missing weights"))?;
        let mut atoms = Vec::with_capacity(atoms_v.len());
        for a in atoms_v {
            let coords: Vec<&Value> = if dim == 1 && !is_coordinate_list(a) {
                vec![a]
            } else {
                a.as_array().ok_or_else(|| bad("atom must be a list of coordinates"))?.iter().collect()
            };
            if coords.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: coords.len() });
            }
            let parsed = coords.into_iter().map(parse_coordinate).collect::<Result<Vec<_>>>()?;
            if parsed.iter().all(|c| matches!(c, Coord::Rational(_))) {
                atoms.push(Point::rational(
                    parsed.into_iter().map(|c| if let Coord::Rational(r) = c { r } else { unreachable!() }).collect(),
                ));
            } else {
                atoms.push(Point::float(parsed.iter().map(Coord::to_f64).collect()));
            }
        }
        let mut exact = Some(Vec::new());
        let mut floats = Vec::new();
        for w in weights_v {
            match w {
                Value::String(s) => {
                    let r = parse_rational(s)?;
                    floats.push(r.to_f64().unwrap_or(f64::NAN));
                    if let Some(e) = exact.as_mut() {
                        e.push(r);
                    }
                }
                Value::Number(n) => {
                    if let Some(i) = n.as_i64() {
                        floats.push(i as f64);
                        if let Some(e) = exact.as_mut() {
                            e.push(BigRational::from_integer(i.into()));
                        }
                    } else {
                        floats.push(n.as_f64().ok_or_else(|| bad("bad weight"))?);
                        exact = None;
                    }
                }
                _ => return Err(bad("weight must be a number or a rational string")),
            }
        }
        if let Some(e) = &exact {
            if let Some(w) = e.iter().find(|w| !w.is_positive()) {
                return Err(Error::InvalidParameter(format!("atom weight {} is not positive", format_rational(w))));
            }
        }
        let tol = v.get("merge_tol").and_then(Value::as_f64).unwrap_or(FLOAT_MERGE_TOL);
        Self::build(dim, atoms, floats, exact, tol)
    }
}

enum Coord {
    Rational(BigRational),
    Float(f64),
}

impl Coord {
    fn to_f64(&self) -> f64 {
        match self {
            Coord::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Coord::Float(x) => *x,
        }
    }
}

// in dimension 1, `[num, den]` is one coordinate; `[[num, den]]` or `[x]` is a list
fn is_coordinate_list(a: &Value) -> bool {
    match a.as_array() {
        Some(items) if items.len() == 2 && items.iter().all(|x| x.is_i64() || x.is_u64()) => false,
        Some(_) => true,
        None => false,
    }
}

fn parse_coordinate(v: &Value) -> Result<Coord> {
    match v {
        Value::Array(p) if p.len() == 2 => {
            let num: BigInt = p[0].to_string().parse().map_err(|_| Error::Parse(format!("bad numerator {}", p[0])))?;
            let den: BigInt = p[1].to_string().parse().map_err(|_| Error::Parse(format!("bad denominator {}", p[1])))?;
            if den.is_zero() {
                return Err(Error::Parse("zero denominator in atom".into()));
            }
            Ok(Coord::Rational(BigRational::new(num, den)))
        }
        Value::String(s) => Ok(Coord::Rational(parse_rational(s)?)),
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(Coord::Rational(BigRational::from_integer(i.into()))),
            None => Ok(Coord::Float(n.as_f64().unwrap_or(f64::NAN))),
        },
        other => Err(Error::Parse(format!("bad atom coordinate {other}"))),
    }
}

impl Serialize for AtomicTorusMeasure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for AtomicTorusMeasure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        Self::from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// A measure known through its Fourier coefficients.
pub trait FourierMeasure: Send + Sync {
    fn dim(&self) -> usize;

    fn coefficient(&self, n: &MultiIndex) -> Complex64;

    /// `sigma({0})` when known.
    fn mass_at_zero(&self) -> Option<f64>;

    fn total_mass(&self) -> f64 {
        self.coefficient(&MultiIndex::zero(self.dim())).re
    }
}

impl FourierMeasure for AtomicTorusMeasure {
    fn dim(&self) -> usize {
        self.dim
    }

    fn coefficient(&self, n: &MultiIndex) -> Complex64 {
        self.fourier_coefficient(n).expect("dimension checked by caller")
    }

    fn mass_at_zero(&self) -> Option<f64> {
        Some(AtomicTorusMeasure::mass_at_zero(self))
    }

    fn total_mass(&self) -> f64 {
        AtomicTorusMeasure::total_mass(self)
    }
}

/// Spectral measure of a cylinder `B` for a Bernoulli shift whose
/// correlations vanish up to lag `k`: `nu(B)` at 0, zero for
/// `1 <= |n| <= k`, `nu(B)^2` beyond. Its atom at the origin has mass
/// `nu(B)^2`, the Cesàro limit of the coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BernoulliSpectral {
    pub k: u64,
    pub cylinder_mass: f64,
}

pub fn bernoulli_spectral_measure(k: u64, cylinder_mass: f64) -> Result<BernoulliSpectral> {
    if !(cylinder_mass > 0.0 && cylinder_mass <= 1.0) {
        return Err(Error::InvalidParameter(format!("cylinder mass {cylinder_mass} outside (0, 1]")));
    }
    Ok(BernoulliSpectral { k, cylinder_mass })
}

impl FourierMeasure for BernoulliSpectral {
    fn dim(&self) -> usize {
        1
    }

    fn coefficient(&self, n: &MultiIndex) -> Complex64 {
        let m = n.norm_inf();
        let v = if m == 0 {
            self.cylinder_mass
        } else if m <= self.k {
            0.0
        } else {
            self.cylinder_mass * self.cylinder_mass
        };
        Complex64::new(v, 0.0)
    }

    fn mass_at_zero(&self) -> Option<f64> {
        Some(self.cylinder_mass * self.cylinder_mass)
    }
}

/// Convolution of two oracle measures: coefficients multiply.
pub struct ConvolvedMeasure<'a> {
    pub left: &'a dyn FourierMeasure,
    pub right: &'a dyn FourierMeasure,
}

impl FourierMeasure for ConvolvedMeasure<'_> {
    fn dim(&self) -> usize {
        self.left.dim()
    }

    fn coefficient(&self, n: &MultiIndex) -> Complex64 {
        self.left.coefficient(n) * self.right.coefficient(n)
    }

    // only a lower bound (the product of masses) is known in general
    fn mass_at_zero(&self) -> Option<f64> {
        None
    }
}

/// Statistic examined by [`spectral_test`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralMode {
    /// `max |sigma^(d_m)|`: the transform vanishes on `D`.
    Vanish,
    /// Max over the second half of the window: coefficients tend to 0 along `D`.
    Tail,
    /// `|mean of sigma^(d_m)|`: Cesàro (density) version.
    Cesaro,
    /// Tail max compared with `sigma({0})`.
    Nice,
    /// Partial sums of `|sigma^(d_m)|`.
    Summable,
}

impl std::str::FromStr for SpectralMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vanish" => Ok(Self::Vanish),
            "tail" => Ok(Self::Tail),
            "cesaro" => Ok(Self::Cesaro),
            "nice" => Ok(Self::Nice),
            "summable" => Ok(Self::Summable),
            other => Err(Error::Parse(format!("unknown spectral mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpectralVerdict {
    /// This measure obstructs the property named in `property`.
    NegativeCertificate { property: String, statement: String },
    NoConclusion { reason: String },
}

impl SpectralVerdict {
    pub fn is_certificate(&self) -> bool {
        matches!(self, SpectralVerdict::NegativeCertificate { .. })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub mode: SpectralMode,
    pub window_m: usize,
    pub tol: f64,
    pub mass_at_zero: f64,
    pub total_mass: f64,
    /// The mode's statistic over `d_1 .. d_M`.
    pub window_statistic: f64,
    /// `(d_m, sigma^(d_m))` for every `m <= M`.
    pub coefficients: Vec<(MultiIndex, [f64; 2])>,
    /// Running partial sums of `|sigma^(d_m)|` (summable mode only).
    pub partial_sums: Vec<f64>,
    /// Largest `|sigma^(d_m)|` over the whole window, exactly zero when every
    /// coefficient cancelled exactly.
    pub window_max_abs: f64,
    pub verdict: SpectralVerdict,
}

/// Evaluates a spectral statistic of `sigma` along `d_1 .. d_M` and emits a
/// negative certificate when `sigma` charges the origin although the
/// statistic is below `tol`.
pub fn spectral_test(
    sigma: &dyn FourierMeasure,
    d: &[MultiIndex],
    m: usize,
    mode: SpectralMode,
    tol: f64,
) -> Result<SpectralReport> {
    if m == 0 {
        return Err(Error::InvalidParameter("window M must be at least 1".into()));
    }
    if d.len() < m {
        return Err(Error::InvalidParameter(format!("sequence has {} terms, window needs {m}", d.len())));
    }
    let mass0 = sigma
        .mass_at_zero()
        .ok_or_else(|| Error::Unsupported("measure has no declared mass at zero".into()))?;
    for x in &d[..m] {
        x.check_dim(sigma.dim())?;
    }
    let coeffs: Vec<Complex64> = d[..m].iter().map(|x| sigma.coefficient(x)).collect();
    let abs: Vec<f64> = coeffs.iter().map(|z| z.norm()).collect();
    let half = m / 2;
    let tail_max = abs[half..].iter().copied().fold(0.0, f64::max);
    let window_max_abs = abs.iter().copied().fold(0.0, f64::max);
    let mut partial_sums = Vec::new();
    let statistic = match mode {
        SpectralMode::Vanish => window_max_abs,
        SpectralMode::Tail | SpectralMode::Nice => tail_max,
        SpectralMode::Cesaro => (coeffs.iter().copied().collect::<ComplexSum>().value() / m as f64).norm(),
        SpectralMode::Summable => {
            let mut s = crate::numeric::KahanSum::new();
            for &a in &abs {
                s.add(a);
                partial_sums.push(s.value());
            }
            s.value()
        }
    };
    let has_atom = mass0 > tol;
    let verdict = match mode {
        SpectralMode::Vanish if statistic <= tol && has_atom => SpectralVerdict::NegativeCertificate {
            property: "vdC".into(),
            statement: format!(
                "sigma^(d) vanishes on the first {m} terms of D while sigma({{0}}) = {mass0}: D is not a vdC set (the window covers only these terms)"
            ),
        },
        SpectralMode::Tail if statistic <= tol && has_atom => SpectralVerdict::NegativeCertificate {
            property: "FC+".into(),
            statement: format!(
                "|sigma^(d)| <= {statistic:e} on the second half of the window while sigma({{0}}) = {mass0}: evidence that D is not FC+ (enhanced vdC)"
            ),
        },
        SpectralMode::Cesaro if statistic <= tol && has_atom => SpectralVerdict::NegativeCertificate {
            property: "density FC+".into(),
            statement: format!(
                "Cesàro mean of sigma^(d_m) over the window is {statistic:e} while sigma({{0}}) = {mass0}: evidence that D is not density FC+"
            ),
        },
        SpectralMode::Nice if mass0 > statistic + tol => SpectralVerdict::NegativeCertificate {
            property: "nice FC+".into(),
            statement: format!(
                "sigma({{0}}) = {mass0} exceeds the window tail max {statistic:e}: the nice FC+ inequality fails in this window"
            ),
        },
        SpectralMode::Summable => {
            let tail_increment = partial_sums[m - 1] - if half == 0 { 0.0 } else { partial_sums[half - 1] };
            if tail_increment <= tol && has_atom {
                SpectralVerdict::NegativeCertificate {
                    property: "summability criterion".into(),
                    statement: format!(
                        "partial sums of |sigma^(d)| stabilise (second-half increment {tail_increment:e}) while sigma({{0}}) = {mass0}: evidence against D being vdC"
                    ),
                }
            } else {
                SpectralVerdict::NoConclusion { reason: "partial sums still growing or no atom at 0".into() }
            }
        }
        _ => SpectralVerdict::NoConclusion {
            reason: if has_atom {
                "statistic above tolerance; this measure is no obstruction".into()
            } else {
                "sigma has no atom at 0".into()
            },
        },
    };
    Ok(SpectralReport {
        mode,
        window_m: m,
        tol,
        mass_at_zero: mass0,
        total_mass: sigma.total_mass(),
        window_statistic: statistic,
        coefficients: d[..m].iter().cloned().zip(coeffs.iter().map(|z| [z.re, z.im])).collect(),
        partial_sums,
        window_max_abs,
        verdict,
    })
}

/// Pushes a measure through `L^T` for use with a transformed set.
pub fn push_forward(sigma: &AtomicTorusMeasure, matrix: &[Vec<i64>]) -> Result<AtomicTorusMeasure> {
    sigma.push_forward(matrix)
}

/// `sigma^(L k)` from the original measure, for checking push-forwards.
pub fn coefficient_through(sigma: &AtomicTorusMeasure, matrix: &[Vec<i64>], k: &MultiIndex) -> Result<Complex64> {
    sigma.fourier_coefficient(&apply_matrix(matrix, k))
}

/// Greatest common divisor of the atom denominators, useful for reporting.
pub fn common_denominator(sigma: &AtomicTorusMeasure) -> Option<BigInt> {
    let mut l = BigInt::one();
    for a in sigma.atoms() {
        match a {
            Point::Rational(c) => {
                for x in c {
                    l = l.lcm(x.denom());
                }
            }
            Point::Float(_) => return None,
        }
    }
    Some(l)
}
