//! Positive-definite families and trigonometric witness polynomials.
//!
//! A [`CoefficientFamily`] is a finitely supported map `h -> a_h` on `Z^d`
//! with exact rational complex entries. Read as a trigonometric polynomial
//! `T(x) = sum a_h e(h . x)` it is positive-definite exactly when `T >= 0`;
//! read as a spectrum it is a candidate witness `P` with `P(0) = 1`,
//! `P >= -eps` and frequencies in `±D`.

pub mod certify;
pub mod search;
pub mod simplex;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{format_rational, parse_rational};
use crate::lattice::{IndexBox, MultiIndex};
use crate::sequences::SequenceSpec;

pub use certify::{
    certified_minimum, is_positive_definite, verify_kmf_witness, GridParams, MinimumBound, PdMethod, PdParams,
    PdVerdict, PositiveDefiniteCertificate, WitnessCheck,
};
pub use search::{witness_search, SearchOutcome, SearchParams};

pub type ExactComplex = Complex<BigRational>;

fn rat_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn exact_to_c64(z: &ExactComplex) -> Complex64 {
    Complex64::new(rat_to_f64(&z.re), rat_to_f64(&z.im))
}

/// Exact value of a finite double.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_f64(x).ok_or_else(|| Error::InvalidParameter(format!("{x} is not a finite number")))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientFamily {
    dim: usize,
    entries: BTreeMap<MultiIndex, ExactComplex>,
}

impl CoefficientFamily {
    /// Zero entries are dropped.
    pub fn new(dim: usize, entries: impl IntoIterator<Item = (MultiIndex, ExactComplex)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        let mut map: BTreeMap<MultiIndex, ExactComplex> = BTreeMap::new();
        for (h, a) in entries {
            h.check_dim(dim)?;
            let slot = map.entry(h).or_insert_with(ExactComplex::zero);
            *slot = &*slot + a;
        }
        map.retain(|_, a| !a.is_zero());
        Ok(Self { dim, entries: map })
    }

    /// Real rational entries.
    pub fn from_real(dim: usize, entries: impl IntoIterator<Item = (MultiIndex, BigRational)>) -> Result<Self> {
        Self::new(dim, entries.into_iter().map(|(h, a)| (h, Complex::new(a, BigRational::zero()))))
    }

    /// Float entries, stored as their exact binary values.
    pub fn from_f64(dim: usize, entries: impl IntoIterator<Item = (MultiIndex, Complex64)>) -> Result<Self> {
        let exact = entries
            .into_iter()
            .map(|(h, z)| Ok((h, Complex::new(rational_from_f64(z.re)?, rational_from_f64(z.im)?))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, exact)
    }

    /// The family with `a_0 = 1` only.
    pub fn identity(dim: usize) -> Self {
        Self::from_real(dim, [(MultiIndex::zero(dim), BigRational::one())]).expect("valid identity")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&MultiIndex, &ExactComplex)> {
        self.entries.iter()
    }

    pub fn get(&self, h: &MultiIndex) -> ExactComplex {
        self.entries.get(h).cloned().unwrap_or_else(ExactComplex::zero)
    }

    /// Frequencies with a nonzero coefficient.
    pub fn support(&self) -> Vec<MultiIndex> {
        self.entries.keys().cloned().collect()
    }

    /// Smallest `H` with the support inside `-H < h < H`.
    pub fn support_bound(&self) -> MultiIndex {
        let mut hb = vec![1i64; self.dim];
        for h in self.entries.keys() {
            for (b, &c) in hb.iter_mut().zip(h.coords()) {
                *b = (*b).max(c.abs() + 1);
            }
        }
        MultiIndex::new(hb)
    }

    /// `sum_h a_h`, which is `T(0)`.
    pub fn sum(&self) -> ExactComplex {
        self.entries.values().fold(ExactComplex::zero(), |acc, a| acc + a)
    }

    pub fn a0(&self) -> ExactComplex {
        self.get(&MultiIndex::zero(self.dim))
    }

    /// First `h` (lexicographically) with `a_{-h} != conj(a_h)`.
    pub fn hermitian_violation(&self) -> Option<MultiIndex> {
        self.entries
            .iter()
            .find(|(h, a)| self.get(&-*h) != a.conj())
            .map(|(h, _)| h.clone())
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_violation().is_none()
    }

    pub fn require_hermitian(&self) -> Result<()> {
        match self.hermitian_violation() {
            Some(h) => Err(Error::NotHermitian(h)),
            None => Ok(()),
        }
    }

    /// `(h, a_h)` as floats, for evaluation.
    pub fn float_terms(&self) -> Vec<(Vec<i64>, Complex64)> {
        self.entries.iter().map(|(h, a)| (h.coords().to_vec(), exact_to_c64(a))).collect()
    }

    /// `T(x) = sum_h a_h e(h . x)`.
    pub fn evaluate(&self, x: &[f64]) -> Complex64 {
        certify::eval_terms(&self.float_terms(), x)
    }

    /// `sum_h |a_h|`.
    pub fn l1_norm(&self) -> f64 {
        self.entries.values().map(|a| exact_to_c64(a).norm()).sum()
    }

    /// `2 pi sum_h |a_h| |h|_2`, a Lipschitz constant of `T` for the
    /// Euclidean metric on coordinates.
    pub fn lipschitz(&self) -> f64 {
        std::f64::consts::TAU * self.entries.iter().map(|(h, a)| exact_to_c64(a).norm() * h.norm_l2()).sum::<f64>()
    }

    /// `sum_h |a_h| |h|_1`.
    pub fn first_moment(&self) -> f64 {
        self.entries
            .iter()
            .map(|(h, a)| exact_to_c64(a).norm() * h.coords().iter().map(|c| c.unsigned_abs() as f64).sum::<f64>())
            .sum()
    }

    /// Divides by `sum_h a_h`, giving the normal form with total 1.
    pub fn normalized(&self) -> Result<Self> {
        let s = self.sum();
        if s.is_zero() {
            return Err(Error::InvalidParameter("family sums to zero and cannot be normalised".into()));
        }
        Self::new(self.dim, self.entries.iter().map(|(h, a)| (h.clone(), a / &s)))
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|(h, a)| {
                json!({
                    "h": h.coords(),
                    "re": rat_to_f64(&a.re),
                    "im": rat_to_f64(&a.im),
                    "exact": [format_rational(&a.re), format_rational(&a.im)],
                })
            })
            .collect();
        json!({ "dim": self.dim, "entries": entries })
    }

    /// Reads `{dim, entries: [{h, re, im}]}`; an optional `exact: [re, im]`
    /// pair of rational strings takes precedence over the floats, and `re`
    /// or `im` may themselves be rational strings.
    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("coefficient JSON: {m}"));
        let dim = v.get("dim").and_then(Value::as_u64).ok_or_else(|| bad("missing dim"))? as usize;
        let list = v.get("entries").and_then(Value::as_array).ok_or_else(|| bad("missing entries"))?;
        let num = |x: Option<&Value>| -> Result<BigRational> {
            match x {
                None | Some(Value::Null) => Ok(BigRational::zero()),
                Some(Value::String(s)) => parse_rational(s),
                Some(Value::Number(n)) => match n.as_i64() {
                    Some(i) => Ok(BigRational::from_integer(BigInt::from(i))),
                    None => rational_from_f64(n.as_f64().unwrap_or(f64::NAN)),
                },
                Some(other) => Err(bad(&format!("bad coefficient {other}"))),
            }
        };
        let mut entries = Vec::with_capacity(list.len());
        for item in list {
            let h: Vec<i64> = serde_json::from_value(item.get("h").cloned().ok_or_else(|| bad("entry without h"))?)?;
            let (re, im) = match item.get("exact").and_then(Value::as_array) {
                Some(pair) if pair.len() == 2 => (num(Some(&pair[0]))?, num(Some(&pair[1]))?),
                _ => (num(item.get("re"))?, num(item.get("im"))?),
            };
            entries.push((MultiIndex::new(h), Complex::new(re, im)));
        }
        Self::new(dim, entries)
    }
}

impl Serialize for CoefficientFamily {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoefficientFamily {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        Self::from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// Normalised Fejér weights `a_h = prod (H_i - |h_i|) / H_i^2` on `-H < h < H`.
pub fn fejer_family(h: &MultiIndex) -> Result<CoefficientFamily> {
    if h.coords().iter().any(|&x| x < 1) {
        return Err(Error::InvalidParameter(format!("Fejér parameter {h} must be at least 1 in every coordinate")));
    }
    let window = IndexBox::new(&MultiIndex::splat(h.dim(), 1) - h, h.clone())?;
    let entries = window.points().map(|k| {
        let w = k.coords().iter().zip(h.coords()).fold(BigRational::one(), |acc, (&ki, &hi)| {
            acc * BigRational::new(BigInt::from(hi - ki.abs()), BigInt::from(hi * hi))
        });
        (k, w)
    });
    CoefficientFamily::from_real(h.dim(), entries)
}

/// `(a_d b_e)` on concatenated indices `(d, e)`.
pub fn product_family(a: &CoefficientFamily, b: &CoefficientFamily) -> Result<CoefficientFamily> {
    a.require_hermitian()?;
    b.require_hermitian()?;
    let mut entries = Vec::with_capacity(a.len() * b.len());
    for (d, x) in a.entries() {
        for (e, y) in b.entries() {
            entries.push((d.concat(e), x * y));
        }
    }
    CoefficientFamily::new(a.dim() + b.dim(), entries)
}

/// `q!` as an integer.
fn factorial(q: u32) -> BigInt {
    (1..=q).fold(BigInt::one(), |acc, k| acc * k)
}

/// `1/(2K) sum over kept terms t of (e(t . x) + e(-t . x))`, where the kept
/// terms are those among the first `n` whose coordinates are all divisible
/// by `q!`. The result is real, satisfies `P(0) = 1` exactly, and has its
/// spectrum in `±{kept terms}`.
pub fn kmf_witness_from_sequence(spec: &SequenceSpec, q: u32, n: usize) -> Result<CoefficientFamily> {
    let terms = spec.generate(n)?;
    let qf = factorial(q);
    let kept: Vec<MultiIndex> = terms
        .into_iter()
        .filter(|t| t.coords().iter().all(|&c| (BigInt::from(c) % &qf).is_zero()))
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyFilter { modulus: format!("{q}! = {qf}"), scanned: n });
    }
    let w = BigRational::new(BigInt::one(), BigInt::from(2 * kept.len()));
    let entries = kept.iter().flat_map(|t| [(t.clone(), w.clone()), (-t, w.clone())]);
    CoefficientFamily::from_real(spec.dim(), entries)
}

/// `(|sum_j e(a_j x)|^2 - |J|) / (|J|^2 - |J|)`, the normalised witness
/// built from a finite set `J`; its spectrum lies in the differences of
/// `J`, its value at 0 is 1, and it is at least `-1/(|J| - 1)`.
pub fn difference_set_witness(j: &[i64]) -> Result<CoefficientFamily> {
    let mut js: Vec<i64> = j.to_vec();
    js.sort_unstable();
    js.dedup();
    let k = js.len();
    if k < 2 {
        return Err(Error::InvalidParameter("need at least two distinct elements".into()));
    }
    let w = BigRational::new(BigInt::one(), BigInt::from(k * k - k));
    let mut entries = Vec::new();
    for &a in &js {
        for &b in &js {
            if a != b {
                entries.push((MultiIndex::scalar(a - b), w.clone()));
            }
        }
    }
    CoefficientFamily::from_real(1, entries)
}

/// A pseudo-random Hermitian family on `|h| < support` in dimension 1,
/// with dyadic rational entries.
pub fn random_hermitian_1d<R: rand::Rng>(rng: &mut R, support: i64, scale: f64) -> CoefficientFamily {
    let q = |x: f64| (x * (1u64 << 20) as f64).round() / (1u64 << 20) as f64;
    let mut entries = vec![(MultiIndex::scalar(0), Complex64::new(q(rng.random_range(0.0..2.0)), 0.0))];
    for k in 1..support {
        let z = Complex64::new(q(rng.random_range(-scale..scale)), q(rng.random_range(-scale..scale)));
        entries.push((MultiIndex::scalar(k), z));
        entries.push((MultiIndex::scalar(-k), z.conj()));
    }
    CoefficientFamily::from_f64(1, entries).expect("finite entries")
}
