//! Closed-form measure-preserving systems and finite-window recurrence tests.
//!
//! Systems: circle rotations by an exact real, cyclic shifts, the Bernoulli
//! cylinder model with its closed-form correlations, and finite products.
//! `mu(A ∩ T^-n A)` is computed exactly (rotation overlaps live in
//! `Q(sqrt k)`), so thresholds are compared without rounding whenever the
//! value is exact.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{format_rational, parse_rational, QuadIrrational};
use crate::lattice::MultiIndex;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    /// `x -> x + alpha` on the circle.
    Rotation { alpha: QuadIrrational },
    /// `x -> x + 1` on `Z/m`.
    Cyclic { m: u64 },
    /// Shift on sequences with a cylinder `B` whose correlations vanish for
    /// `1 <= |n| <= k` and equal `nu(B)^2` beyond.
    BernoulliCylinder {
        k: u64,
        #[serde(with = "rational_string")]
        mass: BigRational,
    },
    Product { factors: Vec<SystemSpec> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetSpec {
    /// `[a, b)` inside `[0, 1)`.
    Interval {
        #[serde(with = "rational_string")]
        a: BigRational,
        #[serde(with = "rational_string")]
        b: BigRational,
    },
    Residues { elements: Vec<u64> },
    Cylinder,
    Product { factors: Vec<SetSpec> },
}

mod rational_string {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&crate::exact::format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        crate::exact::parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

impl SystemSpec {
    /// Rotation by `alpha` reduced into `[0, 1)`.
    pub fn rotation(alpha: QuadIrrational) -> Self {
        Self::Rotation { alpha: alpha.fract() }
    }

    /// Parses `rotation:<real>`, `cyclic:<m>`, `bernoulli:<k>:<mass>`, or JSON.
    /// As a rotation number, `golden` means its fractional part.
    pub fn parse_arg(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            let sys: Self = serde_json::from_str(s)?;
            sys.validate()?;
            return Ok(sys);
        }
        let mut parts = s.split(':');
        let sys = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some("rotation"), Some(a), None, None) => Self::rotation(a.parse()?),
            (Some("cyclic"), Some(m), None, None) => {
                Self::Cyclic { m: m.parse().map_err(|_| Error::Parse(format!("bad modulus {m:?}")))? }
            }
            (Some("bernoulli"), Some(k), Some(mass), None) => Self::BernoulliCylinder {
                k: k.parse().map_err(|_| Error::Parse(format!("bad k {k:?}")))?,
                mass: parse_rational(mass)?,
            },
            _ => return Err(Error::Parse(format!("unknown system {s:?}"))),
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Rotation { alpha } => {
                if alpha.cmp_rational(&BigRational::zero()).is_lt() || alpha.cmp_rational(&BigRational::one()).is_ge() {
                    return Err(Error::InvalidParameter(format!("rotation number {alpha} outside [0, 1)")));
                }
            }
            Self::Cyclic { m } if *m == 0 => return Err(Error::InvalidParameter("cyclic order must be positive".into())),
            Self::BernoulliCylinder { mass, .. } => {
                if !mass.is_positive() || *mass > BigRational::one() {
                    return Err(Error::InvalidParameter("cylinder mass must lie in (0, 1]".into()));
                }
            }
            Self::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::InvalidParameter("empty product".into()));
                }
                factors.iter().try_for_each(Self::validate)?;
            }
            _ => {}
        }
        Ok(())
    }
}

impl SetSpec {
    /// Parses a set for `sys`: `a:b` for an interval, `0,3` for residues,
    /// `cylinder`, `|`-separated factors for products, or JSON.
    pub fn parse_for(sys: &SystemSpec, s: &str) -> Result<Self> {
        let s = s.trim();
        let set = if s.starts_with('{') {
            serde_json::from_str(s)?
        } else {
            match sys {
                SystemSpec::Rotation { .. } => {
                    let (a, b) = s.split_once(':').ok_or_else(|| Error::Parse(format!("interval {s:?} is not a:b")))?;
                    Self::Interval { a: parse_rational(a)?, b: parse_rational(b)? }
                }
                SystemSpec::Cyclic { .. } => Self::Residues {
                    elements: s
                        .split(',')
                        .map(|t| t.trim().parse().map_err(|_| Error::Parse(format!("bad residue {t:?}"))))
                        .collect::<Result<_>>()?,
                },
                SystemSpec::BernoulliCylinder { .. } => Self::Cylinder,
                SystemSpec::Product { factors } => {
                    let pieces: Vec<&str> = s.split('|').collect();
                    if pieces.len() != factors.len() {
                        return Err(Error::Parse(format!("{} set factors for {} system factors", pieces.len(), factors.len())));
                    }
                    Self::Product {
                        factors: factors.iter().zip(pieces).map(|(f, p)| Self::parse_for(f, p)).collect::<Result<_>>()?,
                    }
                }
            }
        };
        set.validate_for(sys)?;
        Ok(set)
    }

    pub fn validate_for(&self, sys: &SystemSpec) -> Result<()> {
        match (sys, self) {
            (SystemSpec::Rotation { .. }, Self::Interval { a, b }) => {
                if a.is_negative() || b > &BigRational::one() || a >= b {
                    return Err(Error::InvalidParameter(format!(
                        "interval [{}, {}) must be nonempty inside [0, 1)",
                        format_rational(a),
                        format_rational(b)
                    )));
                }
            }
            (SystemSpec::Cyclic { m }, Self::Residues { elements }) => {
                if elements.is_empty() || elements.iter().any(|x| x >= m) {
                    return Err(Error::InvalidParameter(format!("residue set must be a nonempty subset of Z/{m}")));
                }
                let mut sorted = elements.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != elements.len() {
                    return Err(Error::InvalidParameter("repeated residue".into()));
                }
            }
            (SystemSpec::BernoulliCylinder { .. }, Self::Cylinder) => {}
            (SystemSpec::Product { factors }, Self::Product { factors: sets }) if factors.len() == sets.len() => {
                factors.iter().zip(sets).try_for_each(|(f, s)| s.validate_for(f))?;
            }
            _ => return Err(Error::InvalidParameter("set does not match the system".into())),
        }
        Ok(())
    }
}

/// A correlation value, exact when it lies in a single quadratic field.
#[derive(Clone, Debug, PartialEq)]
pub struct Measure {
    pub exact: Option<QuadIrrational>,
    pub approx: f64,
}

impl Measure {
    fn exact(q: QuadIrrational) -> Self {
        let approx = q.to_f64();
        Self { exact: Some(q), approx }
    }

    fn rational(q: BigRational) -> Self {
        Self::exact(QuadIrrational::from_rational(q))
    }

    fn mul(&self, other: &Self) -> Self {
        let exact = match (&self.exact, &other.exact) {
            (Some(x), Some(y)) if y.is_rational() => Some(x.mul_rational(y.rational_part())),
            (Some(x), Some(y)) if x.is_rational() => Some(y.mul_rational(x.rational_part())),
            _ => None,
        };
        match exact {
            Some(q) => Self::exact(q),
            None => Self { exact: None, approx: self.approx * other.approx },
        }
    }

    /// `self >= t`, exactly when possible.
    pub fn at_least(&self, t: &BigRational) -> bool {
        match &self.exact {
            Some(q) => q.cmp_rational(t).is_ge(),
            None => self.approx >= t.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn is_positive(&self) -> bool {
        match &self.exact {
            Some(q) => q.cmp_rational(&BigRational::zero()).is_gt(),
            None => self.approx > 0.0,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(q) => write!(f, "{q}"),
            None => write!(f, "{}", self.approx),
        }
    }
}

impl Serialize for Measure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Measure", 2)?;
        st.serialize_field("value", &self.approx)?;
        st.serialize_field("exact", &self.exact.as_ref().map(|q| q.to_string()))?;
        st.end()
    }
}

/// `mu(A)`.
pub fn measure_of(sys: &SystemSpec, a: &SetSpec) -> Result<Measure> {
    correlation_exact(sys, a, 0)
}

/// `mu(A ∩ T^-n A)`.
pub fn correlation_exact(sys: &SystemSpec, a: &SetSpec, n: i64) -> Result<Measure> {
    a.validate_for(sys)?;
    Ok(correlation_unchecked(sys, a, n))
}

fn correlation_unchecked(sys: &SystemSpec, a: &SetSpec, n: i64) -> Measure {
    match (sys, a) {
        (SystemSpec::Rotation { alpha }, SetSpec::Interval { a, b }) => {
            // A ∩ (A - t) on the circle, t = frac(n alpha): overlaps of length
            // max(0, L - t) and max(0, L - (1 - t))
            let len = b - a;
            let t = alpha.mul_rational(&BigRational::from_integer(BigInt::from(n))).fract();
            let zero = BigRational::zero();
            let left = t.neg().add_rational(&len);
            let right = t.add_rational(&(&len - BigRational::one()));
            let mut total = QuadIrrational::from_rational(zero.clone());
            for part in [left, right] {
                if part.cmp_rational(&zero).is_gt() {
                    total = total.add(&part).expect("same quadratic field");
                }
            }
            Measure::exact(total)
        }
        (SystemSpec::Cyclic { m }, SetSpec::Residues { elements }) => {
            let shift = n.rem_euclid(*m as i64) as u64;
            let count = elements.iter().filter(|&&x| elements.contains(&((x + shift) % m))).count();
            Measure::rational(BigRational::new(BigInt::from(count), BigInt::from(*m)))
        }
        (SystemSpec::BernoulliCylinder { k, mass }, SetSpec::Cylinder) => {
            let d = n.unsigned_abs();
            Measure::rational(if d == 0 {
                mass.clone()
            } else if d <= *k {
                BigRational::zero()
            } else {
                mass * mass
            })
        }
        (SystemSpec::Product { factors }, SetSpec::Product { factors: sets }) => factors
            .iter()
            .zip(sets)
            .map(|(f, s)| correlation_unchecked(f, s, n))
            .fold(Measure::rational(BigRational::one()), |acc, m| acc.mul(&m)),
        _ => unreachable!("validated pair"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecurrenceMode {
    Plain,
    Strong,
    Nice,
    Averaging,
}

impl FromStr for RecurrenceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Self::Plain),
            "strong" => Ok(Self::Strong),
            "nice" => Ok(Self::Nice),
            "averaging" => Ok(Self::Averaging),
            other => Err(Error::Parse(format!("unknown recurrence mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecurrenceHit {
    pub index: usize,
    pub d: i64,
    pub value: Measure,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecurrenceReport {
    pub mode: RecurrenceMode,
    pub window_m: usize,
    pub eps: f64,
    pub measure_a: Measure,
    /// Correlations along `d_1, ..., d_M`.
    pub values: Vec<f64>,
    pub window_first_positive: Option<RecurrenceHit>,
    /// Largest value over the second half of the window.
    pub window_tail_max: f64,
    /// `mu(A)^2 - eps` and the `d` reaching it.
    pub nice_threshold: Option<f64>,
    pub window_hits: Vec<RecurrenceHit>,
    /// Running Cesàro means.
    pub cesaro: Vec<f64>,
    pub window_holds: bool,
}

/// Evaluates `mu(A ∩ T^-d A)` along `d_1, ..., d_M` and summarises it per mode.
/// Zero shifts are skipped in plain mode.
pub fn recurrence_test(sys: &SystemSpec, a: &SetSpec, ds: &[i64], mode: RecurrenceMode, eps: f64) -> Result<RecurrenceReport> {
    a.validate_for(sys)?;
    if ds.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if matches!(mode, RecurrenceMode::Strong | RecurrenceMode::Averaging) {
        let idx: Vec<MultiIndex> = ds.iter().map(|&d| MultiIndex::scalar(d)).collect();
        crate::correlations::check_ordering(&idx)?;
    }
    let measure_a = correlation_unchecked(sys, a, 0);
    let values: Vec<Measure> = ds.par_iter().map(|&d| correlation_unchecked(sys, a, d)).collect();
    let approx: Vec<f64> = values.iter().map(|m| m.approx).collect();
    let hit = |i: usize| RecurrenceHit { index: i + 1, d: ds[i], value: values[i].clone() };

    let window_first_positive = (0..ds.len()).find(|&i| ds[i] != 0 && values[i].is_positive()).map(hit);
    let window_tail_max = approx[ds.len() / 2..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut cesaro = Vec::with_capacity(ds.len());
    let mut acc = 0.0;
    for (i, v) in approx.iter().enumerate() {
        acc += v;
        cesaro.push(acc / (i + 1) as f64);
    }
    let (nice_threshold, window_hits) = if mode == RecurrenceMode::Nice {
        let mu = measure_a.exact.as_ref().filter(|q| q.is_rational()).map(|q| q.rational_part().clone());
        let eps_q = BigRational::from_float(eps).ok_or_else(|| Error::InvalidParameter("eps must be finite".into()))?;
        let hits: Vec<RecurrenceHit> = match mu {
            Some(mu) => {
                let t = &mu * &mu - eps_q;
                (0..ds.len()).filter(|&i| ds[i] != 0 && values[i].at_least(&t)).map(hit).collect()
            }
            None => {
                let t = measure_a.approx.powi(2) - eps;
                (0..ds.len()).filter(|&i| ds[i] != 0 && approx[i] >= t).map(hit).collect()
            }
        };
        (Some(measure_a.approx.powi(2) - eps), hits)
    } else {
        (None, Vec::new())
    };
    let window_holds = match mode {
        RecurrenceMode::Plain => window_first_positive.is_some(),
        RecurrenceMode::Strong => window_tail_max > eps,
        RecurrenceMode::Nice => !window_hits.is_empty(),
        RecurrenceMode::Averaging => cesaro.last().is_some_and(|&c| c > eps),
    };
    Ok(RecurrenceReport {
        mode,
        window_m: ds.len(),
        eps,
        measure_a,
        values: approx,
        window_first_positive,
        window_tail_max,
        nice_threshold,
        window_hits,
        cesaro,
        window_holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LagSummary {
    pub lag: usize,
    pub empirical: f64,
    pub exact: Measure,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockOrbit {
    #[serde(skip)]
    pub u: Vec<u8>,
    pub n: usize,
    pub blocks: usize,
    pub seed: u64,
    pub density: f64,
    pub measure_a: Measure,
    pub lags: Vec<LagSummary>,
}

/// Point-orbit state for the systems that have one.
enum Point {
    Circle(f64, f64),
    Cyclic(u64, u64),
    Tuple(Vec<Point>),
}

fn draw_point(sys: &SystemSpec, rng: &mut ChaCha8Rng) -> Result<Point> {
    Ok(match sys {
        SystemSpec::Rotation { alpha } => Point::Circle(rng.random::<f64>(), alpha.to_f64()),
        SystemSpec::Cyclic { m } => Point::Cyclic(rng.random_range(0..*m), *m),
        SystemSpec::Product { factors } => Point::Tuple(factors.iter().map(|f| draw_point(f, rng)).collect::<Result<_>>()?),
        SystemSpec::BernoulliCylinder { .. } => {
            return Err(Error::Unsupported("point orbits of the Bernoulli cylinder model".into()))
        }
    })
}

fn step(p: &mut Point) {
    match p {
        Point::Circle(x, a) => {
            *x += *a;
            if *x >= 1.0 {
                *x -= 1.0;
            }
        }
        Point::Cyclic(x, m) => *x = (*x + 1) % *m,
        Point::Tuple(ps) => ps.iter_mut().for_each(step),
    }
}

fn member(p: &Point, a: &SetSpec) -> bool {
    match (p, a) {
        (Point::Circle(x, _), SetSpec::Interval { a, b }) => {
            *x >= a.to_f64().unwrap_or(0.0) && *x < b.to_f64().unwrap_or(1.0)
        }
        (Point::Cyclic(x, _), SetSpec::Residues { elements }) => elements.contains(x),
        (Point::Tuple(ps), SetSpec::Product { factors }) => ps.iter().zip(factors).all(|(p, s)| member(p, s)),
        _ => false,
    }
}

/// The sequence `1_A(y_n)` with `(y_n) = (x_1, x_2, T x_2, x_3, T x_3, T^2 x_3, ...)`
/// for independent uniform `x_k`, with empirical density and lag correlations
/// `(1/N) sum u_n u_{n+d}` against their exact targets.
pub fn random_block_orbit(sys: &SystemSpec, a: &SetSpec, seed: u64, n_terms: usize, lags: &[usize]) -> Result<BlockOrbit> {
    a.validate_for(sys)?;
    if n_terms == 0 {
        return Err(Error::EmptyWindow);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = Vec::with_capacity(n_terms);
    let mut blocks = 0;
    while u.len() < n_terms {
        blocks += 1;
        let mut p = draw_point(sys, &mut rng)?;
        for _ in 0..blocks.min(n_terms - u.len()) {
            u.push(u8::from(member(&p, a)));
            step(&mut p);
        }
    }
    let density = u.iter().map(|&x| f64::from(x)).sum::<f64>() / n_terms as f64;
    let lags = lags
        .iter()
        .map(|&d| {
            let hits = u.iter().zip(u.iter().skip(d)).filter(|(x, y)| **x == 1 && **y == 1).count();
            let empirical = hits as f64 / n_terms as f64;
            let exact = correlation_unchecked(sys, a, d as i64);
            LagSummary { lag: d, empirical, error: (empirical - exact.approx).abs(), exact }
        })
        .collect();
    Ok(BlockOrbit { n: n_terms, blocks, seed, density, measure_a: correlation_unchecked(sys, a, 0), lags, u })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Vdc01Report {
    pub n: usize,
    pub density: f64,
    /// First tested shift with positive empirical correlation.
    pub first_positive: Option<(usize, f64)>,
    pub correlations: Vec<(usize, f64)>,
}

/// For a 0/1 sequence, the empirical correlations `(1/N) sum u_n u_{n+d}`
/// along the tested shifts.
pub fn vdc01_harness(u: &[u8], ds: &[usize]) -> Result<Vdc01Report> {
    if u.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if u.iter().any(|&x| x > 1) {
        return Err(Error::InvalidParameter("sequence must take values 0 and 1".into()));
    }
    let n = u.len();
    let density = u.iter().map(|&x| f64::from(x)).sum::<f64>() / n as f64;
    let correlations: Vec<(usize, f64)> = ds
        .par_iter()
        .map(|&d| (d, u.iter().zip(u.iter().skip(d)).filter(|(x, y)| **x == 1 && **y == 1).count() as f64 / n as f64))
        .collect();
    let first_positive = correlations.iter().find(|&&(d, c)| d != 0 && c > 0.0).copied();
    Ok(Vdc01Report { n, density, first_positive, correlations })
}
