//! Integer and real sequences used as candidate van der Corput sets.
//!
//! [`SequenceSpec`] describes a generator `n -> Z^d` declaratively (it is
//! the JSON object accepted by the command line); [`RealSequenceSpec`] does
//! the same for sequences taken modulo 1.

pub mod block;
pub mod floor_power;
pub mod primes;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::divisibility::IntPolynomial;
use crate::error::{Error, Result};
use crate::exact::{parse_rational, QuadIrrational};
use crate::lattice::MultiIndex;

pub use block::{block_decompose, block_sequence, block_sequence_2d, BlockMode, BlockSequenceParams};
pub use floor_power::FloorPower;
pub use primes::{first_primes_in_class, prime_powers_up_to, primes_in_class, primes_up_to};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SequenceSpec {
    /// `(p_1(n), ..., p_d(n))` for `n = 1, 2, ...`.
    PolynomialTuple { polys: Vec<IntPolynomial> },
    /// `(f_1(p + shift), ..., f_d(p + shift))` over primes `p`, optionally
    /// restricted to `p ≡ 1 (mod class_q)`.
    ShiftedPrime {
        polys: Vec<IntPolynomial>,
        shift: i64,
        #[serde(default)]
        class_q: Option<u64>,
    },
    /// `floor(b n^c + a log n)`; `c` and `a` are exact decimals or fractions.
    FloorPower {
        b: QuadIrrational,
        c: String,
        #[serde(default)]
        log_coef: Option<String>,
        #[serde(default)]
        max_bits: Option<u32>,
    },
    /// Integers with an even number of binary ones: 0, 3, 5, 6, 9, ...
    Morse,
    /// `floor(a_1 n) floor(a_2 n) ... floor(a_k n)`.
    GenpolyProduct { alphas: Vec<QuadIrrational> },
    ExplicitList { dim: usize, points: Vec<MultiIndex> },
}

fn to_i64(v: BigInt, what: &str) -> Result<i64> {
    v.to_i64().ok_or_else(|| Error::InvalidParameter(format!("{what} overflows 64-bit coordinates")))
}

fn eval_tuple(polys: &[IntPolynomial], x: &BigInt) -> Result<MultiIndex> {
    Ok(MultiIndex::new(
        polys.iter().map(|p| to_i64(p.eval(x), "sequence term")).collect::<Result<Vec<_>>>()?,
    ))
}

/// Least `n` with an even number of binary ones, at least `from`.
fn next_morse(from: u64) -> u64 {
    (from..).find(|n| n.count_ones() % 2 == 0).expect("unbounded range")
}

impl SequenceSpec {
    /// Short names accepted by the command line.
    pub fn named(name: &str) -> Result<Self> {
        let poly = |s: &str| SequenceSpec::PolynomialTuple { polys: vec![s.parse().expect("fixed polynomial")] };
        Ok(match name {
            "naturals" => poly("0,1"),
            "odds" => poly("-1,2"),
            "evens" => poly("0,2"),
            "squares" => poly("0,0,1"),
            "cubes" => poly("0,0,0,1"),
            "primes-minus-1" => SequenceSpec::ShiftedPrime { polys: vec![IntPolynomial::x()], shift: -1, class_q: None },
            "primes-plus-1" => SequenceSpec::ShiftedPrime { polys: vec![IntPolynomial::x()], shift: 1, class_q: None },
            "morse" => SequenceSpec::Morse,
            other => return Err(Error::Parse(format!("unknown sequence name {other:?}"))),
        })
    }

    /// A name from [`SequenceSpec::named`], inline JSON, or a JSON file path.
    pub fn parse_arg(arg: &str) -> Result<Self> {
        let t = arg.trim();
        if t.starts_with('{') {
            return Ok(serde_json::from_str(t)?);
        }
        if let Ok(spec) = Self::named(t) {
            return Ok(spec);
        }
        let text = std::fs::read_to_string(t)
            .map_err(|e| Error::Parse(format!("{t:?} is neither a sequence name nor a readable file: {e}")))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn dim(&self) -> usize {
        match self {
            SequenceSpec::PolynomialTuple { polys } | SequenceSpec::ShiftedPrime { polys, .. } => polys.len(),
            SequenceSpec::ExplicitList { dim, .. } => *dim,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SequenceSpec::PolynomialTuple { polys } | SequenceSpec::ShiftedPrime { polys, .. } if polys.is_empty() => {
                Err(Error::InvalidParameter("polynomial list is empty".into()))
            }
            SequenceSpec::ShiftedPrime { class_q: Some(0), .. } => {
                Err(Error::InvalidParameter("prime class modulus must be at least 1".into()))
            }
            SequenceSpec::FloorPower { .. } => self.floor_power().map(|_| ()),
            SequenceSpec::GenpolyProduct { alphas } if alphas.is_empty() => {
                Err(Error::InvalidParameter("generalized polynomial needs at least one multiplier".into()))
            }
            SequenceSpec::ExplicitList { dim, points } => {
                if *dim == 0 {
                    return Err(Error::InvalidParameter("dimension must be at least 1".into()));
                }
                points.iter().try_for_each(|p| p.check_dim(*dim))
            }
            _ => Ok(()),
        }
    }

    fn floor_power(&self) -> Result<FloorPower> {
        let SequenceSpec::FloorPower { b, c, log_coef, max_bits } = self else {
            unreachable!("only called on floor-power specs")
        };
        let log = match log_coef {
            Some(s) => parse_rational(s)?,
            None => BigRational::zero(),
        };
        let mut fp = FloorPower::new(b.clone(), parse_rational(c)?, log)?;
        if let Some(m) = max_bits {
            fp.max_bits = (*m).max(64);
        }
        Ok(fp)
    }

    /// First `count` terms.
    pub fn generate(&self, count: usize) -> Result<Vec<MultiIndex>> {
        self.validate()?;
        match self {
            SequenceSpec::PolynomialTuple { polys } => {
                (1..=count as i64).map(|n| eval_tuple(polys, &BigInt::from(n))).collect()
            }
            SequenceSpec::ShiftedPrime { polys, shift, class_q } => {
                let ps = first_primes_in_class(class_q.unwrap_or(1), count)?;
                ps.into_iter().map(|p| eval_tuple(polys, &(BigInt::from(p) + shift))).collect()
            }
            SequenceSpec::FloorPower { .. } => {
                let fp = self.floor_power()?;
                (1..=count as u64).map(|n| Ok(MultiIndex::scalar(to_i64(fp.term(n)?, "floor-power term")?))).collect()
            }
            SequenceSpec::Morse => {
                let mut out = Vec::with_capacity(count);
                let mut n = 0;
                while out.len() < count {
                    n = next_morse(n);
                    out.push(MultiIndex::scalar(n as i64));
                    n += 1;
                }
                Ok(out)
            }
            SequenceSpec::GenpolyProduct { alphas } => (1..=count as i64)
                .map(|n| {
                    let nb = BigInt::from(n);
                    let v = alphas.iter().fold(BigInt::from(1), |acc, a| acc * a.floor_mul(&nb));
                    Ok(MultiIndex::scalar(to_i64(v, "generalized polynomial term")?))
                })
                .collect(),
            SequenceSpec::ExplicitList { points, .. } => {
                if count > points.len() {
                    return Err(Error::InvalidParameter(format!(
                        "explicit list has {} points, {count} requested",
                        points.len()
                    )));
                }
                Ok(points[..count].to_vec())
            }
        }
    }
}

/// Membership in the Morse set.
pub fn is_morse(n: u64) -> bool {
    n.count_ones().is_multiple_of(2)
}

/// A real sequence `x_1, x_2, ...` taken modulo 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RealSequenceSpec {
    /// `sum_j c_j n^j` with exact quadratic-irrational coefficients; each
    /// term's fractional part is computed exactly before the float sum.
    Polynomial { coeffs: Vec<QuadIrrational> },
    /// Same with float coefficients (fractional parts lose accuracy as `n` grows).
    FloatPolynomial { coeffs: Vec<f64> },
    Explicit { values: Vec<f64> },
}

impl RealSequenceSpec {
    /// `c * n^power`, for the common one-term case.
    pub fn monomial(c: QuadIrrational, power: usize) -> Self {
        let mut coeffs = vec![QuadIrrational::from_rational(BigRational::zero()); power + 1];
        coeffs[power] = c;
        RealSequenceSpec::Polynomial { coeffs }
    }

    pub fn parse_arg(arg: &str) -> Result<Self> {
        let t = arg.trim();
        if t.starts_with('{') {
            return Ok(serde_json::from_str(t)?);
        }
        let text = std::fs::read_to_string(t).map_err(|e| Error::Parse(format!("cannot read {t:?}: {e}")))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Fractional parts of `x_1 .. x_count`, in `[0, 1)`.
    pub fn fractional_parts(&self, count: usize) -> Result<Vec<f64>> {
        match self {
            RealSequenceSpec::Polynomial { coeffs } => Ok((1..=count as u64)
                .map(|n| {
                    let nb = BigInt::from(n);
                    let mut pow = BigInt::from(1);
                    let mut total = 0.0;
                    for c in coeffs {
                        if !(c.is_rational() && c.rational_part().is_zero()) {
                            total += c.frac_mul(&pow);
                        }
                        pow *= &nb;
                    }
                    crate::numeric::frac(total)
                })
                .collect()),
            RealSequenceSpec::FloatPolynomial { coeffs } => Ok((1..=count)
                .map(|n| {
                    let x = n as f64;
                    let mut pow = 1.0;
                    let mut total = 0.0;
                    for &c in coeffs {
                        total += crate::numeric::frac(c * pow);
                        pow *= x;
                    }
                    crate::numeric::frac(total)
                })
                .collect()),
            RealSequenceSpec::Explicit { values } => {
                if count > values.len() {
                    return Err(Error::InvalidParameter(format!(
                        "explicit sequence has {} values, {count} requested",
                        values.len()
                    )));
                }
                Ok(values[..count].iter().map(|&x| crate::numeric::frac(x)).collect())
            }
        }
    }
}
