//! Exact real numbers of the form `a + b sqrt(r)` with rational `a`, `b`.
//!
//! Irrational rotation numbers such as `sqrt(2) - 1` and the golden ratio
//! live here, as do multipliers like `sqrt(2)/2`. Floors of integer
//! multiples are computed exactly with integer square roots, and fractional
//! parts are recovered without cancellation, so overlaps and Weyl phases at
//! `n ~ 10^10` stay accurate to double precision.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Parses `"p/q"`, `"-7"` or a plain decimal such as `"1.25"` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(p / q);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("not a number: {s:?}")));
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(Error::Parse(format!("not a number: {s:?}")));
    }
    let numer: BigInt = digits.parse().map_err(|_| Error::Parse(format!("not a number: {s:?}")))?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let q = BigRational::new(numer, denom);
    Ok(if neg { -q } else { q })
}

/// Formats a rational as `"p/q"` (or `"p"` when integral).
pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// `rational + surd_coef * sqrt(radicand)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadIrrational {
    rational: BigRational,
    surd_coef: BigRational,
    radicand: u64,
}

impl QuadIrrational {
    pub fn from_rational(q: BigRational) -> Self {
        Self { rational: q, surd_coef: BigRational::zero(), radicand: 0 }
    }

    pub fn new(rational: BigRational, surd_coef: BigRational, radicand: u64) -> Self {
        let root = radicand.sqrt();
        if root * root == radicand {
            return Self::from_rational(rational + surd_coef * BigRational::from_integer(root.into()));
        }
        if surd_coef.is_zero() {
            return Self::from_rational(rational);
        }
        Self { rational, surd_coef, radicand }
    }

    /// `sqrt(2) - 1`.
    pub fn sqrt2_minus_1() -> Self {
        Self::new(-BigRational::one(), BigRational::one(), 2)
    }

    /// `(1 + sqrt 5) / 2`.
    pub fn golden_ratio() -> Self {
        let half = BigRational::new(1.into(), 2.into());
        Self::new(half.clone(), half, 5)
    }

    pub fn is_rational(&self) -> bool {
        self.surd_coef.is_zero()
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn surd(&self) -> (&BigRational, u64) {
        (&self.surd_coef, self.radicand)
    }

    pub fn neg(&self) -> Self {
        Self { rational: -&self.rational, surd_coef: -&self.surd_coef, radicand: self.radicand }
    }

    pub fn add_rational(&self, q: &BigRational) -> Self {
        Self { rational: &self.rational + q, ..self.clone() }
    }

    pub fn mul_rational(&self, q: &BigRational) -> Self {
        Self::new(&self.rational * q, &self.surd_coef * q, self.radicand)
    }

    /// Sum of two numbers; fails when both carry different radicands.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.is_rational() {
            return Ok(other.add_rational(&self.rational));
        }
        if other.is_rational() {
            return Ok(self.add_rational(&other.rational));
        }
        if self.radicand != other.radicand {
            return Err(Error::Unsupported(format!(
                "sum of sqrt({}) and sqrt({}) terms",
                self.radicand, other.radicand
            )));
        }
        Ok(Self::new(
            &self.rational + &other.rational,
            &self.surd_coef + &other.surd_coef,
            self.radicand,
        ))
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.rational.to_f64().unwrap_or(f64::NAN);
        if self.is_rational() {
            return a;
        }
        // floor + accurate fractional part avoids cancellation in e.g. sqrt2 - 1
        let f = self.floor_mul(&BigInt::one());
        f.to_f64().unwrap_or(f64::NAN) + self.frac_mul(&BigInt::one())
    }

    /// Represents `self * m` as `(a + s sqrt(k)) / l` with integer `a`, `k >= 0`,
    /// `l > 0`, `s` in {-1, 0, 1}.
    fn scaled_parts(&self, m: &BigInt) -> (BigInt, i8, BigInt, BigInt) {
        let a = &self.rational * BigRational::from_integer(m.clone());
        let b = &self.surd_coef * BigRational::from_integer(m.clone());
        let l = a.denom().lcm(b.denom());
        let a_int = a.numer() * (&l / a.denom());
        let b_int = b.numer() * (&l / b.denom());
        let s = if b_int.is_positive() {
            1
        } else if b_int.is_negative() {
            -1
        } else {
            0
        };
        let k = &b_int * &b_int * BigInt::from(self.radicand);
        (a_int, s, k, l)
    }

    /// Exact `floor(self * m)`.
    pub fn floor_mul(&self, m: &BigInt) -> BigInt {
        let (a, s, k, l) = self.scaled_parts(m);
        if s == 0 {
            return a.div_floor(&l);
        }
        let t = k.sqrt();
        if &t * &t == k {
            let v = if s > 0 { a + t } else { a - t };
            return v.div_floor(&l);
        }
        // sqrt(k) lies strictly inside (t, t + 1)
        if s > 0 {
            (a + t).div_floor(&l)
        } else {
            (a - t - BigInt::one()).div_floor(&l)
        }
    }

    /// Fractional part of `self * m` in `[0, 1)`, accurate to a few ulps.
    pub fn frac_mul(&self, m: &BigInt) -> f64 {
        let (a, s, k, l) = self.scaled_parts(m);
        let fl = if s == 0 { a.clone().div_floor(&l) } else { self.floor_mul(m) };
        let r = a - &fl * &l;
        let lf = l.to_f64().unwrap_or(f64::INFINITY);
        let num = if s == 0 {
            r.to_f64().unwrap_or(0.0)
        } else {
            let sqrt_k = k.to_f64().unwrap_or(f64::INFINITY).sqrt();
            let same_sign = (s > 0 && !r.is_negative()) || (s < 0 && !r.is_positive());
            if same_sign {
                r.to_f64().unwrap_or(0.0) + f64::from(s) * sqrt_k
            } else if s > 0 {
                // r < 0 < sqrt(k): r + sqrt(k) = (k - r^2) / (sqrt(k) - r)
                let top = (&k - &r * &r).to_f64().unwrap_or(0.0);
                top / (sqrt_k - r.to_f64().unwrap_or(0.0))
            } else {
                // r > 0: r - sqrt(k) = (r^2 - k) / (r + sqrt(k))
                let top = (&r * &r - &k).to_f64().unwrap_or(0.0);
                top / (r.to_f64().unwrap_or(0.0) + sqrt_k)
            }
        };
        let f = num / lf;
        if f >= 1.0 {
            1.0 - f64::EPSILON / 2.0
        } else if f < 0.0 {
            0.0
        } else {
            f
        }
    }

    /// Fractional part of `self`, as an exact quadratic irrational.
    pub fn fract(&self) -> Self {
        let fl = self.floor_mul(&BigInt::one());
        self.add_rational(&-BigRational::from_integer(fl))
    }

    /// Rational enclosure `[lo, lo + 2^-bits]` of `self`.
    pub fn enclosure(&self, bits: u32) -> (BigRational, BigRational) {
        let scale = BigInt::one() << bits;
        let fl = self.floor_mul(&scale);
        let den = scale.clone();
        let lo = BigRational::new(fl.clone(), den.clone());
        let hi = if self.is_rational() && BigRational::new(fl.clone(), den.clone()) == self.rational {
            lo.clone()
        } else {
            BigRational::new(fl + 1, den)
        };
        (lo, hi)
    }

    /// Compares with a rational exactly.
    pub fn cmp_rational(&self, q: &BigRational) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        let a = &self.rational - q;
        let b = &self.surd_coef;
        if b.is_zero() {
            return a.cmp(&BigRational::zero());
        }
        let b_sign = if b.is_positive() { Ordering::Greater } else { Ordering::Less };
        let a_sign = a.cmp(&BigRational::zero());
        if a_sign == Ordering::Equal || a_sign == b_sign {
            return b_sign;
        }
        // opposite signs: compare a^2 with b^2 r
        let a2 = &a * &a;
        let b2r = b * b * BigRational::from_integer(self.radicand.into());
        match a2.cmp(&b2r) {
            Ordering::Greater => a_sign,
            Ordering::Less => b_sign,
            Ordering::Equal => Ordering::Equal,
        }
    }
}

impl fmt::Display for QuadIrrational {
    /// Written so that `FromStr` reads it back, e.g. `-1+sqrt(2)`, `1/2-3/2*sqrt(5)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = format_rational(&self.rational);
        if self.is_rational() {
            return f.write_str(&a);
        }
        let mag = self.surd_coef.abs();
        let surd = if mag.is_one() {
            format!("sqrt({})", self.radicand)
        } else {
            format!("{}*sqrt({})", format_rational(&mag), self.radicand)
        };
        let sign = if self.surd_coef.is_negative() { "-" } else { "+" };
        if self.rational.is_zero() {
            write!(f, "{}{surd}", if sign == "-" { "-" } else { "" })
        } else {
            write!(f, "{a}{sign}{surd}")
        }
    }
}

fn parse_term(t: &str) -> Result<QuadIrrational> {
    let t = t.trim();
    let Some(pos) = t.find("sqrt(") else {
        return Ok(QuadIrrational::from_rational(parse_rational(t)?));
    };
    let prefix = t[..pos].trim_end_matches('*');
    let rest = &t[pos + 5..];
    let close = rest
        .find(')')
        .ok_or_else(|| Error::Parse(format!("unbalanced sqrt in {t:?}")))?;
    let radicand: u64 = rest[..close]
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("radicand must be a non-negative integer in {t:?}")))?;
    let mut coef = match prefix {
        "" | "+" => BigRational::one(),
        "-" => -BigRational::one(),
        p => parse_rational(p)?,
    };
    let suffix = rest[close + 1..].trim();
    if let Some(den) = suffix.strip_prefix('/') {
        coef /= parse_rational(den)?;
    } else if let Some(mul) = suffix.strip_prefix('*') {
        coef *= parse_rational(mul)?;
    } else if !suffix.is_empty() {
        return Err(Error::Parse(format!("unexpected {suffix:?} in {t:?}")));
    }
    Ok(QuadIrrational::new(BigRational::zero(), coef, radicand))
}

impl FromStr for QuadIrrational {
    type Err = Error;

    /// Accepts rationals/decimals, `[c*]sqrt(r)[/q]` terms joined by `+`/`-`,
    /// an optional `(...)/q` wrapper, and the aliases `sqrt2`, `sqrt2m1`,
    /// `sqrt2h` (sqrt(2)/2) and `golden`.
    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let expanded = match s.as_str() {
            "sqrt2" => "sqrt(2)".to_string(),
            "sqrt2m1" => "sqrt(2)-1".to_string(),
            "sqrt2h" => "sqrt(2)/2".to_string(),
            "golden" | "phi" => "(1+sqrt(5))/2".to_string(),
            _ => s.clone(),
        };
        let (body, outer_den) = if let Some(inner) = expanded.strip_prefix('(') {
            match inner.rfind(")/") {
                Some(p) if !inner[..p].contains('(') || inner[..p].contains("sqrt(") => {
                    (inner[..p].to_string(), Some(parse_rational(&inner[p + 2..])?))
                }
                _ => (expanded.clone(), None),
            }
        } else {
            (expanded.clone(), None)
        };
        // split into signed terms, ignoring signs inside sqrt(...)
        let mut terms = Vec::new();
        let mut depth = 0;
        let mut start = 0;
        for (i, c) in body.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                '+' | '-' if depth == 0 && i > start && !body[..i].ends_with(['*', '/']) => {
                    terms.push(&body[start..i]);
                    start = i;
                }
                _ => {}
            }
        }
        terms.push(&body[start..]);
        let mut acc = QuadIrrational::from_rational(BigRational::zero());
        for t in terms {
            acc = acc.add(&parse_term(t)?)?;
        }
        if let Some(d) = outer_den {
            if d.is_zero() {
                return Err(Error::Parse("zero denominator".into()));
            }
            acc = acc.mul_rational(&d.recip());
        }
        Ok(acc)
    }
}

impl Serialize for QuadIrrational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for QuadIrrational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Int(i) => Ok(QuadIrrational::from_rational(BigRational::from_integer(i.into()))),
        }
    }
}
