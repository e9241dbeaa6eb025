//! Certified floors of `b n^c + a log n`.
//!
//! Every ingredient is enclosed in a rational interval whose width shrinks
//! like `2^-bits`; the floor is returned only once both ends of the
//! enclosure agree, doubling the precision up to a cap otherwise.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{format_rational, QuadIrrational};

/// Closed rational interval.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn point(x: BigRational) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    fn add(&self, other: &Self) -> Self {
        Self { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    fn mul(&self, other: &Self) -> Self {
        let p = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = p.iter().min().expect("four products").clone();
        let hi = p.iter().max().expect("four products").clone();
        Self { lo, hi }
    }

    /// `floor` of every point, when it is the same across the interval.
    pub fn common_floor(&self) -> Option<BigInt> {
        let a = self.lo.floor().to_integer();
        let b = self.hi.floor().to_integer();
        (a == b).then_some(a)
    }
}

fn dyadic(num: BigInt, bits: u32) -> BigRational {
    BigRational::new(num, BigInt::one() << bits)
}

/// Enclosure of `n^(p/q)` for `n >= 1`, `q >= 1`.
pub fn rational_power(n: &BigInt, p: u32, q: u32, bits: u32) -> Interval {
    let radicand = num_traits::pow(n.clone(), p as usize) << (bits as usize * q as usize);
    let root = radicand.nth_root(q);
    if num_traits::pow(root.clone(), q as usize) == radicand {
        Interval::point(dyadic(root, bits))
    } else {
        Interval { lo: dyadic(root.clone(), bits), hi: dyadic(root + 1, bits) }
    }
}

/// `2^bits * atanh(num/den)` truncated, and a bound on the total error in
/// units of `2^-bits`. Requires `0 <= num/den <= 1/3`.
fn atanh_fixed(num: &BigInt, den: &BigInt, bits: u32) -> (BigInt, BigInt) {
    let scale = BigInt::one() << bits;
    let z2_num = num * num;
    let z2_den = den * den;
    let mut power = (&scale * num).div_floor(den);
    let mut sum = BigInt::zero();
    let mut err = BigInt::zero();
    let mut j: u64 = 0;
    while !power.is_zero() {
        sum += power.div_floor(&BigInt::from(2 * j + 1));
        // the computed power is short by at most j + 1 units, the division by one more
        err += BigInt::from(j + 2);
        power = (&power * &z2_num).div_floor(&z2_den);
        j += 1;
    }
    // remaining terms are bounded by the last truncation error times z^2/(1-z^2) < 1/8
    err += BigInt::from(j + 2);
    (sum, err)
}

/// Enclosure of `ln n` for `n >= 1`.
pub fn ln_enclosure(n: &BigInt, bits: u32) -> Interval {
    assert!(n.is_positive(), "logarithm of a non-positive integer");
    if n.is_one() {
        return Interval::point(BigRational::zero());
    }
    let work = bits + 8;
    let k = n.bits() - 1;
    let pow2 = BigInt::one() << k;
    // ln n = k ln 2 + 2 atanh((n - 2^k) / (n + 2^k))
    let (ln2_half, e2) = atanh_fixed(&BigInt::one(), &BigInt::from(3), work);
    let (rest_half, e3) = atanh_fixed(&(n - &pow2), &(n + &pow2), work);
    let kb = BigInt::from(k);
    let centre = (&ln2_half * &kb + &rest_half) * 2;
    let err = (e2 * &kb + e3) * 2;
    Interval { lo: dyadic(&centre - &err, work), hi: dyadic(centre + err + 1, work) }
}

/// Floor-power parameters: `floor(b n^c + a log n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FloorPower {
    pub b: QuadIrrational,
    pub c: BigRational,
    pub log_coef: BigRational,
    pub max_bits: u32,
}

/// Starting precision of the refinement loop.
const START_BITS: u32 = 64;
/// Default precision cap.
pub const DEFAULT_MAX_BITS: u32 = 4096;

impl FloorPower {
    pub fn new(b: QuadIrrational, c: BigRational, log_coef: BigRational) -> Result<Self> {
        if c <= BigRational::one() {
            return Err(Error::InvalidParameter(format!("floor-power exponent c = {} must exceed 1", format_rational(&c))));
        }
        let p = c.numer();
        let q = c.denom();
        if p.bits() > 16 || q.bits() > 16 {
            return Err(Error::InvalidParameter("exponent numerator and denominator must be below 2^16".into()));
        }
        Ok(Self { b, c, log_coef, max_bits: DEFAULT_MAX_BITS })
    }

    fn enclosure(&self, n: &BigInt, bits: u32) -> Interval {
        let p = u32::try_from(self.c.numer()).expect("validated exponent");
        let q = u32::try_from(self.c.denom()).expect("validated exponent");
        let (blo, bhi) = self.b.enclosure(bits);
        let b = Interval { lo: blo, hi: bhi };
        let mut v = b.mul(&rational_power(n, p, q, bits));
        if !self.log_coef.is_zero() {
            v = v.add(&Interval::point(self.log_coef.clone()).mul(&ln_enclosure(n, bits)));
        }
        v
    }

    /// Whether `b n^(p/q)` equals the integer `m` exactly; only meaningful
    /// when the logarithmic term vanishes. Uses `b^q n^p = m^q` in `Q(sqrt k)`
    /// plus a sign check.
    fn equals_integer(&self, n: &BigInt, m: &BigInt) -> bool {
        let p = u32::try_from(self.c.numer()).expect("validated exponent");
        let q = u32::try_from(self.c.denom()).expect("validated exponent");
        let zero = BigRational::zero();
        let b_sign = self.b.cmp_rational(&zero);
        let m_sign = m.cmp(&BigInt::zero());
        if b_sign != m_sign {
            return false;
        }
        if b_sign == Ordering::Equal {
            return true;
        }
        let (s, k) = self.b.surd();
        let k = BigRational::from_integer(k.into());
        let base = (self.b.rational_part().clone(), s.clone());
        let mut acc = (BigRational::one(), BigRational::zero());
        for _ in 0..q {
            acc = (&acc.0 * &base.0 + &acc.1 * &base.1 * &k, &acc.0 * &base.1 + &acc.1 * &base.0);
        }
        let np = BigRational::from_integer(num_traits::pow(n.clone(), p as usize));
        acc.1.is_zero() && acc.0 * np == BigRational::from_integer(num_traits::pow(m.clone(), q as usize))
    }

    /// `floor(b n^c + a log n)` for `n >= 1`, or an error when the cap is hit.
    pub fn term(&self, n: u64) -> Result<BigInt> {
        if n == 0 {
            return Err(Error::InvalidParameter("floor-power index starts at 1".into()));
        }
        let nb = BigInt::from(n);
        let mut bits = START_BITS;
        loop {
            let iv = self.enclosure(&nb, bits);
            if let Some(f) = iv.common_floor() {
                return Ok(f);
            }
            // an algebraic value can be an integer; log n is transcendental for n >= 2
            if self.log_coef.is_zero() || n == 1 {
                let m = iv.hi.floor().to_integer();
                if iv.lo.floor().to_integer() + 1 == m && self.equals_integer(&nb, &m) {
                    return Ok(m);
                }
            }
            if bits >= self.max_bits {
                return Err(Error::FloorUndecidable { what: format!("b n^c + a log n at n = {n}"), bits });
            }
            bits = (bits * 2).min(self.max_bits);
        }
    }
}
