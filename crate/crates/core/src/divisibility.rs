//! Polynomial divisibility over the integers.
//!
//! A family `p_1, ..., p_r` is simultaneously divisible by `q` when some `n`
//! makes every `p_i(n)` a multiple of `q`. Polynomial sequences
//! `(p_1(n), ..., p_r(n))` are van der Corput sequences exactly when this
//! holds for every `q`; since residues are `q`-periodic and witnesses for
//! coprime moduli combine by CRT, checking prime powers up to a bound is
//! the finite version of that criterion.
//!
//! The second half of the module reproduces a constructive argument for the
//! pair `p = (2 + X^2 + X^3)(1 + 2X)`, `q = X(1 + X)(1 + 2X)`: every linear
//! combination `a p + b q` is divisible by every `d`, although `p` and `q`
//! are not simultaneously divisible by 4. The construction lifts a 2-adic
//! root step by step and then glues it to the odd part of `d` with a Bézout
//! identity.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::sequences::primes::prime_powers_up_to;

/// Integer polynomial, coefficients in ascending degree, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    /// The monomial `X`.
    pub fn x() -> Self {
        Self::from_i64(&[0, 1])
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn constant_term(&self) -> BigInt {
        self.coeffs.first().cloned().unwrap_or_default()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_i64(&self, x: i64) -> BigInt {
        self.eval(&BigInt::from(x))
    }

    /// `self(x) mod q` in `[0, q)`.
    pub fn eval_mod(&self, x: &BigInt, q: &BigInt) -> BigInt {
        let xr = x.mod_floor(q);
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| (acc * &xr + c).mod_floor(q))
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = BigInt::zero();
        Self::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + other.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Residues of the coefficients modulo `q < 2^63`, ascending.
    fn residues_u128(&self, q: u64) -> Vec<u128> {
        let qb = BigInt::from(q);
        self.coeffs
            .iter()
            .map(|c| c.mod_floor(&qb).to_u128().expect("residue below q"))
            .collect()
    }
}

impl fmt::Display for IntPolynomial {
    /// Text format: comma-separated ascending coefficients.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.coeffs.iter().map(BigInt::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for IntPolynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<BigInt>()
                    .map_err(|_| Error::Parse(format!("bad polynomial coefficient {t:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(coeffs))
    }
}

impl Serialize for IntPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for IntPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Residue scans above this size are split across the rayon pool.
const PARALLEL_SCAN_THRESHOLD: u64 = 1 << 16;

/// Least `n` in `[0, q)` with `q | p_i(n)` for every `i`.
pub fn simultaneous_divisible(ps: &[IntPolynomial], q: u64) -> Result<Option<u64>> {
    if q == 0 {
        return Err(Error::InvalidParameter("modulus must be at least 1".into()));
    }
    if ps.is_empty() {
        return Err(Error::InvalidParameter("empty polynomial list".into()));
    }
    if q == 1 {
        return Ok(Some(0));
    }
    if q < (1 << 63) {
        // (q-1)^2 + q < 2^127, so Horner steps stay inside u128
        let residues: Vec<Vec<u128>> = ps.iter().map(|p| p.residues_u128(q)).collect();
        let qq = q as u128;
        let hits = |n: u64| {
            let x = n as u128;
            residues
                .iter()
                .all(|cs| cs.iter().rev().fold(0u128, |acc, &c| (acc * x + c) % qq) == 0)
        };
        let found = if q > PARALLEL_SCAN_THRESHOLD {
            (0..q).into_par_iter().find_first(|&n| hits(n))
        } else {
            (0..q).find(|&n| hits(n))
        };
        return Ok(found);
    }
    let qb = BigInt::from(q);
    Ok((0..q).find(|&n| {
        let x = BigInt::from(n);
        ps.iter().all(|p| p.eval_mod(&x, &qb).is_zero())
    }))
}

/// Outcome of [`divisible_up_to`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DivisibilityReport {
    pub bound: u64,
    pub all_pass: bool,
    pub first_failure: Option<u64>,
    /// Prime powers examined, ascending; ends at the failure when there is one.
    pub checked_prime_powers: Vec<u64>,
    /// `(prime power, least witness)` for every passing modulus.
    pub witnesses: Vec<(u64, u64)>,
    /// Constant terms all vanish, so `n = 0` works for every modulus.
    pub zero_constant_terms: bool,
}

/// Simultaneous divisibility by every prime power `<= bound`; composites
/// follow by CRT from their coprime prime-power factors.
pub fn divisible_up_to(ps: &[IntPolynomial], bound: u64) -> Result<DivisibilityReport> {
    if bound == 0 {
        return Err(Error::InvalidParameter("bound Q must be at least 1".into()));
    }
    if ps.is_empty() {
        return Err(Error::InvalidParameter("empty polynomial list".into()));
    }
    let mut checked = Vec::new();
    let mut witnesses = Vec::new();
    let mut first_failure = None;
    for pk in prime_powers_up_to(bound) {
        checked.push(pk);
        match simultaneous_divisible(ps, pk)? {
            Some(n) => witnesses.push((pk, n)),
            None => {
                first_failure = Some(pk);
                break;
            }
        }
    }
    Ok(DivisibilityReport {
        bound,
        all_pass: first_failure.is_none(),
        first_failure,
        checked_prime_powers: checked,
        witnesses,
        zero_constant_terms: has_zero_constant_terms(ps),
    })
}

/// Sufficient condition for simultaneous divisibility by every integer.
pub fn has_zero_constant_terms(ps: &[IntPolynomial]) -> bool {
    ps.iter().all(|p| p.constant_term().is_zero())
}

/// Chinese remaindering of `x ≡ r1 (m1)`, `x ≡ r2 (m2)` for coprime moduli;
/// returns the residue modulo `m1 m2`.
pub fn crt_pair(r1: &BigInt, m1: &BigInt, r2: &BigInt, m2: &BigInt) -> Option<BigInt> {
    let eg = m1.extended_gcd(m2);
    if !eg.gcd.is_one() {
        return None;
    }
    let m = m1 * m2;
    // x = r1 + m1 * ((r2 - r1) * inv(m1) mod m2)
    let t = ((r2 - r1) * &eg.x).mod_floor(m2);
    Some((r1 + m1 * t).mod_floor(&m))
}

/// `2`-adic valuation, `None` for zero.
fn two_adic_valuation(v: &BigInt) -> Option<u64> {
    v.trailing_zeros()
}

/// Which branch produced a 2-adic root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiftPath {
    /// `n <- n + 2^l`, `l` the current 2-adic valuation, with the
    /// valuation strictly increasing at every step.
    Recursion,
    /// The recursion invariant failed; exhaustive scan over `[0, 2^k)`.
    Scan,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LiftResult {
    pub n: Option<BigInt>,
    pub path: LiftPath,
    /// Successive iterates of the recursion (empty for the scan path).
    pub iterates: Vec<BigInt>,
}

/// Finds `n` in `[0, 2^k)` with `2^k | r(n)`.
///
/// Starting from `start` (which must make `r` even), repeatedly replaces `n`
/// by `n + 2^l` with `l` the exact power of two dividing `r(n)`. When a step
/// fails to raise the valuation the routine falls back to a full scan and
/// says so in the result.
pub fn lift_pow2(r: &IntPolynomial, k: u32, start: &BigInt) -> LiftResult {
    let modulus = BigInt::one() << k;
    if k == 0 {
        return LiftResult { n: Some(BigInt::zero()), path: LiftPath::Recursion, iterates: vec![start.clone()] };
    }
    let mut n = start.clone();
    let mut iterates = vec![n.clone()];
    let mut val = two_adic_valuation(&r.eval(&n));
    let recursion_ok = val.is_none_or(|v| v >= 1);
    if recursion_ok {
        loop {
            match val {
                None => break,
                Some(v) if v >= u64::from(k) => break,
                Some(v) => {
                    let next = &n + (BigInt::one() << v);
                    let next_val = two_adic_valuation(&r.eval(&next));
                    if next_val.is_some_and(|w| w <= v) {
                        return scan_pow2(r, k);
                    }
                    n = next;
                    val = next_val;
                    iterates.push(n.clone());
                }
            }
        }
        return LiftResult { n: Some(n.mod_floor(&modulus)), path: LiftPath::Recursion, iterates };
    }
    scan_pow2(r, k)
}

fn scan_pow2(r: &IntPolynomial, k: u32) -> LiftResult {
    let n = if k < 63 {
        simultaneous_divisible(std::slice::from_ref(r), 1u64 << k)
            .expect("valid modulus")
            .map(BigInt::from)
    } else {
        let m = BigInt::one() << k;
        let mut n = BigInt::zero();
        loop {
            if n >= m {
                break None;
            }
            if r.eval_mod(&n, &m).is_zero() {
                break Some(n);
            }
            n += 1;
        }
    };
    LiftResult { n, path: LiftPath::Scan, iterates: Vec::new() }
}


/// `p(X) = (2 + X^2 + X^3)(1 + 2X)`.
pub fn appendix_p() -> IntPolynomial {
    IntPolynomial::from_i64(&[2, 0, 1, 1]).mul(&IntPolynomial::from_i64(&[1, 2]))
}

/// `q(X) = X(1 + X)(1 + 2X)`.
pub fn appendix_q() -> IntPolynomial {
    IntPolynomial::from_i64(&[0, 1])
        .mul(&IntPolynomial::from_i64(&[1, 1]))
        .mul(&IntPolynomial::from_i64(&[1, 2]))
}

/// Parity case of the 2-adic lifting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParityCase {
    /// Exactly one of the reduced `a`, `b` is even; iterates stay odd, base `n_1 = 1`.
    OneEven,
    /// Both reduced coefficients odd; iterates stay even, base `n_1 = 2`.
    BothOdd,
    /// `a = b = 0`.
    Degenerate,
}

/// Trace of [`appendix_construct`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AppendixConstruction {
    pub a: i64,
    pub b: i64,
    pub d: u64,
    /// `d = 2^two_power * odd_part`.
    pub two_power: u32,
    pub odd_part: u64,
    pub case: ParityCase,
    /// `n_1, n_2, ..., n_k` of the 2-adic lifting.
    pub lifting: Vec<BigInt>,
    /// Bézout coefficients with `2 n_k + 1 = -u 2^(k+1) + v * odd_part`.
    pub bezout_u: BigInt,
    pub bezout_v: BigInt,
    /// Final answer reduced modulo `d`.
    pub n: BigInt,
}

/// Returns `n` with `d | a p(n) + b q(n)` for the fixed pair `p`, `q`, built
/// by 2-adic lifting plus a Bézout step, and checked by exact evaluation.
pub fn appendix_construct(a: i64, b: i64, d: u64) -> Result<AppendixConstruction> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be at least 1".into()));
    }
    let p = appendix_p();
    let q = appendix_q();
    let combo = |a: &BigInt, b: &BigInt| p.scale(a).add(&q.scale(b));
    let target = combo(&BigInt::from(a), &BigInt::from(b));

    let two_power = d.trailing_zeros();
    let odd_part = d >> two_power;
    let k = two_power;

    let g = a.gcd(&b);
    let (case, lifting) = if g == 0 {
        (ParityCase::Degenerate, vec![BigInt::zero()])
    } else {
        // divisibility of (a/g) p + (b/g) q implies that of a p + b q
        let (ar, br) = (a / g, b / g);
        let r = combo(&BigInt::from(ar), &BigInt::from(br));
        let (case, base) = if ar % 2 == 0 || br % 2 == 0 {
            (ParityCase::OneEven, BigInt::one())
        } else {
            (ParityCase::BothOdd, BigInt::from(2))
        };
        let mut lifting = Vec::new();
        let mut n = base;
        if k == 0 {
            lifting.push(BigInt::zero());
        } else {
            lifting.push(n.clone());
            // invariant: 2^j | r(n_j), n_j keeps the parity of the base
            for j in 1..k {
                let value = r.eval(&n);
                match two_adic_valuation(&value) {
                    None => {}
                    Some(l) if l > u64::from(j) => {}
                    Some(l) => {
                        if l < u64::from(j) {
                            return Err(Error::Verification(format!(
                                "lifting invariant broken at step {j}: valuation {l}"
                            )));
                        }
                        n += BigInt::one() << l;
                    }
                }
                lifting.push(n.clone());
                let check = r.eval(&n);
                if !check.is_zero() && two_adic_valuation(&check).is_some_and(|v| v < u64::from(j + 1)) {
                    return Err(Error::Verification(format!("2^{} does not divide r(n_{})", j + 1, j + 1)));
                }
            }
        }
        (case, lifting)
    };
    let n_k = lifting.last().cloned().unwrap_or_default();

    // 2 n_k + 1 = -u 2^(k+1) + v alpha
    let pow: BigInt = BigInt::one() << (k + 1);
    let alpha = BigInt::from(odd_part);
    let eg: num_integer::ExtendedGcd<BigInt> = pow.extended_gcd(&alpha);
    debug_assert!(eg.gcd.is_one());
    let m = BigInt::from(2) * &n_k + 1;
    let prod: BigInt = &eg.x * &m;
    let bezout_u = -prod;
    let bezout_v: BigInt = &eg.y * &m;
    debug_assert_eq!(-(&bezout_u) * &pow + &bezout_v * &alpha, m);

    let raw = &n_k + (BigInt::one() << k) * &bezout_u;
    let dd = BigInt::from(d);
    let n = raw.mod_floor(&dd);
    if !target.eval_mod(&n, &dd).is_zero() {
        return Err(Error::Verification(format!(
            "{d} does not divide {a} p(n) + {b} q(n) at n = {n}"
        )));
    }
    Ok(AppendixConstruction { a, b, d, two_power, odd_part, case, lifting, bezout_u, bezout_v, n })
}

/// `p(0..m)` and `q(0..m)` reduced modulo `m`.
pub fn appendix_residue_table(m: u64) -> (Vec<u64>, Vec<u64>) {
    let mb = BigInt::from(m);
    let row = |poly: &IntPolynomial| {
        (0..m)
            .map(|n| poly.eval_mod(&BigInt::from(n), &mb).to_u64().expect("residue"))
            .collect()
    };
    (row(&appendix_p()), row(&appendix_q()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(s: &str) -> IntPolynomial {
        s.parse().unwrap()
    }

    // brute-force oracle over i64 arithmetic
    fn oracle_simultaneous(ps: &[IntPolynomial], q: u64) -> Option<u64> {
        (0..q).find(|&n| ps.iter().all(|p| (p.eval_i64(n as i64) % BigInt::from(q)).is_zero()))
    }

    #[test]
    fn parse_and_display() {
        let p = poly("2,0,1,1");
        assert_eq!(p.degree(), Some(3));
        assert_eq!(p.to_string(), "2,0,1,1");
        assert_eq!(poly("0,0,0"), IntPolynomial::zero());
        assert!("1,x".parse::<IntPolynomial>().is_err());
    }

    #[test]
    fn simultaneous_examples() {
        assert_eq!(simultaneous_divisible(&[IntPolynomial::x()], 7).unwrap(), Some(0));
        assert_eq!(simultaneous_divisible(&[poly("1,2")], 2).unwrap(), None);
        assert_eq!(simultaneous_divisible(&[appendix_p(), appendix_q()], 4).unwrap(), None);
        assert_eq!(simultaneous_divisible(&[poly("0,1"), poly("1,1")], 2).unwrap(), None);
        assert!(simultaneous_divisible(&[], 3).is_err());
    }

    #[test]
    fn appendix_residues_mod_4() {
        let (p, q) = appendix_residue_table(4);
        assert_eq!(p, vec![2, 0, 2, 2]);
        assert_eq!(q, vec![0, 2, 2, 0]);
    }

    #[test]
    fn divisible_up_to_examples() {
        let r = divisible_up_to(&[poly("0,0,1"), poly("0,0,0,1")], 1000).unwrap();
        assert!(r.all_pass && r.zero_constant_terms);
        assert_eq!(r.first_failure, None);

        let r = divisible_up_to(&[appendix_p(), appendix_q()], 10).unwrap();
        assert_eq!(r.first_failure, Some(4));
        assert_eq!(r.checked_prime_powers, vec![2, 3, 4]);

        // X^2 - 2: 2 is not a square mod 3, so the scan stops at 3
        let x2m2 = [poly("-2,0,1")];
        let oracle_first = prime_powers_up_to(16)
            .into_iter()
            .find(|&pk| oracle_simultaneous(&x2m2, pk).is_none());
        assert_eq!(oracle_first, Some(3));
        assert_eq!(divisible_up_to(&x2m2, 16).unwrap().first_failure, oracle_first);
        // squares mod 8 are {0, 1, 4}
        assert_eq!(simultaneous_divisible(&x2m2, 8).unwrap(), None);
    }

    #[test]
    fn lift_examples() {
        let x = IntPolynomial::x();
        let r = lift_pow2(&x, 10, &BigInt::zero());
        assert_eq!(r.n, Some(BigInt::zero()));
        assert_eq!(r.path, LiftPath::Recursion);

        let odd = poly("1,2");
        let r = lift_pow2(&odd, 1, &BigInt::zero());
        assert_eq!(r.n, None);
        assert_eq!(r.path, LiftPath::Scan);

        let combo = appendix_p().add(&appendix_q());
        let r = lift_pow2(&combo, 8, &BigInt::from(2));
        let n = r.n.clone().expect("root mod 256");
        assert!(combo.eval_mod(&n, &BigInt::from(256)).is_zero());
        assert_eq!(r.path, LiftPath::Recursion);
        assert!(oracle_simultaneous(&[combo], 256).is_some());
    }

    #[test]
    fn appendix_construct_examples() {
        let c = appendix_construct(1, 0, 4).unwrap();
        assert!(appendix_p().eval_mod(&c.n, &BigInt::from(4)).is_zero());
        assert_eq!(c.n.mod_floor(&BigInt::from(4)), BigInt::one());

        let c = appendix_construct(0, 1, 32).unwrap();
        assert_eq!(c.lifting[0], BigInt::one());
        assert!(appendix_q().eval_mod(&c.n, &BigInt::from(32)).is_zero());
        assert!(oracle_simultaneous(&[appendix_q()], 32).is_some());

        let c = appendix_construct(3, 5, 24).unwrap();
        assert_eq!(c.case, ParityCase::BothOdd);
        assert_eq!(c.two_power, 3);
        assert_eq!(c.odd_part, 3);
    }

    #[test]
    fn crt_combination() {
        let r = crt_pair(&BigInt::from(2), &BigInt::from(3), &BigInt::from(3), &BigInt::from(5)).unwrap();
        assert_eq!(r, BigInt::from(8));
        assert!(crt_pair(&BigInt::from(1), &BigInt::from(4), &BigInt::from(1), &BigInt::from(6)).is_none());
    }
}
