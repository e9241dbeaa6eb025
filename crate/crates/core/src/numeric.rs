//! Small numeric helpers shared by every module: the character `e(x)`,
//! phases at rational points, and compensated summation.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// `e(x) = exp(2 pi i x)`, with `x` reduced to `[-1/2, 1/2]` first.
pub fn e(x: f64) -> Complex64 {
    let r = x - x.round();
    let (s, c) = (TAU * r).sin_cos();
    Complex64::new(c, s)
}

/// `e(num/den)` for an integer phase. The residue is reduced symmetrically
/// so that `e(-p/q)` is bitwise the conjugate of `e(p/q)`; quarter turns
/// are exact.
pub fn e_ratio(num: &BigInt, den: &BigInt) -> Complex64 {
    assert!(den.is_positive(), "phase denominator must be positive");
    let mut r = num.mod_floor(den);
    // symmetric residue in (-den/2, den/2]
    if &r * 2 > *den {
        r -= den;
    }
    if r.is_zero() {
        return Complex64::new(1.0, 0.0);
    }
    let neg = r.is_negative();
    let a = r.abs();
    if &a * 2 == *den {
        return Complex64::new(-1.0, 0.0);
    }
    if &a * 4 == *den {
        return Complex64::new(0.0, if neg { -1.0 } else { 1.0 });
    }
    let frac = BigRational::new(a, den.clone()).to_f64().unwrap_or(0.0);
    let (s, c) = (TAU * frac).sin_cos();
    Complex64::new(c, if neg { -s } else { s })
}

/// `e(q)` for a rational `q`.
pub fn e_rational(q: &BigRational) -> Complex64 {
    e_ratio(q.numer(), q.denom())
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Complex version of [`KahanSum`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexSum {
    re: KahanSum,
    im: KahanSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl FromIterator<Complex64> for ComplexSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut s = ComplexSum::new();
        for z in iter {
            s.add(z);
        }
        s
    }
}

/// Relative slack comparison `lhs <= rhs (1 + rel) + abs`.
pub fn le_with_slack(lhs: f64, rhs: f64, rel: f64, abs: f64) -> bool {
    lhs <= rhs + rel * rhs.abs().max(lhs.abs()) + abs
}
