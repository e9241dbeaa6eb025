//! Random block sequences built from i.i.d. draws of a torus measure.
//!
//! The index `n >= 1` is written uniquely as `n = m^2 + r` with
//! `0 <= r <= 2m`, and `theta_m` is drawn once per block. Mode `Y` emits
//! `e(r theta_m)`, whose Cesàro mean tends to `P(theta = 0)`; mode `Z`
//! repeats `e(h theta_m)` over the block, whose mean tends to
//! `sigma^(h)`. In dimension 2 the blocks are indexed by `(m_1, m_2)` and
//! the phases add.
//!
//! Randomness: `ChaCha8Rng::seed_from_u64(seed)` with stream `m` for block
//! `m` (stream `m_1 + (m_2 << 32)` in dimension 2), one draw per block, so
//! any block can be regenerated independently of the others.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{IndexBox, MultiIndex};
use crate::measures::{AtomicTorusMeasure, Point};
use crate::numeric::{e, e_ratio};

/// `n = m^2 + r` with `0 <= r <= 2m`, for `n >= 1`.
pub fn block_decompose(n: u64) -> (u64, u64) {
    assert!(n >= 1, "block index starts at 1");
    let m = n.sqrt();
    (m, n - m * m)
}

/// Integer alias table over exact weights with a common denominator.
#[derive(Clone, Debug)]
pub struct AliasTable {
    threshold: Vec<u64>,
    alias: Vec<usize>,
    scale: u64,
}

impl AliasTable {
    /// `weights[i] / total` with integer weights; ties resolve by index order.
    pub fn new(weights: &[u64]) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::InvalidParameter("alias table needs at least one weight".into()));
        }
        let total: u128 = weights.iter().map(|&w| u128::from(w)).sum();
        if total == 0 || total > u128::from(u64::MAX / n as u64) {
            return Err(Error::InvalidParameter("alias weights out of range".into()));
        }
        let scale = total as u64;
        // column i holds mass weights[i] * n against a capacity of `scale`
        let mut mass: Vec<u128> = weights.iter().map(|&w| u128::from(w) * n as u128).collect();
        let cap = u128::from(scale);
        let mut small: Vec<usize> = Vec::new();
        let mut large: Vec<usize> = Vec::new();
        for (i, &m) in mass.iter().enumerate().rev() {
            if m < cap {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        let mut threshold = vec![scale; n];
        let mut alias: Vec<usize> = (0..n).collect();
        while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
            threshold[s] = mass[s] as u64;
            alias[s] = l;
            mass[l] -= cap - mass[s];
            if mass[l] < cap {
                large.pop();
                small.push(l);
            }
        }
        Ok(Self { threshold, alias, scale })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let col = rng.random_range(0..self.threshold.len());
        if rng.random_range(0..self.scale) < self.threshold[col] {
            col
        } else {
            self.alias[col]
        }
    }

    /// Probability of outcome `i` implied by the table, as `(num, den)`.
    pub fn probability(&self, i: usize) -> (u128, u128) {
        let n = self.threshold.len() as u128;
        let scale = u128::from(self.scale);
        let mut num = u128::from(self.threshold[i]);
        for (c, &a) in self.alias.iter().enumerate() {
            if a == i && c != i {
                num += scale - u128::from(self.threshold[c]);
            }
        }
        (num, n * scale)
    }
}

/// Integer weights for the alias method: exact rationals over their common
/// denominator, or floats on a `2^53` grid.
fn integer_weights(measure: &AtomicTorusMeasure) -> Result<Vec<u64>> {
    if let Some(w) = measure.exact_weights() {
        let l = w.iter().fold(BigInt::from(1), |acc, x| acc.lcm(x.denom()));
        let scaled: Option<Vec<u64>> = w.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer().to_u64()).collect();
        return scaled.ok_or_else(|| Error::InvalidParameter("weight denominators too large for sampling".into()));
    }
    let scale = (1u64 << 53) as f64;
    Ok(measure.weights().iter().map(|&w| (w * scale).round().max(1.0) as u64).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum BlockMode {
    /// `e(r . theta_m)`.
    Values,
    /// `e(h . theta_m)` repeated over each block.
    Plain { h: i64 },
}

#[derive(Clone, Debug)]
pub struct BlockSequenceParams {
    pub measure: AtomicTorusMeasure,
    pub seed: u64,
    pub mode: BlockMode,
}

/// Draws of `theta_m` from a probability measure, one ChaCha stream per block.
pub struct BlockSampler {
    measure: AtomicTorusMeasure,
    table: AliasTable,
    seed: u64,
}

impl BlockSampler {
    pub fn new(measure: &AtomicTorusMeasure, seed: u64) -> Result<Self> {
        measure.ensure_probability()?;
        let table = AliasTable::new(&integer_weights(measure)?)?;
        Ok(Self { measure: measure.clone(), table, seed })
    }

    fn draw(&self, stream: u64) -> &Point {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        &self.measure.atoms()[self.table.sample(&mut rng)]
    }

    /// Atom drawn for block `m` (1-d).
    pub fn theta(&self, m: u64) -> &Point {
        self.draw(m)
    }

    /// Atom drawn for block `(m1, m2)`.
    pub fn theta2(&self, m1: u64, m2: u64) -> &Point {
        self.draw(m1 + (m2 << 32))
    }
}

/// `e(sum_i k_i x_i)` with exact phases at rational points.
fn phase(point: &Point, k: &[i64]) -> Complex64 {
    match point {
        Point::Rational(c) => {
            let phase = c
                .iter()
                .zip(k)
                .fold(BigRational::zero(), |acc, (x, &r)| acc + x * BigRational::from_integer(r.into()));
            e_ratio(phase.numer(), phase.denom())
        }
        Point::Float(c) => e(c.iter().zip(k).map(|(&x, &r)| crate::numeric::frac(x * r as f64)).sum()),
    }
}

/// `Y_1 .. Y_N` (or `Z_1 .. Z_N`) for a measure on `T`.
pub fn block_sequence(params: &BlockSequenceParams, n_terms: u64) -> Result<Vec<Complex64>> {
    if params.measure.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: params.measure.dim() });
    }
    if n_terms == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let sampler = BlockSampler::new(&params.measure, params.seed)?;
    let mut out = Vec::with_capacity(n_terms as usize);
    let mut m = 1u64;
    while out.len() < n_terms as usize {
        let theta = sampler.theta(m);
        let remaining = n_terms as usize - out.len();
        let len = (2 * m + 1) as usize;
        match params.mode {
            BlockMode::Values => {
                for r in 0..len.min(remaining) {
                    out.push(phase(theta, &[r as i64]));
                }
            }
            BlockMode::Plain { h } => {
                let z = phase(theta, &[h]);
                out.extend(std::iter::repeat_n(z, len.min(remaining)));
            }
        }
        m += 1;
    }
    Ok(out)
}

/// Values on the box `0 < n <= N` for a measure on `T^2`, in lexicographic order.
pub fn block_sequence_2d(params: &BlockSequenceParams, n_max: &MultiIndex) -> Result<Vec<Complex64>> {
    if params.measure.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: params.measure.dim() });
    }
    n_max.check_dim(2)?;
    let sampler = BlockSampler::new(&params.measure, params.seed)?;
    let window = IndexBox::upto(n_max)?;
    Ok(window
        .points()
        .map(|n| {
            let (m1, r1) = block_decompose(n.coords()[0] as u64);
            let (m2, r2) = block_decompose(n.coords()[1] as u64);
            let theta = sampler.theta2(m1, m2);
            match params.mode {
                BlockMode::Values => phase(theta, &[r1 as i64, r2 as i64]),
                BlockMode::Plain { h } => phase(theta, &[h, h]),
            }
        })
        .collect())
}
