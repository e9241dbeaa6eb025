//! Finite-window averages of sampled families.
//!
//! Everything here is a number attached to an explicit window; no function
//! claims anything about limits. Sums run in lexicographic order with
//! compensated accumulation so results are reproducible bit for bit.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{IndexBox, MultiIndex};
use crate::numeric::{e, ComplexSum, KahanSum};

/// Values of a family `u_n` on a box: complex scalars, or real vectors of a
/// fixed length for the Hilbert-space form of the inequalities.
#[derive(Clone, Debug, PartialEq)]
pub enum Values {
    Scalar(Vec<Complex64>),
    Vector { len: usize, data: Vec<f64> },
}

/// One value of a family.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum FamilyValue {
    Scalar([f64; 2]),
    Vector(Vec<f64>),
}

impl FamilyValue {
    pub fn norm(&self) -> f64 {
        match self {
            FamilyValue::Scalar([re, im]) => re.hypot(*im),
            FamilyValue::Vector(v) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    pub fn as_complex(&self) -> Option<Complex64> {
        match self {
            FamilyValue::Scalar([re, im]) => Some(Complex64::new(*re, *im)),
            FamilyValue::Vector(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledFamily {
    domain: IndexBox,
    values: Values,
    norm_bound: f64,
}

impl SampledFamily {
    /// Scalar values listed in the box's lexicographic order.
    pub fn scalar(domain: IndexBox, values: Vec<Complex64>) -> Result<Self> {
        if values.len() as u64 != domain.volume() {
            return Err(Error::InvalidParameter(format!(
                "{} values for a box of volume {}",
                values.len(),
                domain.volume()
            )));
        }
        let norm_bound = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        Ok(Self { domain, values: Values::Scalar(values), norm_bound })
    }

    /// Real vectors of length `len`, concatenated in lexicographic order.
    pub fn vector(domain: IndexBox, len: usize, data: Vec<f64>) -> Result<Self> {
        if len == 0 || data.len() as u64 != domain.volume() * len as u64 {
            return Err(Error::InvalidParameter(format!(
                "{} reals do not fill a box of volume {} with vectors of length {len}",
                data.len(),
                domain.volume()
            )));
        }
        let norm_bound = data
            .chunks(len)
            .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        Ok(Self { domain, values: Values::Vector { len, data }, norm_bound })
    }

    pub fn from_fn(domain: IndexBox, f: impl Fn(&MultiIndex) -> Complex64) -> Self {
        let values: Vec<Complex64> = domain.points().map(|n| f(&n)).collect();
        Self::scalar(domain, values).expect("one value per point")
    }

    /// `u_n = e(x_n)` for `n = 1 .. len`.
    pub fn from_phases(xs: &[f64]) -> Self {
        let domain = IndexBox::upto(&MultiIndex::scalar(xs.len() as i64)).expect("non-negative length");
        Self::scalar(domain, xs.iter().map(|&x| e(x)).collect()).expect("one value per point")
    }

    /// Values `u_1 .. u_len` on `(0, len]`.
    pub fn from_sequence(values: Vec<Complex64>) -> Self {
        let domain = IndexBox::upto(&MultiIndex::scalar(values.len() as i64)).expect("non-negative length");
        Self::scalar(domain, values).expect("one value per point")
    }

    pub fn domain(&self) -> &IndexBox {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// `sup |u_n|`.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn is_vector(&self) -> bool {
        matches!(self.values, Values::Vector { .. })
    }

    pub fn values(&self) -> &Values {
        &self.values
    }

    pub fn get(&self, n: &MultiIndex) -> Option<FamilyValue> {
        let i = self.domain.offset(n)?;
        Some(self.value_at(i))
    }

    fn value_at(&self, i: usize) -> FamilyValue {
        match &self.values {
            Values::Scalar(v) => FamilyValue::Scalar([v[i].re, v[i].im]),
            Values::Vector { len, data } => FamilyValue::Vector(data[i * len..(i + 1) * len].to_vec()),
        }
    }

    /// `<u_a, u_b>`, with `u_a conj(u_b)` for scalars.
    fn inner(&self, a: usize, b: usize) -> Complex64 {
        match &self.values {
            Values::Scalar(v) => v[a] * v[b].conj(),
            Values::Vector { len, data } => {
                let x = &data[a * len..(a + 1) * len];
                let y = &data[b * len..(b + 1) * len];
                Complex64::new(x.iter().zip(y).map(|(p, q)| p * q).sum(), 0.0)
            }
        }
    }

    /// Same family multiplied by a constant (scalar families only).
    pub fn scaled(&self, c: Complex64) -> Result<Self> {
        match &self.values {
            Values::Scalar(v) => Self::scalar(self.domain.clone(), v.iter().map(|z| z * c).collect()),
            Values::Vector { .. } => Err(Error::Unsupported("complex scaling of a vector family".into())),
        }
    }

    fn require(&self, window: &IndexBox) -> Result<()> {
        window.lo().check_dim(self.dim())?;
        if window.is_empty() || self.domain.contains_box(window) {
            return Ok(());
        }
        let corner = window.points().find(|p| !self.domain.contains(p)).unwrap_or_else(|| window.lo().clone());
        Err(Error::OutOfDomain(corner))
    }

    /// `sum_{n in window} u_n`: complex for scalars, componentwise for vectors.
    pub fn window_sum(&self, window: &IndexBox) -> Result<FamilyValue> {
        self.require(window)?;
        match &self.values {
            Values::Scalar(v) => {
                let s = window.points().map(|n| v[self.domain.offset(&n).expect("inside")]).collect::<ComplexSum>();
                let z = s.value();
                Ok(FamilyValue::Scalar([z.re, z.im]))
            }
            Values::Vector { len, data } => {
                let mut acc = vec![KahanSum::new(); *len];
                for n in window.points() {
                    let i = self.domain.offset(&n).expect("inside");
                    for (a, x) in acc.iter_mut().zip(&data[i * len..(i + 1) * len]) {
                        a.add(*x);
                    }
                }
                Ok(FamilyValue::Vector(acc.iter().map(KahanSum::value).collect()))
            }
        }
    }
}

/// Average of `u` over `window`.
pub fn cesaro_average(u: &SampledFamily, window: &IndexBox) -> Result<FamilyValue> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let vol = window.volume() as f64;
    Ok(match u.window_sum(window)? {
        FamilyValue::Scalar([re, im]) => FamilyValue::Scalar([re / vol, im / vol]),
        FamilyValue::Vector(v) => FamilyValue::Vector(v.into_iter().map(|x| x / vol).collect()),
    })
}

/// `gamma(N, h) = sum over 0 < n <= N with 0 < n + h <= N of <u_{n+h}, u_n>`.
pub fn correlation_gamma(u: &SampledFamily, n_max: &MultiIndex, h: &MultiIndex) -> Result<Complex64> {
    n_max.check_dim(u.dim())?;
    h.check_dim(u.dim())?;
    let window = IndexBox::upto(n_max)?;
    u.require(&window)?;
    let overlap = window.intersect(&window.shift(&-h));
    let mut s = ComplexSum::new();
    for n in overlap.points() {
        let a = u.domain.offset(&(&n + h)).expect("inside");
        let b = u.domain.offset(&n).expect("inside");
        s.add(u.inner(a, b));
    }
    Ok(s.value())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeylRow {
    pub k: i64,
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeylReport {
    pub window_n: usize,
    pub kmax: u32,
    pub tol: f64,
    pub rows: Vec<WeylRow>,
    pub window_sup: f64,
    /// `window_sup <= tol` at this `N`; advisory only.
    pub window_below_tol: bool,
}

/// `|(1/N) sum_n e(k x_n)|` for `1 <= |k| <= kmax`.
pub fn weyl_test(xs: &[f64], kmax: u32, tol: f64) -> Result<WeylReport> {
    if xs.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if kmax == 0 {
        return Err(Error::InvalidParameter("kmax must be at least 1".into()));
    }
    let ks: Vec<i64> = (-(kmax as i64)..=kmax as i64).filter(|&k| k != 0).collect();
    let n = xs.len() as f64;
    let rows: Vec<WeylRow> = ks
        .par_iter()
        .map(|&k| {
            let s = xs.iter().map(|&x| e(crate::numeric::frac(k as f64 * x))).collect::<ComplexSum>().value() / n;
            WeylRow { k, re: s.re, im: s.im, modulus: s.norm() }
        })
        .collect();
    let sup = rows.iter().map(|r| r.modulus).fold(0.0, f64::max);
    Ok(WeylReport { window_n: xs.len(), kmax, tol, rows, window_sup: sup, window_below_tol: sup <= tol })
}

/// Star discrepancy `max_i max(i/N - s_i, s_i - (i-1)/N)` of the sorted sample.
pub fn discrepancy_star(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let mut s: Vec<f64> = xs.iter().map(|&x| crate::numeric::frac(x)).collect();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    Ok(s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let i = i as f64;
            ((i + 1.0) / n - x).max(x - i / n)
        })
        .fold(0.0, f64::max))
}

/// `|d|^2` in the Euclidean norm, exact.
fn norm2(d: &MultiIndex) -> i128 {
    d.coords().iter().map(|&x| i128::from(x) * i128::from(x)).sum()
}

/// Checks the convention for `d_m`: pairwise distinct, `|d_m|` nondecreasing.
pub fn check_ordering(d: &[MultiIndex]) -> Result<()> {
    for (i, w) in d.windows(2).enumerate() {
        if norm2(&w[1]) < norm2(&w[0]) {
            return Err(Error::BadOrdering { index: i + 2, reason: format!("|{}| < |{}|", w[1], w[0]) });
        }
    }
    let mut sorted: Vec<&MultiIndex> = d.iter().collect();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        let idx = d.iter().rposition(|x| x == w[0]).map_or(0, |p| p + 1);
        return Err(Error::BadOrdering { index: idx, reason: format!("{} repeated", w[0]) });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaTailReport {
    pub window_n: MultiIndex,
    pub window_m: usize,
    pub d: Vec<MultiIndex>,
    /// `gamma(N, d_m) / vol(N)` as `[re, im]`.
    pub gamma_hat: Vec<[f64; 2]>,
    /// `max_{j >= m} |gamma_hat(d_j)|` within the window.
    pub suffix_sup: Vec<f64>,
    /// `(1/m) sum_{j <= m} |gamma_hat(d_j)|`.
    pub cesaro_abs: Vec<f64>,
    /// `suffix_sup` from the middle of the window on.
    pub window_tail_sup: f64,
    pub window_cesaro_abs: f64,
    pub window_mean: [f64; 2],
}

/// Normalised correlations of `u` along `d_1 .. d_M` over the window `(0, N]`.
pub fn gamma_tail(u: &SampledFamily, d: &[MultiIndex], m: usize, n_max: &MultiIndex) -> Result<GammaTailReport> {
    if m == 0 {
        return Err(Error::InvalidParameter("M must be at least 1".into()));
    }
    if d.len() < m {
        return Err(Error::InvalidParameter(format!("{} terms given, window needs {m}", d.len())));
    }
    let d = &d[..m];
    check_ordering(d)?;
    let window = IndexBox::upto(n_max)?;
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let vol = window.volume() as f64;
    let gammas = d
        .par_iter()
        .map(|h| correlation_gamma(u, n_max, h).map(|g| g / vol))
        .collect::<Result<Vec<_>>>()?;
    let abs: Vec<f64> = gammas.iter().map(|g| g.norm()).collect();
    let mut suffix_sup = abs.clone();
    for i in (0..m.saturating_sub(1)).rev() {
        suffix_sup[i] = suffix_sup[i].max(suffix_sup[i + 1]);
    }
    let mut acc = KahanSum::new();
    let cesaro_abs: Vec<f64> = abs
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            acc.add(a);
            acc.value() / (i + 1) as f64
        })
        .collect();
    let mean = match cesaro_average(u, &window)? {
        FamilyValue::Scalar(z) => z,
        FamilyValue::Vector(v) => [v.iter().map(|x| x * x).sum::<f64>().sqrt(), 0.0],
    };
    Ok(GammaTailReport {
        window_n: n_max.clone(),
        window_m: m,
        d: d.to_vec(),
        gamma_hat: gammas.iter().map(|g| [g.re, g.im]).collect(),
        window_tail_sup: suffix_sup[m / 2],
        window_cesaro_abs: cesaro_abs[m - 1],
        suffix_sup,
        cesaro_abs,
        window_mean: mean,
    })
}
