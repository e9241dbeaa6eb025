//! The van der Corput inequalities, evaluated exactly as stated.
//!
//! Three forms: the box form with Fejér weights and its `sum |gamma|`
//! relaxation, the form on a finite abelian group with difference sets, and
//! the generalized form with an arbitrary positive-definite weight family.
//! All of them accept vector-valued families, where products become inner
//! products.

use std::collections::BTreeSet;

use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::correlations::{correlation_gamma, FamilyValue, SampledFamily};
use crate::error::{Error, Result};
use crate::lattice::{FiniteSet, IndexBox, MultiIndex};
use crate::numeric::{le_with_slack, ComplexSum};
use crate::posdef::{exact_to_c64, is_positive_definite, CoefficientFamily, PdMethod, PdParams, PdVerdict};

/// Relative slack of the box and group checks.
pub const REL_SLACK: f64 = 1e-12;
/// Absolute slack of the generalized check.
pub const ABS_SLACK: f64 = 1e-9;
/// Largest tolerated imaginary residue, relative to the summed magnitudes.
pub const IMAG_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaTerm {
    pub h: MultiIndex,
    pub weight: f64,
    pub gamma: [f64; 2],
}

fn squared_norm(v: &FamilyValue) -> f64 {
    v.norm().powi(2)
}

/// `sup |u_n|` over the window `(0, N]`.
fn window_sup(u: &SampledFamily, n_max: &MultiIndex) -> Result<f64> {
    let window = IndexBox::upto(n_max)?;
    let mut m: f64 = 0.0;
    for p in window.points() {
        let v = u.get(&p).ok_or_else(|| Error::OutOfDomain(p.clone()))?;
        m = m.max(v.norm());
    }
    Ok(m)
}

/// Gammas for every `h` in the open box `(-H, H)`, in lexicographic order.
fn gammas(u: &SampledFamily, n_max: &MultiIndex, hs: &[MultiIndex]) -> Result<Vec<Complex64>> {
    hs.par_iter().map(|h| correlation_gamma(u, n_max, h)).collect()
}

/// Real part of `z`, after checking the imaginary residue is dust.
fn realify(z: Complex64, scale: f64) -> Result<f64> {
    if z.im.abs() > IMAG_TOL * scale.max(z.re.abs()) {
        return Err(Error::ImaginaryResidue { real: z.re, imag: z.im });
    }
    Ok(z.re)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxReport {
    pub n: MultiIndex,
    pub h: MultiIndex,
    pub lhs: f64,
    pub rhs_weighted: f64,
    pub rhs_simple: f64,
    pub margin: f64,
    pub holds: bool,
    pub terms: Vec<GammaTerm>,
}

pub fn check_box_vdc(u: &SampledFamily, n_max: &MultiIndex, h_max: &MultiIndex) -> Result<BoxReport> {
    n_max.check_dim(u.dim())?;
    h_max.check_dim(u.dim())?;
    if h_max.coords().iter().any(|&h| h < 1) {
        return Err(Error::InvalidParameter(format!("H = {h_max} must be at least 1 in every coordinate")));
    }
    let window = IndexBox::upto(n_max)?;
    let lhs = squared_norm(&u.window_sum(&window)?);
    let hs: Vec<MultiIndex> = IndexBox::new(-h_max, h_max.clone())?.points().filter(|h| h.abs().lt_componentwise(h_max)).collect();
    let gs = gammas(u, n_max, &hs)?;
    let weights: Vec<f64> =
        hs.iter().map(|h| h.coords().iter().zip(h_max.coords()).map(|(&k, &hh)| (hh - k.abs()) as f64).product()).collect();
    let factor_w: f64 = n_max.coords().iter().zip(h_max.coords()).map(|(&n, &h)| (n + h) as f64 / (h * h) as f64).product();
    let factor_s: f64 = n_max.coords().iter().zip(h_max.coords()).map(|(&n, &h)| (n + h) as f64 / h as f64).product();
    let weighted: Complex64 = gs.iter().zip(&weights).map(|(g, w)| g * w).collect::<ComplexSum>().value();
    let scale: f64 = gs.iter().zip(&weights).map(|(g, w)| g.norm() * w).sum();
    let rhs_weighted = factor_w * realify(weighted, scale)?;
    let rhs_simple = factor_s * gs.iter().map(|g| g.norm()).sum::<f64>();
    let rhs = rhs_weighted.min(rhs_simple);
    Ok(BoxReport {
        n: n_max.clone(),
        h: h_max.clone(),
        lhs,
        rhs_weighted,
        rhs_simple,
        margin: rhs - lhs,
        holds: le_with_slack(lhs, rhs, REL_SLACK, 0.0),
        terms: hs
            .into_iter()
            .zip(weights)
            .zip(gs)
            .map(|((h, weight), g)| GammaTerm { h, weight, gamma: [g.re, g.im] })
            .collect(),
    })
}

/// The group `Z/m_1 x ... x Z/m_k`, elements stored reduced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CyclicProduct {
    orders: Vec<u64>,
}

impl CyclicProduct {
    pub fn new(orders: Vec<u64>) -> Result<Self> {
        if orders.is_empty() || orders.contains(&0) {
            return Err(Error::InvalidParameter("group orders must be positive".into()));
        }
        let total = orders.iter().try_fold(1u64, |acc, &m| acc.checked_mul(m));
        if total.is_none_or(|t| t > 1 << 24) {
            return Err(Error::SizeLimit("group order above 2^24".into()));
        }
        Ok(Self { orders })
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn order(&self) -> usize {
        self.orders.iter().product::<u64>() as usize
    }

    pub fn reduce(&self, p: &MultiIndex) -> MultiIndex {
        MultiIndex::new(p.coords().iter().zip(&self.orders).map(|(&x, &m)| x.rem_euclid(m as i64)).collect())
    }

    /// Position in the lexicographic listing of the group.
    pub fn index(&self, p: &MultiIndex) -> usize {
        self.reduce(p).coords().iter().zip(&self.orders).fold(0usize, |acc, (&x, &m)| acc * m as usize + x as usize)
    }

    pub fn elements(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        let hi = MultiIndex::new(self.orders.iter().map(|&m| m as i64).collect());
        IndexBox::from_zero(&hi).expect("positive orders").points()
    }

    fn reduced_set(&self, s: &FiniteSet) -> Result<BTreeSet<MultiIndex>> {
        if !s.is_empty() && s.dim() != self.orders.len() {
            return Err(Error::DimensionMismatch { expected: self.orders.len(), got: s.dim() });
        }
        Ok(s.points().iter().map(|p| self.reduce(p)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupReport {
    pub orders: Vec<u64>,
    pub lhs: f64,
    pub rhs: f64,
    /// `|E D^-1|` and `|D|`.
    pub e_minus_d: usize,
    pub d_size: usize,
    pub differences: Vec<MultiIndex>,
    pub margin: f64,
    pub holds: bool,
}

/// Group form. `u` lists values over the whole group in lexicographic order;
/// only its restriction to `E` enters.
pub fn check_group_vdc(group: &CyclicProduct, e: &FiniteSet, d: &FiniteSet, u: &[Complex64]) -> Result<GroupReport> {
    if d.is_empty() {
        return Err(Error::InvalidParameter("D must be nonempty".into()));
    }
    if u.len() != group.order() {
        return Err(Error::InvalidParameter(format!("{} values for a group of order {}", u.len(), group.order())));
    }
    let es = group.reduced_set(e)?;
    let ds = group.reduced_set(d)?;
    let value = |p: &MultiIndex| if es.contains(p) { u[group.index(p)] } else { Complex64::zero() };
    let lhs = es.iter().map(value).collect::<ComplexSum>().value().norm_sqr();
    let e_minus_d: BTreeSet<MultiIndex> = es.iter().flat_map(|x| ds.iter().map(move |y| group.reduce(&(x - y)))).collect();
    let diffs: BTreeSet<MultiIndex> = ds.iter().flat_map(|x| ds.iter().map(move |y| group.reduce(&(x - y)))).collect();
    let differences: Vec<MultiIndex> = diffs.into_iter().collect();
    let corr: Vec<f64> = differences
        .par_iter()
        .map(|k| es.iter().map(|n| value(&group.reduce(&(n + k))) * value(n).conj()).collect::<ComplexSum>().value().norm())
        .collect();
    let rhs = e_minus_d.len() as f64 / ds.len() as f64 * corr.iter().sum::<f64>();
    Ok(GroupReport {
        orders: group.orders.clone(),
        lhs,
        rhs,
        e_minus_d: e_minus_d.len(),
        d_size: ds.len(),
        differences,
        margin: rhs - lhs,
        holds: le_with_slack(lhs, rhs, REL_SLACK, 0.0),
    })
}

/// How the positive-definiteness precondition is established.
#[derive(Clone, Debug, PartialEq)]
pub enum PdAssurance {
    Trusted,
    Verify(PdParams),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneralizedReport {
    pub n: MultiIndex,
    pub lhs: f64,
    pub main_term: f64,
    pub error_term: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
    pub norm_sup: f64,
    pub a0: f64,
    /// `None` when positivity was taken on trust.
    pub pd_verdict: Option<PdVerdict>,
    pub terms: Vec<GammaTerm>,
}

/// Boundary weight of a shift: `prod (N_i + |h_i|) - prod N_i`, which is
/// `|h_1| N_2 + |h_2| N_1 + |h_1 h_2|` in two dimensions.
pub fn boundary_weight(n_max: &MultiIndex, h: &MultiIndex) -> f64 {
    let wide: f64 = n_max.coords().iter().zip(h.coords()).map(|(&n, &k)| (n + k.abs()) as f64).product();
    wide - n_max.product_f64()
}

fn verify_pd(a: &CoefficientFamily, assurance: &PdAssurance) -> Result<Option<PdVerdict>> {
    a.require_hermitian()?;
    let PdAssurance::Verify(params) = assurance else { return Ok(None) };
    let mut verdict = is_positive_definite(a, PdMethod::Grid, params)?.verdict;
    if verdict == PdVerdict::Inconclusive {
        verdict = is_positive_definite(a, PdMethod::Gram, params)?.verdict;
    }
    if verdict == PdVerdict::Not {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(Some(verdict))
}

pub fn check_generalized_vdc(
    u: &SampledFamily,
    n_max: &MultiIndex,
    a: &CoefficientFamily,
    assurance: &PdAssurance,
) -> Result<GeneralizedReport> {
    n_max.check_dim(u.dim())?;
    if a.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), got: a.dim() });
    }
    let s = a.sum();
    if !(s.re.is_one() && s.im.is_zero()) {
        return Err(Error::InvalidParameter("weights must sum to exactly 1".into()));
    }
    if let Some(h) = a.support().into_iter().find(|h| !h.abs().lt_componentwise(n_max)) {
        return Err(Error::InvalidParameter(format!("support point {h} does not fit inside N = {n_max}")));
    }
    let pd_verdict = verify_pd(a, assurance)?;
    let window = IndexBox::upto(n_max)?;
    let lhs = squared_norm(&u.window_sum(&window)?);
    let hs = a.support();
    let gs = gammas(u, n_max, &hs)?;
    let coeffs: Vec<Complex64> = hs.iter().map(|h| exact_to_c64(&a.get(h))).collect();
    let main: Complex64 = gs.iter().zip(&coeffs).map(|(g, c)| g * c).collect::<ComplexSum>().value();
    let scale: f64 = gs.iter().zip(&coeffs).map(|(g, c)| g.norm() * c.norm()).sum();
    let vol = n_max.product_f64();
    let main_term = vol * realify(main, scale)?;
    let norm_sup = window_sup(u, n_max)?;
    let weight: f64 = hs.iter().zip(&coeffs).map(|(h, c)| boundary_weight(n_max, h) * c.norm()).sum();
    let error_term = vol * 5.0 * norm_sup * norm_sup * weight;
    let rhs = main_term + error_term;
    Ok(GeneralizedReport {
        n: n_max.clone(),
        lhs,
        main_term,
        error_term,
        rhs,
        margin: rhs - lhs,
        holds: lhs <= rhs + ABS_SLACK,
        norm_sup,
        a0: exact_to_c64(&a.a0()).re,
        pd_verdict,
        terms: hs
            .into_iter()
            .zip(coeffs)
            .zip(gs)
            .map(|((h, c), g)| GammaTerm { h, weight: c.re, gamma: [g.re, g.im] })
            .collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantRow {
    pub n: MultiIndex,
    /// `|average of u over (0, N]|`.
    pub mean_abs: f64,
    /// `sqrt(rhs) / vol`, the bound the generalized inequality gives on it.
    pub inequality_bound: f64,
    /// `max |gamma(N, h)| / vol` over `h != 0` in the support.
    pub max_off_zero_correlation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantReport {
    pub a0: f64,
    pub norm_sup: f64,
    /// `|u|_inf sqrt(a0)`, the limiting bound when off-zero correlations vanish.
    pub limit_bound: f64,
    pub rows: Vec<QuantRow>,
    /// Largest `mean_abs` over the second half of the schedule.
    pub tail_mean_abs: f64,
    pub tail_within_bound: bool,
}

/// Drives the generalized check along a growing schedule of windows.
pub fn quant_schedule(u: &SampledFamily, a: &CoefficientFamily, schedule: &[MultiIndex], tol: f64) -> Result<QuantReport> {
    if schedule.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let mut rows = Vec::with_capacity(schedule.len());
    let mut sup: f64 = 0.0;
    for n in schedule {
        let r = check_generalized_vdc(u, n, a, &PdAssurance::Trusted)?;
        let vol = n.product_f64();
        sup = sup.max(r.norm_sup);
        let max_off = r
            .terms
            .iter()
            .filter(|t| !t.h.is_zero())
            .map(|t| t.gamma[0].hypot(t.gamma[1]) / vol)
            .fold(0.0, f64::max);
        rows.push(QuantRow {
            n: n.clone(),
            mean_abs: r.lhs.sqrt() / vol,
            inequality_bound: r.rhs.max(0.0).sqrt() / vol,
            max_off_zero_correlation: max_off,
        });
    }
    let a0 = exact_to_c64(&a.a0()).re;
    let limit_bound = sup * a0.max(0.0).sqrt();
    let tail_mean_abs = rows[rows.len() / 2..].iter().map(|r| r.mean_abs).fold(0.0, f64::max);
    Ok(QuantReport { a0, norm_sup: sup, limit_bound, rows, tail_mean_abs, tail_within_bound: tail_mean_abs <= limit_bound + tol })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralIneqReport {
    pub n: i64,
    pub h: i64,
    /// `a_0`, playing the role of epsilon.
    pub eps: f64,
    pub lhs: f64,
    pub energy: f64,
    pub correlation_sum: f64,
    pub boundary: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// The one-dimensional bound `|mean u|^2 <= a_0 (mean |u|^2 + sum |gamma(N, d)| / N
/// + 5 |u|^2 H^2 / N)`, the sum running over the nonzero support of `a`.
pub fn check_spectral_ineq(u: &SampledFamily, n: i64, a: &CoefficientFamily) -> Result<SpectralIneqReport> {
    if u.dim() != 1 || a.dim() != 1 {
        return Err(Error::Unsupported("this bound is stated for sequences".into()));
    }
    let s = a.sum();
    if !(s.re.is_one() && s.im.is_zero()) {
        return Err(Error::InvalidParameter("weights must sum to exactly 1".into()));
    }
    if n < 1 {
        return Err(Error::EmptyWindow);
    }
    a.require_hermitian()?;
    let nm = MultiIndex::scalar(n);
    let nf = n as f64;
    let window = IndexBox::upto(&nm)?;
    let lhs = squared_norm(&u.window_sum(&window)?) / (nf * nf);
    let energy = correlation_gamma(u, &nm, &MultiIndex::scalar(0))?.re / nf;
    let ds: Vec<MultiIndex> = a.support().into_iter().filter(|h| !h.is_zero()).collect();
    let correlation_sum: f64 = gammas(u, &nm, &ds)?.iter().map(|g| g.norm()).sum::<f64>() / nf;
    let h = a.support_bound().coords()[0] + 1;
    let sup = window_sup(u, &nm)?;
    let boundary = 5.0 * sup * sup * (h * h) as f64 / nf;
    let eps = exact_to_c64(&a.a0()).re;
    let rhs = eps * (energy + correlation_sum + boundary);
    Ok(SpectralIneqReport { n, h, eps, lhs, energy, correlation_sum, boundary, rhs, holds: le_with_slack(lhs, rhs, REL_SLACK, 0.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posdef::fejer_family;

    fn constant(n: &MultiIndex) -> SampledFamily {
        SampledFamily::from_fn(IndexBox::upto(n).unwrap(), |_| Complex64::new(1.0, 0.0))
    }

    #[test]
    fn box_constant_example() {
        let n = MultiIndex::new(vec![4, 4]);
        let r = check_box_vdc(&constant(&n), &n, &MultiIndex::new(vec![1, 1])).unwrap();
        assert_eq!(r.lhs, 256.0);
        assert_eq!(r.rhs_weighted, 400.0);
        assert!(r.holds);
    }

    #[test]
    fn box_single_entry() {
        let n = MultiIndex::new(vec![2, 2]);
        let u = SampledFamily::from_fn(IndexBox::upto(&n).unwrap(), |p| {
            Complex64::new(if p.coords() == [1, 1] { 1.0 } else { 0.0 }, 0.0)
        });
        let r = check_box_vdc(&u, &n, &n).unwrap();
        assert_eq!(r.lhs, 1.0);
        // only h = 0 contributes: (4 * 4 / 16) * 4 * 1
        assert!((r.rhs_weighted - 4.0).abs() < 1e-12);
        assert!(r.holds);
    }

    #[test]
    fn box_rejects_zero_h() {
        let n = MultiIndex::new(vec![2, 2]);
        assert!(check_box_vdc(&constant(&n), &n, &MultiIndex::new(vec![0, 1])).is_err());
    }

    #[test]
    fn group_examples() {
        let g = CyclicProduct::new(vec![5]).unwrap();
        let all = FiniteSet::from_integers(0..5);
        let r = check_group_vdc(&g, &all, &all, &[Complex64::new(1.0, 0.0); 5]).unwrap();
        assert_eq!((r.lhs, r.rhs, r.e_minus_d, r.differences.len()), (25.0, 25.0, 5, 5));
        assert!(r.holds);

        let g = CyclicProduct::new(vec![2, 2]).unwrap();
        let single = FiniteSet::new(2, [MultiIndex::new(vec![0, 0])]).unwrap();
        let u = [1.0, 0.0, 0.0, 0.0].map(|x| Complex64::new(x, 0.0));
        let r = check_group_vdc(&g, &single, &single, &u).unwrap();
        assert_eq!((r.lhs, r.rhs), (1.0, 1.0));
        assert!(check_group_vdc(&g, &single, &FiniteSet::new(2, []).unwrap(), &u).is_err());
    }

    #[test]
    fn generalized_constant_fejer() {
        let n = MultiIndex::new(vec![6, 5]);
        let a = fejer_family(&MultiIndex::new(vec![2, 2])).unwrap();
        let r = check_generalized_vdc(&constant(&n), &n, &a, &PdAssurance::Verify(PdParams { tol: 1e-6, ..PdParams::default() }))
            .unwrap();
        // gamma(N, h) = (6 - |h1|)(5 - |h2|) for a constant family
        let mut main = 0.0;
        let mut err = 0.0;
        for (h1, w1) in [(-1i64, 0.25), (0, 0.5), (1, 0.25)] {
            for (h2, w2) in [(-1i64, 0.25), (0, 0.5), (1, 0.25)] {
                let w = w1 * w2;
                main += w * ((6 - h1.abs()) * (5 - h2.abs())) as f64;
                err += w * (h1.abs() * 5 + h2.abs() * 6 + (h1 * h2).abs()) as f64;
            }
        }
        assert!((r.main_term - 30.0 * main).abs() < 1e-9);
        assert!((r.error_term - 30.0 * 5.0 * err).abs() < 1e-9);
        assert_eq!(r.lhs, 900.0);
        assert!(r.holds);
        assert_eq!(r.pd_verdict, Some(PdVerdict::PositiveDefinite));
    }

    #[test]
    fn generalized_rejects_non_pd() {
        let n = MultiIndex::scalar(10);
        let a = CoefficientFamily::from_f64(
            1,
            [(-1, 0.5), (1, 0.5)].map(|(h, v)| (MultiIndex::scalar(h), Complex64::new(v, 0.0))),
        )
        .unwrap();
        let r = check_generalized_vdc(&constant(&n), &n, &a, &PdAssurance::Verify(PdParams::default()));
        assert!(matches!(r, Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn boundary_weight_two_dims() {
        let n = MultiIndex::new(vec![7, 3]);
        let h = MultiIndex::new(vec![-2, 5]);
        assert_eq!(boundary_weight(&n, &h), (2 * 3 + 5 * 7 + 10) as f64);
    }

    #[test]
    fn spectral_ineq_alternating() {
        let n = 1000;
        let u = SampledFamily::from_fn(IndexBox::upto(&MultiIndex::scalar(n)).unwrap(), |p| {
            Complex64::new(if p.coords()[0] % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        });
        let a = fejer_family(&MultiIndex::scalar(4)).unwrap();
        let r = check_spectral_ineq(&u, n, &a).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.holds && (r.eps - 0.25).abs() < 1e-15);
    }
}
