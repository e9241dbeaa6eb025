//! Acceptance suite: one pass/fail line per criterion. Runs without the test
//! harness so the lines always print; exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vdc_core::correlations::{discrepancy_star, weyl_test, SampledFamily};
use vdc_core::divisibility::{
    appendix_construct, appendix_p, appendix_q, appendix_residue_table, lift_pow2, simultaneous_divisible, IntPolynomial,
};
use vdc_core::dynamics::{correlation_exact, random_block_orbit, recurrence_test, RecurrenceMode, SetSpec, SystemSpec};
use vdc_core::inequalities::{check_box_vdc, check_generalized_vdc, check_group_vdc, CyclicProduct, PdAssurance};
use vdc_core::measures::{spectral_test, AtomicTorusMeasure, SpectralMode};
use vdc_core::posdef::{
    fejer_family, is_positive_definite, kmf_witness_from_sequence, product_family, random_hermitian_1d, witness_search,
    CoefficientFamily, PdMethod, PdParams, PdVerdict, SearchOutcome, SearchParams,
};
use vdc_core::sequences::{block_sequence, BlockMode, BlockSequenceParams, RealSequenceSpec, SequenceSpec};
use vdc_core::{FiniteSet, IndexBox, MultiIndex};

/// Star discrepancy of `(n (sqrt 2 - 1))`, `n <= 10^5`, computed once by the
/// sorted-sample formula and frozen (rounded up at the fourth digit).
const FROZEN_DISCREPANCY: f64 = 3.177e-5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * x)
}

fn random_unit_disk(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(rng.random::<f64>().sqrt(), 2.0 * std::f64::consts::PI * rng.random::<f64>())
}

/// Brute-force gamma over a box family given by a closure, vector-valued via
/// the inner product.
fn brute_gamma(n: &[i64], h: &[i64], inner: &dyn Fn(&[i64], &[i64]) -> Complex64) -> Complex64 {
    let mut s = Complex64::zero();
    let mut idx = vec![1i64; n.len()];
    loop {
        let shifted: Vec<i64> = idx.iter().zip(h).map(|(a, b)| a + b).collect();
        if shifted.iter().zip(n).all(|(&x, &m)| x >= 1 && x <= m) {
            s += inner(&shifted, &idx);
        }
        let mut i = n.len();
        loop {
            if i == 0 {
                return s;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] <= n[i] {
                break;
            }
            idx[i] = 1;
        }
    }
}

fn lex_offset(n: &[i64], p: &[i64]) -> usize {
    p.iter().zip(n).fold(0usize, |acc, (&x, &m)| acc * m as usize + (x - 1) as usize)
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut failures = 0;
    let mut oracle_err: f64 = 0.0;
    for _ in 0..200 {
        let n = [rng.random_range(1..=16i64), rng.random_range(1..=16i64)];
        let h = [rng.random_range(1..=8i64), rng.random_range(1..=8i64)];
        let n_max = MultiIndex::new(n.to_vec());
        let domain = IndexBox::upto(&n_max).unwrap();
        let values: Vec<Complex64> = (0..n[0] * n[1]).map(|_| random_unit_disk(&mut rng)).collect();
        let u = SampledFamily::scalar(domain, values.clone()).unwrap();
        let r = check_box_vdc(&u, &n_max, &MultiIndex::new(h.to_vec())).unwrap();
        // independent oracle for both right-hand sides
        let inner = |a: &[i64], b: &[i64]| values[lex_offset(&n, a)] * values[lex_offset(&n, b)].conj();
        let lhs = values.iter().sum::<Complex64>().norm_sqr();
        let (mut weighted, mut simple) = (Complex64::zero(), 0.0);
        for h1 in 1 - h[0]..h[0] {
            for h2 in 1 - h[1]..h[1] {
                let g = brute_gamma(&n, &[h1, h2], &inner);
                weighted += g * ((h[0] - h1.abs()) * (h[1] - h2.abs())) as f64;
                simple += g.norm();
            }
        }
        let fw = ((n[0] + h[0]) * (n[1] + h[1])) as f64 / (h[0] * h[0] * h[1] * h[1]) as f64;
        let fs = ((n[0] + h[0]) * (n[1] + h[1])) as f64 / (h[0] * h[1]) as f64;
        let (rw, rs) = (fw * weighted.re, fs * simple);
        oracle_err = oracle_err
            .max((r.lhs - lhs).abs() / lhs.max(1.0))
            .max((r.rhs_weighted - rw).abs() / rw.abs().max(1.0))
            .max((r.rhs_simple - rs).abs() / rs.max(1.0));
        for rhs in [r.rhs_weighted, r.rhs_simple] {
            let rel = (r.lhs - rhs) / rhs.abs().max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
            if r.lhs > rhs * (1.0 + 1e-12) {
                failures += 1;
            }
        }
    }
    let pass = failures == 0 && oracle_err < 1e-9;
    outcome(pass, format!("200 families, {failures} violations, worst (lhs-rhs)/rhs = {worst:.3e}, oracle deviation {oracle_err:.1e}"))
}

fn random_subset(rng: &mut ChaCha8Rng, elements: &[MultiIndex], nonempty: bool) -> Vec<MultiIndex> {
    loop {
        let s: Vec<MultiIndex> = elements.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
        if !nonempty || !s.is_empty() {
            return s;
        }
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = 0;
    let mut oracle_err: f64 = 0.0;
    let mut trials = 0;
    for orders in [vec![7u64, 3], vec![5]] {
        let group = CyclicProduct::new(orders.clone()).unwrap();
        let elements: Vec<MultiIndex> = group.elements().collect();
        let dim = orders.len();
        let reduce = |p: &MultiIndex| MultiIndex::new(p.coords().iter().zip(&orders).map(|(&x, &m)| x.rem_euclid(m as i64)).collect());
        for _ in 0..100 {
            trials += 1;
            let e_pts = random_subset(&mut rng, &elements, true);
            let d_pts = random_subset(&mut rng, &elements, true);
            let u: Vec<Complex64> = (0..group.order()).map(|_| random_unit_disk(&mut rng)).collect();
            let e_set = FiniteSet::new(dim, e_pts.clone()).unwrap();
            let d_set = FiniteSet::new(dim, d_pts.clone()).unwrap();
            let r = check_group_vdc(&group, &e_set, &d_set, &u).unwrap();
            if !r.holds {
                failures += 1;
            }
            // oracle: |sum_E u|^2 <= |E - D| / |D| * sum_{k in D - D} |sum_{n in E, n + k in E} u_{n+k} conj(u_n)|
            let es: BTreeSet<MultiIndex> = e_pts.iter().cloned().collect();
            let val = |p: &MultiIndex| if es.contains(p) { u[elements.iter().position(|q| q == p).unwrap()] } else { Complex64::zero() };
            let lhs = es.iter().map(val).sum::<Complex64>().norm_sqr();
            let emd: BTreeSet<MultiIndex> = e_pts.iter().flat_map(|x| d_pts.iter().map(move |y| x - y)).map(|p| reduce(&p)).collect();
            let dmd: BTreeSet<MultiIndex> = d_pts.iter().flat_map(|x| d_pts.iter().map(move |y| x - y)).map(|p| reduce(&p)).collect();
            let corr: f64 =
                dmd.iter().map(|k| es.iter().map(|n| val(&reduce(&(n + k))) * val(n).conj()).sum::<Complex64>().norm()).sum();
            let rhs = emd.len() as f64 / d_pts.len() as f64 * corr;
            oracle_err = oracle_err.max((r.lhs - lhs).abs().max((r.rhs - rhs).abs()) / rhs.max(1.0));
            if lhs > rhs * (1.0 + 1e-12) {
                failures += 1;
            }
        }
    }
    outcome(failures == 0 && oracle_err < 1e-9, format!("{trials} trials on Z/7xZ/3 and Z/5, {failures} violations, oracle deviation {oracle_err:.1e}"))
}

fn random_vectors(rng: &mut ChaCha8Rng, count: usize, len: usize) -> Vec<f64> {
    (0..count * len).map(|_| rng.random_range(-1.0..1.0) / (len as f64).sqrt()).collect()
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = 0;
    let mut runs = 0;
    let mut min_margin = f64::INFINITY;
    let mut oracle_err: f64 = 0.0;
    let params = PdParams { tol: 1e-6, ..PdParams::default() };
    for h1 in 2..=4 {
        for h2 in 2..=4 {
            let a = fejer_family(&MultiIndex::new(vec![h1, h2])).unwrap();
            for n in [[32i64, 32], [h1 + 3, 29]] {
                let n_max = MultiIndex::new(n.to_vec());
                let domain = IndexBox::upto(&n_max).unwrap();
                let vol = (n[0] * n[1]) as usize;
                let scalar: Vec<Complex64> = (0..vol).map(|_| random_unit_disk(&mut rng)).collect();
                let vectors = random_vectors(&mut rng, vol, 3);
                let families = [
                    SampledFamily::scalar(domain.clone(), scalar.clone()).unwrap(),
                    SampledFamily::vector(domain, 3, vectors).unwrap(),
                ];
                for (kind, u) in families.iter().enumerate() {
                    runs += 1;
                    let r = check_generalized_vdc(u, &n_max, &a, &PdAssurance::Verify(params.clone())).unwrap();
                    min_margin = min_margin.min(r.margin);
                    if !r.holds || r.pd_verdict != Some(PdVerdict::PositiveDefinite) {
                        failures += 1;
                    }
                    if kind == 0 {
                        // oracle for the main term: N1 N2 Re sum a_h gamma(h)
                        let inner = |x: &[i64], y: &[i64]| scalar[lex_offset(&n, x)] * scalar[lex_offset(&n, y)].conj();
                        let mut main = Complex64::zero();
                        for k1 in 1 - h1..h1 {
                            for k2 in 1 - h2..h2 {
                                let w = ((h1 - k1.abs()) * (h2 - k2.abs())) as f64 / (h1 * h1 * h2 * h2) as f64;
                                main += brute_gamma(&n, &[k1, k2], &inner) * w;
                            }
                        }
                        let main = main.re * vol as f64;
                        oracle_err = oracle_err.max((r.main_term - main).abs() / main.abs().max(1.0));
                    }
                }
            }
        }
    }
    // Fejér x Fejér on Z^4: each factor certified, the product taken on that basis
    let f1 = fejer_family(&MultiIndex::new(vec![2, 3])).unwrap();
    let f2 = fejer_family(&MultiIndex::new(vec![3, 2])).unwrap();
    let factors_pd = [&f1, &f2]
        .iter()
        .all(|f| is_positive_definite(f, PdMethod::Grid, &params).unwrap().verdict == PdVerdict::PositiveDefinite);
    let prod = product_family(&f1, &f2).unwrap();
    let n4 = MultiIndex::new(vec![6, 5, 7, 4]);
    let dom4 = IndexBox::upto(&n4).unwrap();
    let vol4 = dom4.volume() as usize;
    let u4 = [
        SampledFamily::scalar(dom4.clone(), (0..vol4).map(|_| random_unit_disk(&mut rng)).collect()).unwrap(),
        SampledFamily::vector(dom4, 3, random_vectors(&mut rng, vol4, 3)).unwrap(),
    ];
    for u in &u4 {
        runs += 1;
        let r = check_generalized_vdc(u, &n4, &prod, &PdAssurance::Trusted).unwrap();
        min_margin = min_margin.min(r.margin);
        if !r.holds || !factors_pd {
            failures += 1;
        }
    }
    outcome(
        failures == 0 && oracle_err < 1e-9,
        format!("{runs} runs incl. Fejér x Fejér on Z^4, {failures} failures, min margin {min_margin:.4e}, oracle deviation {oracle_err:.1e}"),
    )
}

/// Minimum of a 1-d trig polynomial by a dense scan plus the curvature bound.
fn dense_min(a: &CoefficientFamily) -> (f64, f64) {
    let terms = a.float_terms();
    let points = 1usize << 20;
    let mut m = f64::INFINITY;
    for j in 0..points {
        let x = j as f64 / points as f64;
        let v: f64 = terms.iter().map(|(h, c)| (c * e(h[0] as f64 * x)).re).sum();
        m = m.min(v);
    }
    let curvature: f64 = terms.iter().map(|(h, c)| c.norm() * (2.0 * std::f64::consts::PI * h[0] as f64).powi(2)).sum();
    let step = 1.0 / points as f64;
    (m, 0.5 * curvature * (step / 2.0).powi(2))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let params = PdParams { cmax: 32, tol: 1e-6, ..PdParams::default() };
    let (mut in_band, mut contradictions, mut grid_wrong, mut gram_agree, mut gram_inconclusive) = (0, 0, 0, 0, 0);
    for _ in 0..100 {
        let support = rng.random_range(2..=6);
        let a = random_hermitian_1d(&mut rng, support, 0.5);
        let grid = is_positive_definite(&a, PdMethod::Grid, &params).unwrap().verdict;
        let gram = is_positive_definite(&a, PdMethod::Gram, &params).unwrap().verdict;
        let (m, err) = dense_min(&a);
        if matches!((grid, gram), (PdVerdict::PositiveDefinite, PdVerdict::Not) | (PdVerdict::Not, PdVerdict::PositiveDefinite)) {
            contradictions += 1;
        }
        if (m - err).abs() <= 1e-6 || (m + err).abs() <= 1e-6 || (m - err < 1e-6 && m + err > -1e-6) {
            in_band += 1;
            continue;
        }
        let truth = if m > 0.0 { PdVerdict::PositiveDefinite } else { PdVerdict::Not };
        if grid != truth {
            grid_wrong += 1;
        }
        match gram {
            PdVerdict::Inconclusive => gram_inconclusive += 1,
            v if v == truth => gram_agree += 1,
            _ => contradictions += 1,
        }
    }
    outcome(
        contradictions == 0 && grid_wrong == 0,
        format!(
            "100 families: grid wrong {grid_wrong}, gram agrees {gram_agree}, gram inconclusive {gram_inconclusive}, \
             contradictions {contradictions}, within 1e-6 band {in_band}"
        ),
    )
}

fn exhaustive_pow2(r: &IntPolynomial, k: u32) -> Option<u64> {
    let m = BigInt::from(1u64 << k);
    (0..1u64 << k).find(|&n| r.eval_mod(&BigInt::from(n), &m).is_zero())
}

fn criterion_5() -> Outcome {
    let table_ok = appendix_residue_table(4) == (vec![2, 0, 2, 2], vec![0, 2, 2, 0]);
    let (p, q) = (appendix_p(), appendix_q());
    // oracle: the tables straight from p(n), q(n)
    let direct_ok = (0..4i64).all(|n| {
        let pn = (2 + n * n + n * n * n) * (1 + 2 * n);
        let qn = n * (1 + n) * (1 + 2 * n);
        p.eval_i64(n) == BigInt::from(pn) && q.eval_i64(n) == BigInt::from(qn)
    });
    let fails_at_4 = simultaneous_divisible(&[p.clone(), q.clone()], 4).unwrap().is_none();
    let passes_below = [2u64, 3].iter().all(|&m| simultaneous_divisible(&[p.clone(), q.clone()], m).unwrap().is_some());
    let mut bad = 0;
    let mut built = 0;
    for a in -5i64..=5 {
        for b in -5i64..=5 {
            for d in 1..=512u64 {
                built += 1;
                match appendix_construct(a, b, d) {
                    Ok(c) => {
                        let n = &c.n;
                        let value = p.scale(&BigInt::from(a)).add(&q.scale(&BigInt::from(b))).eval(n);
                        if !(value % BigInt::from(d)).is_zero() {
                            bad += 1;
                        }
                    }
                    Err(_) => bad += 1,
                }
            }
        }
    }
    let mut lift_bad = 0;
    let mut lifts = 0;
    for a in -5i64..=5 {
        for b in -5i64..=5 {
            let g = num_integer::Integer::gcd(&a, &b);
            if g == 0 {
                continue;
            }
            let r = p.scale(&BigInt::from(a / g)).add(&q.scale(&BigInt::from(b / g)));
            let start = if (a / g) % 2 == 0 || (b / g) % 2 == 0 { BigInt::one() } else { BigInt::from(2) };
            for k in 1..=12u32 {
                lifts += 1;
                let got = lift_pow2(&r, k, &start);
                let oracle = exhaustive_pow2(&r, k);
                let m = BigInt::from(1u64 << k);
                let agrees = match (&got.n, oracle) {
                    (Some(n), Some(_)) => r.eval_mod(n, &m).is_zero(),
                    (None, None) => true,
                    _ => false,
                };
                if !agrees {
                    lift_bad += 1;
                }
            }
        }
    }
    outcome(
        table_ok && direct_ok && fails_at_4 && passes_below && bad == 0 && lift_bad == 0,
        format!(
            "tables {table_ok}, fails at 4 {fails_at_4}, {built} constructions with {bad} failures, \
             {lifts} lifts with {lift_bad} disagreements"
        ),
    )
}

fn criterion_6() -> Outcome {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let sigma = AtomicTorusMeasure::from_rational(1, vec![vec![BigRational::zero()], vec![half.clone()]], vec![half.clone(), half]).unwrap();
    let odds: Vec<MultiIndex> = (1..=10_000i64).step_by(2).map(MultiIndex::scalar).collect();
    let r = spectral_test(&sigma, &odds, odds.len(), SpectralMode::Vanish, 1e-2).unwrap();
    let exact_zero = r.coefficients.iter().all(|(_, [re, im])| *re == 0.0 && *im == 0.0);
    outcome(
        r.verdict.is_certificate() && exact_zero && r.window_max_abs == 0.0,
        format!("{} odd d, all coefficients exactly 0: {exact_zero}, certificate: {}", odds.len(), r.verdict.is_certificate()),
    )
}

fn criterion_7() -> Outcome {
    let squares = SequenceSpec::named("squares").unwrap();
    let p = kmf_witness_from_sequence(&squares, 1, 100_000).unwrap();
    let s = p.sum();
    let p0_exact = s.re.is_one() && s.im.is_zero();
    let x = std::f64::consts::SQRT_2 / 2.0;
    let value = p.evaluate(&[x]).norm();
    // oracle: (1/N) sum cos(2 pi n^2 x), phases advanced by (2n+1) x mod 1
    let n = 100_000u64;
    let mut phase = 0.0f64;
    let mut acc = 0.0;
    for k in 1..=n {
        phase = (phase + ((2 * k - 1) as f64 * x).fract()).fract();
        acc += (2.0 * std::f64::consts::PI * phase).cos();
    }
    let oracle = (acc / n as f64).abs();
    let d = FiniteSet::new(1, (1..4).map(MultiIndex::scalar).collect::<Vec<_>>()).unwrap();
    let search = witness_search(&d, &SearchParams::new(0.34, 1000)).unwrap();
    let (found, certified_min) = match &search {
        SearchOutcome::Found { check, .. } => (search.is_certified(), check.certified_min),
        _ => (false, f64::NEG_INFINITY),
    };
    outcome(
        p0_exact && value < 0.05 && (value - oracle).abs() < 1e-4 && found && certified_min >= -0.34,
        format!(
            "P(0)=1 exactly {p0_exact}, |P(sqrt2/2)| = {value:.5} (oracle {oracle:.5}), search on {{1,2,3}} certified {found} with min >= {certified_min:.5}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let third = BigRational::new(BigInt::one(), BigInt::from(3));
    let two_thirds = BigRational::new(BigInt::from(2), BigInt::from(3));
    let sigma =
        AtomicTorusMeasure::from_rational(1, vec![vec![BigRational::zero()], vec![third.clone()]], vec![third, two_thirds]).unwrap();
    let n = 1_000_000u64;
    let params = BlockSequenceParams { measure: sigma, seed: 42, mode: BlockMode::Values };
    let y = block_sequence(&params, n).unwrap();
    let mean = y.iter().sum::<Complex64>() / n as f64;
    let gamma1 = y.windows(2).map(|w| w[1] * w[0].conj()).sum::<Complex64>() / n as f64;
    // sigma^(1) = 1/3 + 2/3 e(1/3) = i / sqrt 3
    let target = Complex64::new(0.0, 1.0 / 3f64.sqrt());
    let (dm, dg) = ((mean - 1.0 / 3.0).norm(), (gamma1 - target).norm());
    outcome(dm < 0.02 && dg < 0.02, format!("seed 42, N = 1e6: |mean - 1/3| = {dm:.5}, |gamma(1) - sigma^(1)| = {dg:.5}"))
}

/// Probability that the word 1 0^k sits at positions 0 and n of an i.i.d.
/// Bernoulli(p) sequence, by enumerating the coordinates involved.
fn bernoulli_word_oracle(k: u64, n: u64, p: &BigRational) -> BigRational {
    let len = (n + k + 1) as u32;
    let word = |x: u64, at: u64| (0..=k).all(|i| ((x >> (at + i)) & 1) == u64::from(i == 0));
    let mut total = BigRational::zero();
    for x in 0..1u64 << len {
        if word(x, 0) && word(x, n) {
            let ones = x.count_ones() as i32;
            let zeros = len as i32 - ones;
            total += num_traits::pow(p.clone(), ones as usize) * num_traits::pow(BigRational::one() - p, zeros as usize);
        }
    }
    total
}

fn criterion_9() -> Outcome {
    // Bernoulli cylinders: cylinder of the non-overlapping word 1 0^k
    let p = BigRational::new(BigInt::one(), BigInt::from(3));
    let mut bern_bad = 0;
    let mut bern_cases = 0;
    for k in 0..=4u64 {
        let mass = bernoulli_word_oracle(k, 0, &p);
        let sys = SystemSpec::BernoulliCylinder { k, mass };
        for n in 0..=10u64 {
            bern_cases += 1;
            let got = correlation_exact(&sys, &SetSpec::Cylinder, n as i64).unwrap();
            let want = bernoulli_word_oracle(k, n, &p);
            if got.exact.as_ref().filter(|q| q.is_rational()).map(|q| q.rational_part().clone()) != Some(want) {
                bern_bad += 1;
            }
        }
    }
    // nice recurrence of the rotation by sqrt2 - 1 on [0, 0.1) along squares
    let alpha = std::f64::consts::SQRT_2 - 1.0;
    let rot = SystemSpec::parse_arg("rotation:sqrt2m1").unwrap();
    let interval = SetSpec::parse_for(&rot, "0:0.1").unwrap();
    let ds: Vec<i64> = (1..=10_000i64).map(|m| m * m).collect();
    let rec = recurrence_test(&rot, &interval, &ds, RecurrenceMode::Nice, 1e-3).unwrap();
    let overlap = |d: i64| {
        let t = (d as f64 * alpha).rem_euclid(1.0);
        (0.1 - t).max(0.0) + (0.1 - (1.0 - t)).max(0.0)
    };
    let hit = rec.window_hits.first().map(|h| (h.d, h.value.approx));
    let nice_ok = match hit {
        Some((d, v)) => v >= 0.01 - 1e-3 && (overlap(d) - v).abs() < 1e-6,
        None => false,
    };
    // random block orbits: density and lag-1 correlation against exact targets
    let mut orbit_err: f64 = 0.0;
    let cyc = SystemSpec::parse_arg("cyclic:7").unwrap();
    let residues = SetSpec::parse_for(&cyc, "0,1,3").unwrap();
    for (sys, set, density, lag1) in [(&rot, &interval, 0.1, overlap(1)), (&cyc, &residues, 3.0 / 7.0, 1.0 / 7.0)] {
        let orbit = random_block_orbit(sys, set, 42, 200_000, &[1]).unwrap();
        orbit_err = orbit_err.max((orbit.density - density).abs()).max((orbit.lags[0].empirical - lag1).abs());
    }
    outcome(
        bern_bad == 0 && nice_ok && orbit_err < 0.02,
        format!(
            "bernoulli {bern_cases} cases, {bern_bad} mismatches; first nice hit {hit:?}; block orbit max error {orbit_err:.4}"
        ),
    )
}

fn isqrt(n: u128) -> u128 {
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

fn criterion_10() -> Outcome {
    let weyl_seq = RealSequenceSpec::monomial("sqrt(2)".parse().unwrap(), 2);
    let xs = weyl_seq.fractional_parts(100_000).unwrap();
    let w = weyl_test(&xs, 5, 0.01).unwrap();
    let weyl_ok = w.rows.iter().all(|r| r.modulus < 0.01);
    let rot = RealSequenceSpec::monomial("-1+sqrt(2)".parse().unwrap(), 1);
    let ys = rot.fractional_parts(100_000).unwrap();
    let dstar = discrepancy_star(&ys).unwrap();
    // oracle: fixed-point fractional parts and the sorted-sample formula
    let shift = 62u32;
    let alpha = isqrt(2u128 << (2 * shift)) - (1u128 << shift);
    let mask = (1u128 << shift) - 1;
    let mut zs: Vec<f64> = (1..=100_000u128).map(|n| ((n * alpha) & mask) as f64 / (1u128 << shift) as f64).collect();
    zs.sort_by(f64::total_cmp);
    let n = zs.len() as f64;
    let oracle = zs.iter().enumerate().map(|(i, &z)| ((i + 1) as f64 / n - z).max(z - i as f64 / n)).fold(0.0, f64::max);
    outcome(
        weyl_ok && dstar <= FROZEN_DISCREPANCY && (dstar - oracle).abs() < 1e-9,
        format!("max |Weyl| = {:.5}, D* = {dstar:.6e} (oracle {oracle:.6e}, frozen bound {FROZEN_DISCREPANCY:e})", w.window_sup),
    )
}

/// Name, check, and time budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

fn main() {
    let criteria: [Criterion; 10] = [
        ("box inequality suite", criterion_1, 10),
        ("group inequality", criterion_2, 1),
        ("generalized inequality", criterion_3, 30),
        ("positive-definiteness oracle agreement", criterion_4, 60),
        ("fixed-pair divisibility construction", criterion_5, 60),
        ("spectral negative certificate", criterion_6, 1),
        ("KMF witness pipeline", criterion_7, 120),
        ("block-sequence law of large numbers", criterion_8, 30),
        ("dynamics", criterion_9, 60),
        ("equidistribution sanity", criterion_10, 10),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(*budget);
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({}; {:.2}s of {}s)",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            budget
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
