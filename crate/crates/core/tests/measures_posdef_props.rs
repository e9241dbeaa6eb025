use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use vdc_core::divisibility::IntPolynomial;
use vdc_core::measures::AtomicTorusMeasure;
use vdc_core::posdef::{
    exact_to_c64, fejer_family, is_positive_definite, GridParams, kmf_witness_from_sequence, witness_search, CoefficientFamily,
    PdMethod, PdParams, PdVerdict, SearchOutcome, SearchParams,
};
use vdc_core::sequences::SequenceSpec;
use vdc_core::{FiniteSet, MultiIndex};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Atoms `(num/den, ...)` with positive integer weights, normalised to mass 1.
fn rational_measure(dim: usize) -> impl Strategy<Value = AtomicTorusMeasure> {
    prop::collection::vec((prop::collection::vec((0i64..12, 1i64..13), dim), 1i64..10), 1..7).prop_map(move |atoms| {
        let total: i64 = atoms.iter().map(|(_, w)| w).sum();
        let (pts, ws): (Vec<Vec<BigRational>>, Vec<BigRational>) = atoms
            .into_iter()
            .map(|(c, w)| (c.into_iter().map(|(n, d)| q(n % d, d)).collect(), q(w, total)))
            .unzip();
        AtomicTorusMeasure::from_rational(dim, pts, ws).unwrap()
    })
}

fn index(dim: usize, r: i64) -> impl Strategy<Value = MultiIndex> {
    prop::collection::vec(-r..=r, dim).prop_map(MultiIndex::new)
}

/// `sum_h a_h sigma^(h)`, the integral of the trigonometric polynomial against `sigma`.
fn pairing(p: &CoefficientFamily, sigma: &AtomicTorusMeasure) -> f64 {
    p.entries().map(|(h, a)| exact_to_c64(a) * sigma.fourier_coefficient(h).unwrap()).sum::<Complex64>().re
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn convolution_multiplies_coefficients(a in rational_measure(1), b in rational_measure(1), n in -100i64..=100) {
        let c = a.convolve(&b).unwrap();
        let n = MultiIndex::scalar(n);
        let lhs = c.fourier_coefficient(&n).unwrap();
        let rhs = a.fourier_coefficient(&n).unwrap() * b.fourier_coefficient(&n).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12);
    }

    #[test]
    fn rational_measures_are_exactly_hermitian(s in rational_measure(2), n in index(2, 50)) {
        let a = s.fourier_coefficient(&n).unwrap();
        let b = s.fourier_coefficient(&-&n).unwrap();
        // exact float equality; only the sign of a zero may differ
        prop_assert!(a.re == b.re && a.im == -b.im, "{} vs {}", a, b);
        prop_assert!(a.norm() <= s.fourier_coefficient(&MultiIndex::zero(2)).unwrap().re * (1.0 + 1e-12));
    }

    #[test]
    fn affinity_with_dirac_is_root_of_zero_mass(s in rational_measure(2)) {
        let aff = s.affinity(&AtomicTorusMeasure::dirac_zero(2)).unwrap();
        let m0 = s.mass_at_zero();
        prop_assert!((aff * aff - m0).abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn push_forward_reads_coefficients_through_the_matrix(
        s in rational_measure(2),
        m in prop::collection::vec(prop::collection::vec(-3i64..=3, 3), 2),
        k in index(3, 6),
    ) {
        // L is 2 x 3, so the image lives on T^3 and sigma'^(k) = sigma^(L k)
        let image = s.push_forward(&m).unwrap();
        let lk = MultiIndex::new(m.iter().map(|row| row.iter().zip(k.coords()).map(|(a, b)| a * b).sum()).collect());
        let lhs = image.fourier_coefficient(&k).unwrap();
        let rhs = s.fourier_coefficient(&lk).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sequence_witnesses_are_normalised(
        coeffs in prop::collection::vec(prop::collection::vec(-4i64..=4, 1..3), 1..3),
        qq in 1u32..=3,
    ) {
        prop_assume!(coeffs.iter().all(|c| c.iter().any(|&x| x != 0)));
        let polys = coeffs
            .iter()
            .map(|c| IntPolynomial::from_i64(&std::iter::once(0).chain(c.iter().copied()).collect::<Vec<_>>()))
            .collect();
        let spec = SequenceSpec::PolynomialTuple { polys };
        let p = kmf_witness_from_sequence(&spec, qq, 60).unwrap();
        prop_assert!(p.is_hermitian());
        let s = p.sum();
        prop_assert_eq!(s.re, BigRational::one());
        prop_assert!(s.im.is_zero());
    }
}

fn assert_fejer_pd(h: MultiIndex) {
    let params = PdParams { tol: 1e-6, grid: GridParams::for_dim(2), ..PdParams::default() };
    let cert = is_positive_definite(&fejer_family(&h).unwrap(), PdMethod::Grid, &params).unwrap();
    assert_eq!(cert.verdict, PdVerdict::PositiveDefinite, "H = {h}");
}

proptest! {
    // each certificate costs up to several seconds, so the square is sampled
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn fejer_kernels_are_positive_definite(h1 in 1i64..=8, h2 in 1i64..=8) {
        assert_fejer_pd(MultiIndex::new(vec![h1, h2]));
    }
}

#[test]
fn largest_fejer_kernel_is_positive_definite() {
    assert_fejer_pd(MultiIndex::new(vec![8, 8]));
}

#[test]
fn searched_witness_pairs_with_measures() {
    let d = FiniteSet::new(1, [1, 2, 3].map(MultiIndex::scalar)).unwrap();
    let SearchOutcome::Found { witness, eps_certified, .. } = witness_search(&d, &SearchParams::new(0.34, 400)).unwrap()
    else {
        panic!("no witness found");
    };
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let strategy = rational_measure(1);
    for _ in 0..20 {
        let sigma = strategy.new_tree(&mut runner).unwrap().current();
        let m0 = sigma.mass_at_zero();
        let value = pairing(&witness, &sigma);
        assert!(value >= m0 - eps_certified * (1.0 - m0) - 1e-12, "{value} < {m0} - eps (1 - {m0})");
    }
}
