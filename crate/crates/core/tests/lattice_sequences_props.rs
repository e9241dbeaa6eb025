use num_rational::Ratio;
use num_traits::One;
use proptest::prelude::*;
use vdc_core::divisibility::IntPolynomial;
use vdc_core::lattice::delta_density;
use vdc_core::measures::AtomicTorusMeasure;
use vdc_core::sequences::{block_decompose, block_sequence, is_morse, BlockMode, BlockSequenceParams, SequenceSpec};
use vdc_core::{FiniteSet, IndexBox, MultiIndex};

fn small_set() -> impl Strategy<Value = FiniteSet> {
    prop::collection::vec((-4i64..=4, -4i64..=4), 1..14)
        .prop_map(|pts| FiniteSet::new(2, pts.into_iter().map(|(a, b)| MultiIndex::new(vec![a, b]))).unwrap())
}

/// Some window `[-H, H]`, `H <= hmax`, lies inside the set.
fn some_window_covered(set: &FiniteSet, hmax: &[i64]) -> bool {
    (0..=hmax[0]).any(|h1| {
        (0..=hmax[1]).any(|h2| {
            (-h1..=h1).all(|x| (-h2..=h2).all(|y| set.contains(&MultiIndex::new(vec![x, y]))))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn box_point_count_is_volume(d in 1usize..=4, lo in prop::collection::vec(-3i64..3, 4), len in prop::collection::vec(0i64..5, 4)) {
        let lo = MultiIndex::new(lo[..d].to_vec());
        let hi = MultiIndex::new(lo.coords().iter().zip(&len).map(|(a, l)| a + l).collect());
        let b = IndexBox::new(lo, hi).unwrap();
        prop_assert_eq!(b.points().count() as u64, b.volume());
    }
}

proptest! {
    #[test]
    fn delta_density_is_monotone_and_bounded(set in small_set(), h in (0i64..4, 0i64..4), extra in (0i64..3, 0i64..3)) {
        let small = MultiIndex::new(vec![h.0, h.1]);
        let big = MultiIndex::new(vec![h.0 + extra.0, h.1 + extra.1]);
        let a = delta_density(&set, &small).unwrap();
        let b = delta_density(&set, &big).unwrap();
        prop_assert!(a <= b);
        prop_assert!(b <= Ratio::one());
        prop_assert_eq!(b == Ratio::one(), some_window_covered(&set, big.coords()));
    }

    #[test]
    fn zero_constant_polynomials_are_divisible_along_multiples(
        coeffs in prop::collection::vec(prop::collection::vec(-9i64..=9, 1..4), 1..3),
        q in 1u64..=50,
    ) {
        // p_i(0) = 0, so q | p_i(q k)
        let polys: Vec<IntPolynomial> =
            coeffs.iter().map(|c| IntPolynomial::from_i64(&std::iter::once(0).chain(c.iter().copied()).collect::<Vec<_>>())).collect();
        let spec = SequenceSpec::PolynomialTuple { polys };
        let terms = spec.generate(200).unwrap();
        for k in 1..=(200 / q) {
            let t = &terms[(q * k - 1) as usize];
            prop_assert!(t.coords().iter().all(|x| x.rem_euclid(q as i64) == 0), "n = {} term {}", q * k, t);
        }
    }

    #[test]
    fn block_sequences_are_unimodular_and_reproducible(seed in any::<u64>(), den in 2i64..9, plain in any::<bool>()) {
        let atoms = (0..den).map(|j| vec![num_rational::BigRational::new(j.into(), den.into())]).collect();
        let weights = (0..den).map(|_| num_rational::BigRational::new(1.into(), den.into())).collect();
        let measure = AtomicTorusMeasure::from_rational(1, atoms, weights).unwrap();
        let mode = if plain { BlockMode::Plain { h: 3 } } else { BlockMode::Values };
        let params = BlockSequenceParams { measure, seed, mode };
        let a = block_sequence(&params, 3000).unwrap();
        let b = block_sequence(&params, 3000).unwrap();
        prop_assert!(a.iter().zip(&b).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
        prop_assert!(a.iter().all(|y| (y.norm() - 1.0).abs() <= 4.0 * f64::EPSILON));
    }
}

#[test]
fn morse_predicate_is_popcount_parity() {
    for n in 0u64..1 << 16 {
        assert_eq!(is_morse(n), n.count_ones() % 2 == 0, "n = {n}");
    }
    let terms = SequenceSpec::Morse.generate(500).unwrap();
    assert!(terms.windows(2).all(|w| w[0].coords()[0] < w[1].coords()[0]));
    assert!(terms.iter().all(|t| is_morse(t.coords()[0] as u64)));
}

#[test]
fn block_decomposition_is_total_and_unique() {
    for n in 1u64..200_000 {
        let (m, r) = block_decompose(n);
        assert_eq!(m * m + r, n);
        assert!(r <= 2 * m);
        // uniqueness: any other m' would leave r outside [0, 2m']
        for m2 in [m.saturating_sub(1), m + 1] {
            if m2 != m {
                let ok = n >= m2 * m2 && n - m2 * m2 <= 2 * m2;
                assert!(!ok, "n = {n} also decomposes with m = {m2}");
            }
        }
    }
}
