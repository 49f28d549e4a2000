mod common;

use chernoff_lab::operator::ComplexMatrix;
use chernoff_lab::quantizer::{quantize, Monomial, OscillatorBasis, PolynomialSymbol, QuantizationRule};
use num_complex::Complex64;
use proptest::prelude::*;

use common::{block_diff, ordering_difference};

fn rule() -> impl Strategy<Value = QuantizationRule> {
    prop_oneof![Just(QuantizationRule::Weyl), Just(QuantizationRule::BornJordan)]
}

fn symbol() -> impl Strategy<Value = PolynomialSymbol> {
    prop::collection::vec((0u32..4, 0u32..4, -1.0..1.0f64), 1..5).prop_map(|terms| {
        PolynomialSymbol::new(terms.into_iter().map(|(a, b, c)| Monomial::new(a, b, c))).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quantization_is_linear(
        h1 in symbol(), h2 in symbol(), alpha in -2.0..2.0f64, beta in -2.0..2.0f64, r in rule(),
    ) {
        let basis = OscillatorBasis::new(8, 1.0).unwrap();
        let lhs = quantize(&(&(alpha * &h1) + &(beta * &h2)), r, &basis).unwrap();
        let rhs = quantize(&h1, r, &basis).unwrap().matrix().scale(Complex64::new(alpha, 0.0)).unwrap()
            .add(&quantize(&h2, r, &basis).unwrap().matrix().scale(Complex64::new(beta, 0.0)).unwrap())
            .unwrap();
        prop_assert!(lhs.matrix().max_abs_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn rules_agree_on_single_variable(power in 0u32..7, in_q in any::<bool>(), c in -2.0..2.0f64, dim in 2usize..12) {
        let basis = OscillatorBasis::new(dim, 1.0).unwrap();
        let h = if in_q { PolynomialSymbol::monomial(power, 0, c) } else { PolynomialSymbol::monomial(0, power, c) }.unwrap();
        let w = quantize(&h, QuantizationRule::Weyl, &basis).unwrap();
        let bj = quantize(&h, QuantizationRule::BornJordan, &basis).unwrap();
        prop_assert!(w.matrix().max_abs_diff(bj.matrix()) <= 1e-12);
    }

    #[test]
    fn truncation_locality(a in 0u32..4, b in 0u32..4, r in rule(), dim in 6usize..14, hbar in 0.2..2.0f64) {
        prop_assume!(a + b >= 1 && (a + b) as usize <= dim);
        let h = PolynomialSymbol::monomial(a, b, 1.0).unwrap();
        let small = quantize(&h, r, &OscillatorBasis::new(dim, hbar).unwrap()).unwrap();
        let big = quantize(&h, r, &OscillatorBasis::new(dim + 4, hbar).unwrap()).unwrap();
        let k = dim - (a + b) as usize;
        prop_assert!(block_diff(small.matrix(), big.matrix(), k) <= 1e-10);
    }
}

#[test]
fn symbolic_ordering_constant_for_q2p2() {
    for hbar in [0.5, 1.0, 2.0] {
        let diff = ordering_difference(2, 2, hbar);
        for (&(a, b), c) in &diff {
            if (a, b) != (0, 0) {
                assert!(c.norm() < 1e-14, "q^{a} p^{b} survives with {c}");
            }
        }
        let c = diff[&(0, 0)];
        assert!((c - Complex64::new(hbar * hbar / 6.0, 0.0)).norm() < 1e-14);

        let basis = OscillatorBasis::new(20, hbar).unwrap();
        let h: PolynomialSymbol = "q^2*p^2".parse().unwrap();
        let w = quantize(&h, QuantizationRule::Weyl, &basis).unwrap();
        let bj = quantize(&h, QuantizationRule::BornJordan, &basis).unwrap();
        let diff_matrix = w.matrix().sub(bj.matrix()).unwrap();
        let expected = ComplexMatrix::identity(20).scale(c).unwrap();
        assert!(block_diff(&diff_matrix, &expected, 18) < 1e-10);
    }
}

#[test]
fn degree_two_orderings_agree_symbolically() {
    // for a + b <= 2 both rules give the same operator
    for (a, b) in [(1, 1), (2, 0), (0, 2), (1, 0)] {
        let diff = ordering_difference(a, b, 1.0);
        assert!(diff.values().all(|c| c.norm() < 1e-14), "({a}, {b})");
    }
    // cubic terms still agree; q^2 p^2 is the lowest degree where they differ
    let diff = ordering_difference(2, 1, 1.0);
    assert!(diff.values().all(|c| c.norm() < 1e-14));
}
