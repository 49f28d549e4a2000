mod common;

use chernoff_lab::chernoff::canonical_probes;
use chernoff_lab::ensemble::{DiscreteEnsemble, GaussianHermitianEnsemble, HamiltonianEnsemble};
use chernoff_lab::lln::{lln_deviations, lln_tail, sample_composition, summarize, LlnParams};
use chernoff_lab::operator::{unitarity_deviation, HermitianOperator};
use chernoff_lab::rng::RngStream;
use proptest::prelude::*;

fn pauli_pair() -> HamiltonianEnsemble {
    DiscreteEnsemble::new(vec![
        (HermitianOperator::sigma_x(), 0.5),
        (HermitianOperator::sigma_z(), 0.5),
    ])
    .unwrap()
    .into()
}

fn params(n: u64, epsilon: f64, trials: usize) -> LlnParams {
    LlnParams {
        n,
        t: 1.0,
        epsilon,
        trials,
        reference_samples: 64,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn compositions_are_unitary(n in 1u64..200, t in 0.01..10.0f64, seed in any::<u64>(), gaussian in any::<bool>()) {
        let e: HamiltonianEnsemble = if gaussian {
            GaussianHermitianEnsemble::new(HermitianOperator::sigma_z(), 1.0).unwrap().into()
        } else {
            pauli_pair()
        };
        let u = sample_composition(&e, n, t, &mut RngStream::new(seed, 3)).unwrap();
        prop_assert!(unitarity_deviation(u.matrix()) <= 1e-9);
    }

    #[test]
    fn tail_nonincreasing_in_epsilon(n in 1u64..32, seed in any::<u64>(), e1 in 0.0..1.0f64, e2 in 0.0..1.0f64) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        prop_assume!(lo > 0.0);
        let e = pauli_pair();
        let probes = canonical_probes(2);
        let (devs, _, _) = lln_deviations(&e, &params(n, lo, 50), &probes, seed).unwrap();
        let p_lo = summarize(&params(n, lo, 50), &devs).tail_probability;
        let p_hi = summarize(&params(n, hi, 50), &devs).tail_probability;
        prop_assert!(p_hi <= p_lo);
        // the deviations themselves do not depend on epsilon
        let (again, _, _) = lln_deviations(&e, &params(n, hi, 50), &probes, seed).unwrap();
        prop_assert_eq!(devs, again);
    }

    #[test]
    fn degenerate_ensemble_has_no_fluctuation(dim in 2usize..5, n in 1u64..64, seed in any::<u64>()) {
        let h = common::random_hermitian(&mut common::rng(seed), dim, 1.0);
        let e: HamiltonianEnsemble = DiscreteEnsemble::point_mass(h).into();
        let r = lln_tail(&e, &params(n, 1e-6, 20), &canonical_probes(dim), &RngStream::new(seed, 0)).unwrap();
        prop_assert!(r.mean_deviation <= 1e-9);
        prop_assert_eq!(r.tail_probability, 0.0);
    }
}

#[test]
fn trial_results_do_not_depend_on_pool_size() {
    let e = pauli_pair();
    let probes = canonical_probes(2);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| lln_deviations(&e, &params(16, 0.1, 300), &probes, 99).unwrap().0)
    };
    assert_eq!(run(1), run(7));
}
