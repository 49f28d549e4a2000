use std::f64::consts::PI;

use chernoff_lab::measure::{
    clt_compose, convolution_apply, fourier_shift, heat_apply, JumpDistribution,
    PeriodicGridFunction, ShiftProcessSpec,
};
use num_complex::Complex64;
use proptest::prelude::*;

const L: f64 = 2.0 * PI;

/// Real trigonometric polynomial with modes `|k| <= 4`.
fn trig() -> impl Strategy<Value = Vec<(i64, f64, f64)>> {
    prop::collection::vec((0i64..=4, -1.0..1.0f64, -1.0..1.0f64), 1..5)
}

fn eval(modes: &[(i64, f64, f64)], x: f64) -> f64 {
    modes
        .iter()
        .map(|&(k, a, b)| a * (k as f64 * x).cos() + b * (k as f64 * x).sin())
        .sum()
}

fn grid(modes: &[(i64, f64, f64)], n: usize) -> PeriodicGridFunction {
    let m = modes.to_vec();
    PeriodicGridFunction::from_fn(L, n, move |x| Complex64::new(eval(&m, x), 0.0)).unwrap()
}

fn jump() -> impl Strategy<Value = JumpDistribution> {
    prop_oneof![
        (0.1..3.0f64).prop_map(|amplitude| JumpDistribution::Rademacher { amplitude }),
        (0.1..0.9f64, 0.2..2.0f64).prop_map(|(p, a)| {
            // mean zero: p a + (1 - p) b = 0
            JumpDistribution::TwoPoint { a, b: -p * a / (1.0 - p), p }
        }),
        (0.1..2.0f64).prop_map(|s| JumpDistribution::DiscreteUniform { values: vec![-s, 0.0, s] }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shifts_compose(modes in trig(), s1 in -20.0..20.0f64, s2 in -20.0..20.0f64) {
        let u = grid(&modes, 64);
        let two = fourier_shift(&fourier_shift(&u, s1), s2);
        let one = fourier_shift(&u, s1 + s2);
        prop_assert!(two.sup_distance(&one) <= 1e-12);
    }

    #[test]
    fn grid_aligned_convolution_is_a_contraction(
        values in prop::collection::vec(-1.0..1.0f64, 64),
        steps in 1i64..8,
        t in 0.1..4.0f64,
    ) {
        // jumps that are whole grid steps after the sqrt(t) scaling
        let h = L / 64.0;
        let a = steps as f64 * h / t.sqrt();
        let u = PeriodicGridFunction::new(L, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect()).unwrap();
        let spec = ShiftProcessSpec::new(JumpDistribution::Rademacher { amplitude: a }).unwrap();
        let w = convolution_apply(&u, &spec, t).unwrap();
        prop_assert!(w.sup_norm() <= u.sup_norm() + 1e-12);
    }

    #[test]
    fn convolution_does_not_exceed_continuous_sup(modes in trig(), j in jump(), t in 0.01..4.0f64) {
        let u = grid(&modes, 64);
        let spec = ShiftProcessSpec::new(j).unwrap();
        let w = convolution_apply(&u, &spec, t).unwrap();
        // sup of the band-limited interpolant: fine sampling plus the
        // quadratic bound between samples
        let fine = grid(&modes, 1 << 14);
        let curvature: f64 = modes.iter().map(|&(k, a, b)| (a.abs() + b.abs()) * (k * k) as f64).sum();
        let spacing = L / (1 << 14) as f64;
        let bound = fine.sup_norm() + curvature * spacing * spacing / 8.0;
        prop_assert!(w.sup_norm() <= bound + 1e-12, "{} > {}", w.sup_norm(), bound);
    }

    #[test]
    fn mass_is_conserved(modes in trig(), offset in -3.0..3.0f64, j in jump(), t in 0.01..4.0f64, n in 1u32..300) {
        let mut m = modes.clone();
        m.push((0, offset, 0.0));
        let u = grid(&m, 128);
        let spec = ShiftProcessSpec::new(j).unwrap();
        let c0 = u.fourier_coefficients()[0];
        let tol = 1e-14 * (1.0 + u.sup_norm());
        for w in [
            convolution_apply(&u, &spec, t).unwrap(),
            clt_compose(&u, &spec, t, n).unwrap(),
            heat_apply(&u, t, spec.variance()).unwrap(),
        ] {
            prop_assert!((w.fourier_coefficients()[0] - c0).norm() <= tol);
        }
    }

    #[test]
    fn single_mode_closed_form(k in 1i64..20, j in jump(), t in 0.01..4.0f64, n in 1u32..2000, sine in any::<bool>()) {
        let modes = if sine { vec![(k, 0.0, 1.0)] } else { vec![(k, 1.0, 0.0)] };
        let u = grid(&modes, 64);
        let spec = ShiftProcessSpec::new(j.clone()).unwrap();
        let w = clt_compose(&u, &spec, t, n).unwrap();
        // E[cos(k(x - s Z))] for one step, then n-th power of the (real) multiplier
        let s = (t / n as f64).sqrt();
        let phi: f64 = j.atoms().iter().map(|&(z, p)| p * (k as f64 * s * z).cos()).sum();
        let sin_part: f64 = j.atoms().iter().map(|&(z, p)| p * (k as f64 * s * z).sin()).sum();
        let mult = Complex64::new(phi, -sin_part).powu(n);
        let expected = PeriodicGridFunction::from_fn(L, 64, |x| {
            let e = Complex64::new(0.0, k as f64 * x).exp() * mult;
            let em = Complex64::new(0.0, -k as f64 * x).exp() * mult.conj();
            if sine { (e - em) / Complex64::new(0.0, 2.0) } else { (e + em) / 2.0 }
        }).unwrap();
        prop_assert!(w.sup_distance(&expected) <= 1e-12);
    }
}
