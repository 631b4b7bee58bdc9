use num_bigint::BigInt;
use proptest::prelude::*;

use wave_hum::diophantine::{
    continued_fraction, convergents, dual_weight_norm, sine_gap_scan, within_inverse_square, DualWeightNorm, RealSpec,
};
use wave_hum::hum::{simulate_controlled, solve_hum, HumOptions};
use wave_hum::observability::{
    assemble_gram, max_quotient, min_quotient, observed_energy, raw_spectrum_bounds, ObservationGeometry,
};
use wave_hum::spectral::{
    dual_pairing, evolve_free, from_traveling_wave, state_norm, to_traveling_wave, DomainSpec, ModalState, SobolevIndex,
};

fn domain_strategy() -> impl Strategy<Value = DomainSpec> {
    prop_oneof![
        (1usize..=24).prop_map(|n| DomainSpec::interval(n).unwrap()),
        (1usize..=5, 1usize..=5).prop_map(|(a, b)| DomainSpec::square(a, b).unwrap()),
    ]
}

fn state_on(domain: DomainSpec) -> impl Strategy<Value = ModalState> {
    let n = domain.len();
    (prop::collection::vec(-10.0f64..10.0, n), prop::collection::vec(-100.0f64..100.0, n))
        .prop_map(move |(p, v)| ModalState::new(domain, p, v).unwrap())
}

fn state_strategy() -> impl Strategy<Value = ModalState> {
    domain_strategy().prop_flat_map(state_on)
}

fn state_pair() -> impl Strategy<Value = (ModalState, ModalState)> {
    domain_strategy().prop_flat_map(|d| (state_on(d), state_on(d)))
}

fn square_state(k: usize) -> impl Strategy<Value = ModalState> {
    state_on(DomainSpec::square(k, k).unwrap())
}

fn surd_strategy() -> impl Strategy<Value = RealSpec> {
    (
        prop::sample::select(vec![2i64, 3, 5, 6, 7, 10, 11, 13, 14, 15, 17, 19, 21]),
        1i64..6,
        1i64..30,
        any::<bool>(),
        0i64..40,
    )
        .prop_filter_map("value outside (0,1)", |(d, b, c, neg, shift)| {
            let b = if neg { -b } else { b };
            let root = (b as f64) * (d as f64).sqrt();
            let a = (-root).ceil() as i64 + shift;
            RealSpec::surd(a, b, d, c).ok()
        })
}

fn rational_strategy() -> impl Strategy<Value = RealSpec> {
    (2i64..100_000, 1i64..100_000).prop_filter_map("not reduced", |(q, p)| RealSpec::rational(p % q, q).ok())
}

fn nonzero_norm(s: &ModalState) -> bool {
    state_norm(s, SobolevIndex::ENERGY) > 1e-6
}

proptest! {
    #[test]
    fn free_evolution_conserves_norms(s in state_strategy(), t in -50.0f64..50.0) {
        prop_assume!(nonzero_norm(&s));
        let e = evolve_free(&s, t);
        for pair in [SobolevIndex::ENERGY, SobolevIndex::WEAK] {
            let (a, b) = (state_norm(&s, pair), state_norm(&e, pair));
            prop_assert!((a - b).abs() <= 1e-12 * a, "{pair:?}: {a} vs {b}");
        }
    }

    #[test]
    fn traveling_wave_round_trip(s in state_strategy()) {
        prop_assume!(nonzero_norm(&s));
        let tw = to_traveling_wave(&s);
        for (p, m) in tw.plus.iter().zip(&tw.minus) {
            prop_assert_eq!(*m, p.conj());
        }
        let back = from_traveling_wave(&tw);
        let err: f64 = back.pos().iter().zip(s.pos()).chain(back.vel().iter().zip(s.vel()))
            .map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = s.pos().iter().chain(s.vel()).map(|x| x.abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-13 * scale);
    }

    #[test]
    fn pairing_bilinear_antisymmetric((a, b) in state_pair(), c in -3.0f64..3.0, t in 0.0f64..20.0) {
        let ab = dual_pairing(&a, &b).unwrap();
        prop_assert_eq!(ab, -dual_pairing(&b, &a).unwrap());
        prop_assert_eq!(dual_pairing(&a, &a).unwrap(), 0.0);
        let lhs = dual_pairing(&a.add_scaled(c, &b).unwrap(), &b).unwrap();
        let scale = 1.0 + ab.abs() + state_norm(&a, SobolevIndex::new(0.25)) * state_norm(&b, SobolevIndex::new(0.25));
        prop_assert!((lhs - ab).abs() <= 1e-12 * scale);
        // free evolution is symplectic for the pairing
        let moved = dual_pairing(&evolve_free(&a, t), &evolve_free(&b, t)).unwrap();
        prop_assert!((moved - ab).abs() <= 1e-10 * scale);
    }

    #[test]
    fn quotient_is_scale_invariant_and_bracketed(s in square_state(4), t in 0.5f64..12.0, c in 0.1f64..10.0) {
        prop_assume!(nonzero_norm(&s));
        let g = ObservationGeometry::square_left_edge(t).unwrap();
        let gram = assemble_gram(&g, s.domain()).unwrap();
        let obs = observed_energy(&s, &gram).unwrap();
        let scaled = observed_energy(&s.scaled(c), &gram).unwrap();
        prop_assert!((scaled - c * c * obs).abs() <= 1e-10 * scaled.max(1e-300));
        let q = obs / state_norm(&s, SobolevIndex::WEAK).powi(2);
        let lo = min_quotient(&gram, SobolevIndex::WEAK).unwrap().value;
        let hi = max_quotient(&gram, SobolevIndex::WEAK).unwrap();
        prop_assert!(q >= lo - 1e-9 * hi && q <= hi * (1.0 + 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gram_is_positive_semidefinite(d in domain_strategy(), t in 0.01f64..15.0, xi in 0.01f64..0.99) {
        let g = match d {
            DomainSpec::Square { .. } => ObservationGeometry::square_left_edge(t).unwrap(),
            DomainSpec::Interval { .. } => ObservationGeometry::interval_point(xi, t).unwrap(),
        };
        let gram = assemble_gram(&g, &d).unwrap();
        let (lo, hi) = raw_spectrum_bounds(&gram).unwrap();
        prop_assert!(lo >= -1e-10 * hi.abs().max(1.0), "{lo} vs {hi}");
    }

    #[test]
    fn hum_optimality_and_annihilation(target in square_state(5), t in 8.5f64..12.0) {
        prop_assume!(nonzero_norm(&target));
        let g = ObservationGeometry::square_left_edge(t).unwrap();
        let gram = assemble_gram(&g, target.domain()).unwrap();
        let opts = HumOptions::default();
        let sol = solve_hum(&target, &gram, &opts).unwrap();
        prop_assert!(sol.residual <= opts.tol);
        let end = simulate_controlled(&target, &sol.control, t).unwrap();
        let (z0, z1) = (state_norm(&target, SobolevIndex::WEAK), state_norm(&end, SobolevIndex::WEAK));
        // the whitened residual bounds the final state only up to conditioning
        prop_assert!(z1 <= 1e-6 * z0, "{z1} vs {z0}");
        let obs = observed_energy(&sol.minimizer, &gram).unwrap();
        let pairing = dual_pairing(&sol.minimizer, &target).unwrap();
        prop_assert!((pairing + obs).abs() <= 1e-8 * obs);
    }

    #[test]
    fn surd_period_is_sound(x in surd_strategy()) {
        let cf = continued_fraction(&x, 0).unwrap();
        let p = cf.periodic.unwrap();
        prop_assert!(!p.is_empty() && p.cycle.iter().all(|&a| a >= 1));
        // unroll far past the detected cycle and compare with the raw expansion
        let n = p.preperiod + 3 * p.len() + 5;
        let long = continued_fraction(&x, n).unwrap();
        for i in p.preperiod..n {
            prop_assert_eq!(long.quotients[i], p.cycle[(i - p.preperiod) % p.len()]);
        }
        // cross-check with the floating value for the first few quotients
        let mut y = x.to_f64();
        for &a in long.quotients.iter().take(4) {
            y = 1.0 / y;
            prop_assert_eq!(y.floor() as u64, a);
            y -= a as f64;
        }
    }

    #[test]
    fn surd_convergents_within_inverse_square(x in surd_strategy()) {
        let cf = continued_fraction(&x, 30).unwrap();
        for (p, q) in convergents(&cf.quotients) {
            prop_assert!(within_inverse_square(&x, &p, &q).unwrap(), "{p}/{q}");
        }
    }

    #[test]
    fn gap_scan_reflection_symmetric(x in prop_oneof![surd_strategy(), rational_strategy()], n in 1u64..400) {
        let (a, b) = (sine_gap_scan(&x, n).unwrap(), sine_gap_scan(&x.reflect(), n).unwrap());
        prop_assert!((a.min_value - b.min_value).abs() <= 1e-12);
        if matches!(x, RealSpec::QuadraticSurd { .. }) {
            prop_assert!(a.min_value > 0.0);
        }
    }
}

proptest! {
    #[test]
    fn rational_expansion_reconstructs(x in rational_strategy()) {
        let (p, q) = match x { RealSpec::Rational { p, q } => (p, q), _ => unreachable!() };
        let cf = continued_fraction(&x, usize::MAX).unwrap();
        prop_assert!(cf.terminated && cf.quotients.iter().all(|&a| a >= 1));
        prop_assert_eq!(convergents(&cf.quotients).pop().unwrap(), (BigInt::from(p), BigInt::from(q)));
    }

    #[test]
    fn dual_weight_monotone_in_truncation(
        coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..80),
        x in prop_oneof![surd_strategy(), rational_strategy()],
    ) {
        let (a, b): (Vec<f64>, Vec<f64>) = coeffs.into_iter().unzip();
        let mut prev = 0.0;
        for n in 1..=a.len() {
            match dual_weight_norm(&a[..n], &b[..n], &x).unwrap() {
                DualWeightNorm::Finite { value } => {
                    prop_assert!(value >= prev);
                    prev = value;
                }
                DualWeightNorm::Infinite { .. } => {
                    // stays infinite once infinite
                    let rest = dual_weight_norm(&a, &b, &x).unwrap();
                    prop_assert!(matches!(rest, DualWeightNorm::Infinite { .. }), "infinite prefix but finite whole");
                    break;
                }
            }
        }
    }
}
