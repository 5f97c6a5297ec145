use halasz_core::dirichlet::{zeta, ComplexPoint};
use halasz_core::extremal::{
    alpha_from_kappa, choose_blocks, reference_spec, theta_at, verify_psum, window_value,
    KappaFunction, KappaSpec, LogLogGrid, regularize_kappa,
};
use halasz_core::halasz::{theta_of_value, HalaszDirection};
use halasz_core::multfun::{
    builtin, summatory_trace, summatory_trace_with_segment, CheckpointGrid,
};
use halasz_core::primes::sieve_primes;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_chain_holds(r in 0.0f64..=1.0, phi in -3.2f64..3.2, t0 in -50.0f64..50.0,
                         pos in any::<bool>(), p in 2u64..1_000_000) {
        let dir = HalaszDirection::new(if pos { 1 } else { -1 }, t0).unwrap();
        let fp = Complex64::from_polar(r, phi);
        let v = theta_of_value(fp, dir, p);
        prop_assert!(v.chain_holds(1e-12));
        prop_assert!(v.theta > -std::f64::consts::PI && v.theta <= std::f64::consts::PI);
        prop_assert!((v.reconstruct() - dir.rotate(fp, p)).norm() < 1e-12);
    }

    #[test]
    fn segment_size_does_not_change_traces(limit in 1u64..20_000, seg in 1u64..5000) {
        let f = builtin("liouville", &[]).unwrap();
        let a = summatory_trace(&f, limit, &CheckpointGrid::default()).unwrap();
        let b = summatory_trace_with_segment(&f, limit, &CheckpointGrid::default(), seg).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn zeta_conjugate_symmetry(sigma in 1.001f64..4.0, t in -40.0f64..40.0) {
        let a = zeta(ComplexPoint::new(sigma, t).unwrap());
        let b = zeta(ComplexPoint::new(sigma, -t).unwrap());
        prop_assert!((a.value - b.value.conj()).norm() <= a.error_bound + b.error_bound + 1e-15);
    }

    #[test]
    fn regularized_kappa_invariants(amp in 0.0f64..0.9, freq in 0.1f64..3.0) {
        let k = regularize_kappa(move |v| 1.0 + amp * (freq * v).sin(),
            LogLogGrid { v_max: 20.0, step: 0.05 }).unwrap();
        let v = k.loglog_points();
        for i in 0..v.len() {
            prop_assert!(k.kappa0_samples()[i] >= k.raw_samples()[i]);
            prop_assert!(k.kappa1_samples()[i] >= k.kappa0_samples()[i] - 1e-12);
            if i > 0 {
                prop_assert!(k.kappa0_samples()[i] >= k.kappa0_samples()[i - 1]);
                prop_assert!(k.kappa1_samples()[i] / v[i].sqrt()
                    <= k.kappa1_samples()[i - 1] / v[i - 1].sqrt() + 1e-12);
            }
        }
        let alpha = alpha_from_kappa(&k, 1.0).unwrap();
        for w in alpha.envelope_samples().windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        for (&x, &e) in alpha.loglog_points().iter().zip(alpha.envelope_samples()) {
            prop_assert!(e >= alpha.formula(x).unwrap());
        }
    }
}

#[test]
fn window_selection_matches_direct_evaluation() {
    let spec = reference_spec(20.0, 3).unwrap();
    let table = sieve_primes(10_000_000).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let p = table.primes()[rng.gen_range(0..table.len())] as u64;
        let lp = (p as f64).ln();
        let in_block = spec
            .blocks
            .iter()
            .any(|b| b.log_x <= lp && lp < b.log_upper);
        let expect = in_block && -lp.sin() >= 0.5;
        assert_eq!(theta_at(&spec, p) != 0.0, expect, "p = {p}");
        assert_eq!(window_value(p) >= 0.5, -lp.sin() >= 0.5);
    }
}

#[test]
fn taylor_remainder_on_selected_primes() {
    let spec = reference_spec(20.0, 3).unwrap();
    let f = halasz_core::extremal::extremal_function(&spec);
    let table = sieve_primes(100_000).unwrap();
    for p in table.iter() {
        let th = theta_at(&spec, p);
        if th == 0.0 {
            continue;
        }
        let lin = Complex64::new(-1.0, -th);
        assert!((f.at_prime(p) - lin).norm() <= th * th / 2.0 + 1e-15, "p = {p}");
    }
}

#[test]
fn extremal_is_class_m() {
    for x1 in [16.0, 20.0, 50.0] {
        for j in 1..=3 {
            let spec = reference_spec(x1, j).unwrap();
            let f = halasz_core::extremal::extremal_function(&spec);
            let report = halasz_core::multfun::class_check(&f, 20_000, 0.0).unwrap();
            assert!(report.claims_consistent(), "x1 = {x1}, J = {j}");
        }
    }
}

#[test]
fn psum_majorant_for_several_specs() {
    let table = sieve_primes(1_000_000).unwrap();
    for x1 in [16.0, 20.0, 50.0] {
        for kappa in ["power:0.25", "const:1", "loglog-fraction:0.5"] {
            let spec: KappaSpec = kappa.parse().unwrap();
            let k = KappaFunction::from_spec(spec, LogLogGrid::default()).unwrap();
            let alpha = alpha_from_kappa(&k, 1.0).unwrap();
            for j in 1..=3 {
                let s = choose_blocks(&alpha, j, x1, 25.0, Some(spec)).unwrap();
                let r = verify_psum(&s, 1_000_000, &table).unwrap();
                assert!(r.passes(), "x1 = {x1}, kappa = {kappa}, J = {j}\n{r}");
            }
        }
    }
}
