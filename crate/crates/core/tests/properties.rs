use ab_peakon::residual::ResidualOptions;
use ab_peakon::*;
use num_rational::Rational64;
use proptest::prelude::*;

fn nonzero_a() -> impl Strategy<Value = f64> {
    prop_oneof![-2.0..-0.05_f64, 0.05..2.0_f64]
}

fn b_off_two() -> impl Strategy<Value = f64> {
    prop_oneof![-1.0..1.9_f64, 2.1..6.0_f64]
}

fn state() -> impl Strategy<Value = PeakonState64> {
    (-3.0..3.0_f64, -3.0..3.0_f64, -5.0..5.0_f64, 0.0..4.0_f64)
        .prop_map(|(p1, p2, q1, dq)| PeakonState::new(p1, p2, q1, q1 + dq))
}

#[test]
fn initial_profiles_are_exact_in_rational_arithmetic() {
    let r = |n, d| Rational64::new(n, d);
    for id in CaseId::ALL {
        let spec = CaseSpec { case_id: id, alpha: r(1, 1), delta: r(1, 2), mu: r(1, 10), c: None };
        let s = make_initial_profile(&spec);
        assert_eq!((s.q1, s.q2), (r(0, 1), r(1, 10)));
        let p = s.p2 * s.p2 - s.p1 * s.p1;
        // 2 alpha delta + delta^2 = 5/4
        let expected = if matches!(id, CaseId::Case1 | CaseId::Case2) { r(-5, 4) } else { r(5, 4) };
        assert_eq!(p, expected);
        assert_eq!(s.p1 * s.p2 < r(0, 1), id.opposite_signs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn classification_matches_quadrant(a in nonzero_a(), b in b_off_two()) {
        let expected = match (a > 0.0, b > 2.0) {
            (true, true) => CaseId::Case1,
            (true, false) => CaseId::Case2,
            (false, true) => CaseId::Case3,
            (false, false) => CaseId::Case4,
        };
        prop_assert_eq!(ABParams::new(a, b).classify(), Ok(Classification::Case(expected)));
    }

    #[test]
    fn preset_momentum_sign_and_separation(a in nonzero_a(), b in b_off_two(), alpha in 0.1..3.0_f64, delta in 0.05..2.0_f64) {
        let params = ABParams::new(a, b);
        if let Ok(spec) = CaseSpec::preset(&params, alpha, delta) {
            let s = make_initial_profile(&spec);
            let p = s.aux().p;
            let gap = 2.0 * alpha * delta + delta * delta;
            let sign = if matches!(spec.case_id, CaseId::Case1 | CaseId::Case2) { -1.0 } else { 1.0 };
            prop_assert!((p - sign * gap).abs() <= 1e-12 * gap.max(1.0));
            prop_assert!(spec.mu > 0.0 && spec.mu <= 1.0);
            // L_a keeps the sign of a on [0, mu]
            for i in 0..=20 {
                let q = spec.mu * i as f64 / 20.0;
                prop_assert!(l_a(a, q) * a > 0.0);
            }
            if let Some(c) = spec.c {
                prop_assert!((l_a(a, spec.mu) - c * a).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn reduced_round_trip(s in state()) {
        let r = s.to_reduced().unwrap();
        prop_assert!(r.defect().abs() <= 1e-12);
        let back = from_reduced_checked(&r, s.q1, 1e-12).unwrap();
        prop_assert!(back.max_abs_diff(&s) <= 1e-14);
        prop_assert!((r.aux().p - s.aux().p).abs() <= 1e-12);
    }

    #[test]
    fn reduced_field_is_the_pushforward(s in state(), a in nonzero_a(), b in -1.0..6.0_f64) {
        let params = ABParams::new(a, b);
        let v = full_rhs(&s, &params);
        let r = s.to_reduced().unwrap();
        let d = reduced_rhs(&r, &params);
        let tol = 1e-10 * (1.0 + s.max_abs().powi(4));
        prop_assert!((d.q - (v.q2 - v.q1)).abs() <= tol);
        prop_assert!((d.h - (v.p2 - v.p1)).abs() <= tol);
        prop_assert!((d.w - (v.p1 + v.p2)).abs() <= tol);
        prop_assert!((d.z - (v.p1 * s.p2 + s.p1 * v.p2)).abs() <= tol);
    }

    #[test]
    fn dynamics_are_translation_invariant(s in state(), shift in -10.0..10.0_f64, a in nonzero_a(), b in -1.0..6.0_f64) {
        let params = ABParams::new(a, b);
        let v = full_rhs(&s, &params);
        let w = full_rhs(&s.translate(shift), &params);
        prop_assert!(v.max_abs_diff(&w) <= 1e-9 * (1.0 + v.max_abs()));
    }

    #[test]
    fn b_two_freezes_momenta(s in state(), a in nonzero_a()) {
        let v = full_rhs(&s, &ABParams::new(a, 2.0));
        prop_assert_eq!((v.p1, v.p2), (0.0, 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn z_invariant_along_random_presets(a in nonzero_a(), b in b_off_two(), alpha in 0.5..1.5_f64, delta in 0.2..1.0_f64) {
        let params = ABParams::new(a, b);
        let Ok(spec) = CaseSpec::preset(&params, alpha, delta) else { return Ok(()) };
        let init = make_initial_profile(&spec);
        let cfg = IntegrationConfig::for_case(&spec, &params).with_representation(Representation::Reduced);
        let traj = integrate(&init, &params, &cfg).unwrap();
        let ctx = InvariantContext::from_initial(params, &init).unwrap();
        let scale = ctx.z0.abs().max(1.0);
        for r in traj.reduced_states() {
            prop_assert!((r.z - ctx.z_closed_form(r.q)).abs() <= 1e-6 * scale);
        }
        let ev = traj.terminal_event();
        prop_assert!(ev.kind != EventKind::Horizon);
        prop_assert!(ev.time <= spec.time_bound(&params) * (1.0 + 1e-9));
    }

    #[test]
    fn round_trip_returns_home(a in nonzero_a(), b in b_off_two()) {
        let params = ABParams::new(a, b);
        let Ok(spec) = CaseSpec::default_for(&params) else { return Ok(()) };
        let init = make_initial_profile(&spec);
        let cfg = IntegrationConfig::for_case(&spec, &params);
        let traj = integrate(&init, &params, &cfg).unwrap();
        let tau = 0.5 * traj.end_time();
        let back = integrate_reversed(&traj.state_at(tau).unwrap(), &params, &cfg, tau).unwrap();
        prop_assert!(back.final_state().max_abs_diff(&init) <= 10.0 * cfg.rel_tol * init.max_abs().max(1.0));
    }

    #[test]
    fn hs_norm_is_a_norm(
        x in state(), y in state(), lambda in -3.0..3.0_f64, s in prop_oneof![Just(0.5), Just(1.0), Just(1.4)],
    ) {
        let idx = SobolevIndex::new(s).unwrap();
        // ||u + v|| through the collision slot: C = -v
        let u = PeakonState::new(x.p1, 0.0, x.q1, x.q2);
        let c = CollisionFunction::new(-y.p1, y.q1);
        let sum = hs_distance(&u, &c, idx).unwrap();
        let nu = hs_norm(&u, idx).unwrap();
        let nc = hs_norm(&PeakonState::new(y.p1, 0.0, y.q1, y.q2), idx).unwrap();
        prop_assert!(sum <= nu + nc + 1e-8);

        let scaled = PeakonState::new(lambda * x.p1, lambda * x.p2, x.q1, x.q2);
        let lhs = hs_norm(&scaled, idx).unwrap();
        prop_assert!((lhs - lambda.abs() * hs_norm(&x, idx).unwrap()).abs() <= 1e-8 * (1.0 + lhs));
    }

    #[test]
    fn hs_distance_is_translation_invariant(x in state(), p in -2.0..2.0_f64, q in -3.0..3.0_f64, delta in -20.0..20.0_f64) {
        let idx = SobolevIndex::new(1.2).unwrap();
        let c = CollisionFunction::new(p, q);
        let d0 = hs_distance(&x, &c, idx).unwrap();
        let d1 = hs_distance(&x.translate(delta), &CollisionFunction::new(p, q + delta), idx).unwrap();
        prop_assert!((d0 - d1).abs() <= 1e-8 * (1.0 + d0));
        prop_assert_eq!(hs_distance(&x, &CollisionFunction::zero(q), idx).unwrap(), hs_norm(&x, idx).unwrap());
    }

    #[test]
    fn d_minus2_is_linear(c1 in -2.0..2.0_f64, c2 in -2.0..2.0_f64, x in -3.0..3.0_f64) {
        let grid = ConvolutionGrid::new(30.0, 1e-2);
        let f = |y: f64| (-y.abs()).exp();
        let g = |y: f64| (-(y * y)).exp() * y;
        let lhs = d_minus2(|y| c1 * f(y) + c2 * g(y), x, &grid, &[0.0]).value;
        let rhs = c1 * d_minus2(f, x, &grid, &[0.0]).value + c2 * d_minus2(g, x, &grid, &[0.0]).value;
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn residual_is_translation_invariant(a in nonzero_a(), b in -1.0..6.0_f64, shift in -5.0..5.0_f64) {
        let params = ABParams::new(a, b);
        let s = PeakonState::new(1.2, -0.6, 0.0, 0.8);
        let v = full_rhs(&s, &params);
        let opts = ResidualOptions::default().with_spacing(1e-2);
        let r0 = pde_residual_at(&s, &v, 2.0, &params, &opts).unwrap();
        let r1 = pde_residual_at(&s.translate(shift), &v, 2.0 + shift, &params, &opts).unwrap();
        prop_assert!((r0 - r1).abs() <= 1e-9);
        prop_assert!(r0.abs() <= 1e-9);
    }
}

#[test]
fn residual_converges_with_grid_refinement() {
    // The ansatz solves the equation, so what remains is quadrature error.
    let params = ABParams::new(1.0 / 3.0, 3.0);
    let s = PeakonState::new(1.5, -1.0, 0.0, 0.4);
    let v = full_rhs(&s, &params);
    let xs = [-1.3, 0.23, 1.7];
    let at = |h: f64| {
        let opts = ResidualOptions::default().with_spacing(h);
        ResidualReport::at_state(&s, &v, &xs, &params, &opts).unwrap()
    };
    let coarse = at(0.2).max_abs_residual;
    let fine = at(0.1).max_abs_residual;
    let finer = at(1e-3).max_abs_residual;
    assert!(finer < 1e-12);
    // sixth-order rule: halving the spacing gains a factor near 64
    assert!(coarse / fine > 30.0, "{coarse:e} -> {fine:e}");
}
