use ab_peakon::*;

fn case1() -> (ABParams64, CaseSpec64, PeakonState64) {
    let params = ABParams64::new(1.0 / 3.0, 3.0);
    let spec = CaseSpec::default_for(&params).unwrap();
    (params, spec, make_initial_profile(&spec))
}

#[test]
fn single_peakon_moves_at_constant_speed() {
    let params = ABParams64::new(1.0 / 3.0, 3.0);
    let init = PeakonState64::new(1.0, 0.0, 0.0, 30.0);
    let traj = integrate(&init, &params, &IntegrationConfig::default().with_max_time(5.0)).unwrap();
    assert_eq!(traj.terminal_event().kind, EventKind::Horizon);
    assert_eq!(traj.end_time(), 5.0);
    for (&t, s) in traj.times().iter().zip(traj.states()) {
        assert!((s.q1 - 2.0 / 3.0 * t).abs() < 1e-12);
    }

    let back = integrate_reversed(traj.final_state(), &params, &IntegrationConfig::default(), 5.0).unwrap();
    assert_eq!(back.direction(), Direction::Reversed);
    assert!(back.final_state().q1.abs() < 1e-12);
}

#[test]
fn case1_collides_within_bound() {
    let (params, spec, init) = case1();
    let traj = integrate(&init, &params, &IntegrationConfig::for_case(&spec, &params)).unwrap();
    let ev = traj.locate_collision().expect("collision");
    assert!(ev.time > 0.0 && ev.time <= 0.24);
    assert!(ev.state_at_event.separation().abs() <= 1e-12);
    assert_eq!(traj.end_time(), ev.time);
    assert!(traj.times().windows(2).all(|w| w[1] > w[0]));
    // q > 0 strictly before the event on output points
    let n = traj.states().len();
    assert!(traj.states()[..n - 1].iter().all(|s| s.separation() > 0.0));
    assert_eq!(locate_collision(&traj).as_ref(), Some(ev));
}

#[test]
fn event_time_self_converges() {
    let (params, spec, init) = case1();
    let t = |rel: f64| {
        let cfg = IntegrationConfig::for_case(&spec, &params).with_tolerances(rel, rel * 1e-2);
        integrate(&init, &params, &cfg).unwrap().terminal_event().time
    };
    for rel in [1e-8, 1e-10] {
        assert!((t(rel) - t(rel / 2.0)).abs() <= 100.0 * rel);
    }
}

#[test]
fn frozen_momenta_when_b_is_two() {
    let params = ABParams64::new(0.7, 2.0);
    let init = PeakonState64::new(1.5, -1.0, 0.0, 0.3);
    let traj = integrate(&init, &params, &IntegrationConfig::default().with_max_time(3.0)).unwrap();
    for s in traj.states() {
        assert_eq!((s.p1, s.p2), (1.5, -1.0));
    }
}

#[test]
fn far_equal_peakons_never_collide() {
    let params = ABParams64::new(1.0 / 3.0, 2.0);
    let init = PeakonState64::new(1.0, 1.0, 0.0, 20.0);
    let traj = integrate(&init, &params, &IntegrationConfig::default().with_max_time(10.0)).unwrap();
    assert!(traj.locate_collision().is_none());
    assert_eq!(traj.terminal_event().kind, EventKind::Horizon);
    // h = 0 here, so q stays put
    assert!((traj.final_state().separation() - 20.0).abs() < 1e-12);

    let ahead = PeakonState64::new(1.0, 1.5, 0.0, 20.0);
    let traj = integrate(&ahead, &params, &IntegrationConfig::default().with_max_time(10.0)).unwrap();
    assert!(traj.locate_collision().is_none());
    let r = ahead.to_reduced().unwrap();
    assert!(r.h * r.w > 0.0);
    assert!(full_rhs(&ahead, &params).q2 > full_rhs(&ahead, &params).q1);
    assert!(traj.final_state().separation() > 20.0);
}

#[test]
fn zero_separation_collides_immediately() {
    let params = ABParams64::new(1.0, 3.0);
    let init = PeakonState64::new(1.0, -0.5, 0.2, 0.2);
    let traj = integrate(&init, &params, &IntegrationConfig::default()).unwrap();
    let ev = traj.terminal_event();
    assert_eq!((ev.kind, ev.time), (EventKind::Collision, 0.0));
    assert_eq!(traj.times(), &[0.0]);
}

#[test]
fn momentum_event_is_located() {
    // Case 1 at a larger b with a small trailing antipeakon drives p2 to 0
    // before the peaks meet.
    let params = ABParams64::new(1.0, 8.0);
    let init = PeakonState64::new(2.0, -0.2, 0.0, 0.5);
    let cfg = IntegrationConfig::default().with_max_time(10.0);
    let traj = integrate(&init, &params, &cfg).unwrap();
    let ev = traj.terminal_event();
    match ev.kind {
        EventKind::MomentumZero1 => assert!(ev.state_at_event.p1.abs() <= cfg.event_tol),
        EventKind::MomentumZero2 => assert!(ev.state_at_event.p2.abs() <= cfg.event_tol),
        EventKind::Collision => assert!(ev.state_at_event.separation().abs() <= cfg.event_tol),
        EventKind::Horizon => panic!("no event"),
    }
}

#[test]
fn zero_duration_reversal_is_identity() {
    let (params, _, init) = case1();
    let back = integrate_reversed(&init, &params, &IntegrationConfig::default(), 0.0).unwrap();
    assert_eq!(back.final_state(), &init);
    assert_eq!(back.state_at(0.0).unwrap(), init);
}

#[test]
fn case2_round_trip() {
    let params = ABParams64::new(1.0 / 3.0, 1.0);
    let spec = CaseSpec::default_for(&params).unwrap();
    let init = make_initial_profile(&spec);
    let cfg = IntegrationConfig::for_case(&spec, &params);
    let traj = integrate(&init, &params, &cfg).unwrap();
    let t1 = traj.end_time() - 1e-3;
    let back = integrate_reversed(&traj.state_at(t1).unwrap(), &params, &cfg, t1).unwrap();
    assert!(back.final_state().max_abs_diff(&init) <= 1e-6);
    // reversed-time interpolation hits the forward states
    let mid = 0.5 * t1;
    let fwd = traj.state_at(t1 - mid).unwrap();
    assert!(back.state_at(mid).unwrap().max_abs_diff(&fwd) <= 1e-8);
}

#[test]
fn dense_output_and_velocity() {
    let (params, spec, init) = case1();
    for repr in [Representation::Full, Representation::Reduced] {
        let cfg = IntegrationConfig::for_case(&spec, &params).with_representation(repr);
        let traj = integrate(&init, &params, &cfg).unwrap();
        let t = 0.37 * traj.end_time();
        let st = traj.state_at(t).unwrap();
        let v = traj.velocity_at(t).unwrap();
        let exact = full_rhs(&st, &params);
        assert!(v.max_abs_diff(&exact) < 1e-6, "{repr:?}: {v:?} vs {exact:?}");
        assert!(matches!(traj.state_at(-1.0), Err(Error::TimeOutOfRange { .. })));
        assert!(matches!(traj.state_at(traj.end_time() + 1.0), Err(Error::TimeOutOfRange { .. })));
    }
}

#[test]
fn reduced_rejects_reversed_orientation() {
    let params = ABParams64::new(1.0, 3.0);
    let cfg = IntegrationConfig::default().with_representation(Representation::Reduced);
    let r = integrate(&PeakonState64::new(1.0, 1.0, 0.5, 0.0), &params, &cfg);
    assert!(matches!(r, Err(Error::Orientation { .. })));
}

#[test]
fn step_budget_is_reported() {
    let (params, _, init) = case1();
    let cfg = IntegrationConfig { max_steps: 3, ..IntegrationConfig::default() };
    assert!(matches!(integrate(&init, &params, &cfg), Err(Error::TooManySteps { .. })));
}

#[test]
fn single_precision_run() {
    let params = ABParams::new(1.0_f32 / 3.0, 3.0);
    let spec = CaseSpec::default_for(&params).unwrap();
    let cfg = IntegrationConfig {
        rel_tol: 1e-5,
        abs_tol: 1e-6,
        event_tol: 1e-6,
        ..IntegrationConfig::for_case(&spec, &params)
    };
    let traj = integrate(&make_initial_profile(&spec), &params, &cfg).unwrap();
    let ev = traj.terminal_event();
    assert_eq!(ev.kind, EventKind::Collision);
    assert!((ev.time - 0.113_128_95).abs() < 1e-4);
}
