use pistonpipe::scenarios::{
    constant_outflow, equilibrium, perturbed_closed, standard_suite, stiff_outflow,
};
use pistonpipe::solver::{fixed_step_eta_trajectory, step_with_dt, whole_horizon_fixed_point};
use pistonpipe::*;

#[test]
fn equilibrium_survives_many_fixed_steps() {
    let sc = equilibrium(64, 1.0).unwrap();
    let mut s = sc.initial.clone();
    for _ in 0..2000 {
        s = step_with_dt(&s, &sc.schedule, &sc.params, &sc.cfg, 1e-3)
            .unwrap()
            .state;
    }
    let drift = s
        .grid
        .v
        .iter()
        .map(|v| (v - 1.0).abs())
        .chain(s.grid.u.iter().map(|u| u.abs()))
        .fold(0.0, f64::max);
    assert!(drift < 1e-10, "drift {drift}");
    assert!((s.piston.b - 1.0).abs() < 1e-10);
}

#[test]
fn closed_pipe_loses_energy_and_keeps_mass() {
    let mut sim = perturbed_closed(64, 0.1, 2.0)
        .unwrap()
        .simulation()
        .unwrap();
    assert_eq!(sim.run().event, RunEvent::Completed);
    let e0 = sim.series[0].energy;
    for w in sim.series.windows(2) {
        assert!(w[1].energy <= w[0].energy + 1e-8 * e0);
        assert!(w[1].dissipation_cum >= w[0].dissipation_cum);
        assert_eq!(w[1].eta, sim.series[0].eta);
    }
    assert!(energy_budget_residual(&sim.series).unwrap() < 1e-3);
}

#[test]
fn outflow_mass_matches_accumulated_flux() {
    let mut sim = constant_outflow(32, 0.5, 0.2)
        .unwrap()
        .simulation()
        .unwrap();
    sim.run();
    let eta0 = sim.series[0].eta;
    for w in sim.series.windows(2) {
        assert!(w[1].eta < w[0].eta);
        assert!(w[1].outflux_pressure_cum >= w[0].outflux_pressure_cum);
    }
    for r in &sim.series {
        assert!((r.eta - eta0 - r.eta_flux_cum).abs() < 1e-12);
    }
    // the recorded boundary volume integrates to the mass drop
    let flux: f64 = sim
        .series
        .windows(2)
        .map(|w| 0.5 * (w[1].t - w[0].t) * 0.5 * (1.0 / w[0].v_boundary + 1.0 / w[1].v_boundary))
        .sum();
    let lost = eta0 - sim.state.grid.eta;
    assert!((lost - flux).abs() < 1e-3, "lost {lost}, flux {flux}");
    assert!(lost > 0.08 && lost < 0.1);
}

#[test]
fn b_drift_shrinks_under_refinement() {
    let drift = |n: usize| {
        let mut sc = standard_suite(n).unwrap().remove(0);
        sc.cfg.dt_max = 0.25 / n as f64;
        sc.cfg.dt_initial = sc.cfg.dt_max;
        let mut sim = sc.simulation().unwrap();
        sim.run();
        sim.recorder.max_b_drift
    };
    let (d1, d2) = (drift(64), drift(128));
    assert!((d1 / d2).log2() >= 1.0, "{d1} {d2}");
}

#[test]
fn outflow_energy_budget_shrinks_under_refinement() {
    let budget = |n: usize| {
        let mut sc = standard_suite(n).unwrap().remove(3);
        sc.cfg.dt_max = 0.8 / n as f64;
        let mut sim = sc.simulation().unwrap();
        sim.run();
        energy_budget_residual(&sim.series).unwrap()
    };
    let (r1, r2) = (budget(128), budget(256));
    assert!((r1 / r2).log2() >= 0.9, "{r1} {r2}");
}

#[test]
fn standard_suite_respects_bounds() {
    for sc in standard_suite(32).unwrap() {
        let mut sim = sc.simulation().unwrap();
        assert_eq!(sim.run().event, RunEvent::Completed, "{}", sc.name);
        assert!(
            sim.recorder.max_bound_ratio <= 1.05,
            "{}: {}",
            sc.name,
            sim.recorder.max_bound_ratio
        );
        assert!(sim.stats.picard_iterations_max <= 5, "{}", sc.name);
        assert!(sim.series.iter().all(|r| r.energy > 0.0));
        let m = total_mass(&sim.state).unwrap();
        assert!((m.eta - m.eulerian).abs() < 1e-2, "{}", sc.name);
    }
}

#[test]
fn exponent_from_series_matches_recorder() {
    let mut sim = standard_suite(32).unwrap().remove(1).simulation().unwrap();
    sim.run();
    let g = exponent_g(&sim.series, &sim.state, &sim.params).unwrap();
    let last = sim.series.last().unwrap().g_exponent;
    assert!((g - last).abs() < 1e-12 * (1.0 + g.abs()), "{g} {last}");
}

#[test]
fn stiff_outflow_never_fails_silently() {
    let mut sim = stiff_outflow(32).unwrap().simulation().unwrap();
    let out = sim.run();
    match out.event {
        RunEvent::Completed => assert!(sim.state.grid.eta < 1.0),
        RunEvent::Failure { .. } => assert!(out.stats.rejections > 0),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn events_follow_the_contact_lower_bound() {
    for u0 in [0.3, 1.0] {
        let sc = constant_outflow(32, u0, 3.0 / u0).unwrap();
        let mut sim = sc.simulation().unwrap();
        let t_event = match sim.run().event {
            RunEvent::Contact { t } | RunEvent::Depleted { t } => t,
            other => panic!("expected a terminal event, got {other:?}"),
        };
        let bound = contact_time_lower_bound(
            1.0,
            &sc.schedule.u_out,
            0.0,
            sc.schedule.t_end,
            sim.recorder.min_boundary_v.unwrap(),
        )
        .unwrap();
        assert!(t_event >= bound, "{t_event} < {bound}");
    }
}

#[test]
fn fixed_point_agrees_with_per_step_solve() {
    let sc = constant_outflow(32, 0.1, 1.0).unwrap();
    let dt = 1e-3;
    let fp = whole_horizon_fixed_point(
        &sc.initial,
        &sc.schedule,
        &sc.params,
        &sc.cfg,
        0.05,
        dt,
        1e-10,
        30,
    )
    .unwrap();
    assert!(fp.residuals.windows(2).all(|w| w[1] < w[0]));
    let (eta, rates) =
        fixed_step_eta_trajectory(&sc.initial, &sc.schedule, &sc.params, &sc.cfg, 0.05, dt)
            .unwrap();
    let max_rate = rates.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let gap = eta
        .iter()
        .zip(&fp.eta)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(gap <= 2.0 * dt * max_rate);
}

#[test]
fn fixed_point_needs_outflow_state() {
    let sc = standard_suite(16).unwrap().remove(0);
    assert!(matches!(
        whole_horizon_fixed_point(
            &sc.initial,
            &sc.schedule,
            &sc.params,
            &sc.cfg,
            0.05,
            1e-3,
            1e-10,
            30
        ),
        Err(Error::State(_))
    ));
}

#[test]
fn resume_reproduces_the_trajectory() {
    let sc = standard_suite(32).unwrap().remove(0);
    let mut full = sc.simulation().unwrap();
    full.run();

    let mut first = sc.simulation().unwrap();
    while first.state.t < 0.7 {
        first.advance();
    }
    let cut = first.series.len();
    let mut second = Simulation::resume(
        first.state.clone(),
        first.recorder.clone(),
        first.stats.clone(),
        sc.schedule.clone(),
        sc.params,
        sc.cfg,
    )
    .unwrap();
    second.run();
    assert_eq!(&full.series[cut..], &second.series[..]);
}

#[test]
fn runs_are_deterministic() {
    let sc = standard_suite(32).unwrap().remove(2);
    let (mut a, mut b) = (sc.simulation().unwrap(), sc.simulation().unwrap());
    a.run();
    b.run();
    assert_eq!(format!("{:?}", a.series), format!("{:?}", b.series));
}
