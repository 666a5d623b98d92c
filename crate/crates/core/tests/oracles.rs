use pistonpipe::coords::GridCoefficients;
use pistonpipe::oracle::*;
use pistonpipe::solver::momentum_piston_solve;
use pistonpipe::*;

#[test]
fn standard_case_converges_at_first_order() {
    let case = ManufacturedCase::standard();
    let r = convergence_order(&case, &[16, 32, 64], |n| 0.25 / n as f64, 0.5, 1.0).unwrap();
    assert!(r.order >= 1.0, "{}", r.to_csv());
}

#[test]
fn moving_domain_case_converges() {
    // upwinding on the moving grid is first order; the errors must halve
    // roughly with the grid
    let case = ManufacturedCase::moving_domain();
    let r = convergence_order(&case, &[16, 32, 64], |n| 0.25 / n as f64, 0.5, 1.0).unwrap();
    assert!(r.order >= 0.95, "{}", r.to_csv());
}

#[test]
fn diffusion_case_converges_at_second_order() {
    let case = ManufacturedCase::diffusion();
    let r = convergence_order(&case, &[16, 32, 64], |n| 0.25 / n as f64, 0.5, 0.5).unwrap();
    assert!(r.order >= 1.8, "{}", r.to_csv());
}

#[test]
fn stalled_refinement_is_reported_with_the_table() {
    // the same resolution twice cannot show decreasing errors
    let case = ManufacturedCase::standard();
    match convergence_order(&case, &[16, 16], |n| 0.25 / n as f64, 0.2, 1.0) {
        Err(Error::NotConvergent(table)) => {
            assert!(table.starts_with("n_cells,dt,err_v,err_u,order"))
        }
        other => panic!("expected a convergence failure, got {other:?}"),
    }
}

#[test]
fn inviscid_step_agrees_with_piston_oracle_to_second_order() {
    // uniform gas at rest, spring off balance: with tiny viscosity the gas
    // load on the piston is q(1) up to the acoustic response, which is O(dt^2)
    // in one step, and the edge-0 volume has inertia 1 + dy/2
    let params = Params {
        mu: 1e-12,
        b_rest: -0.5,
        ..Params::default()
    };
    let n = 32;
    let grid = GridState::uniform(n, 1.0, 0.0, 1.0).unwrap();
    let piston = PistonState { b: 1.0, b_dot: 0.0 };
    let coeffs = GridCoefficients::frozen(1.0, n).unwrap();
    let mass = 1.0 + 0.5 / n as f64;
    let gap = |dt: f64| {
        let (u, p) = momentum_piston_solve(&grid, &coeffs, &piston, &params, 0.0, dt, 1.0).unwrap();
        assert_eq!(u[0], p.b_dot);
        let traj = piston_ode_oracle_with_mass(&params, mass, |_| 1.0, 1.0, 0.0, dt, dt).unwrap();
        assert!((p.b - traj[1][1] - dt * (p.b_dot - traj[1][2])).abs() < 1e-15);
        (p.b_dot - traj[1][2]).abs()
    };
    let (g1, g2) = (gap(1e-3), gap(5e-4));
    assert!(g1 < 1e-4 * 1e-3, "{g1}");
    assert!(g1 / g2 > 3.5, "{g1} {g2}");
}
