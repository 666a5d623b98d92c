//! Reference scenarios shared by the tests, the benchmarks and the CLI checks.

use crate::coords::EulerianField;
use crate::error::Result;
use crate::model::{BoundarySchedule, Params};
use crate::profile::Profile;
use crate::solver::{NumericsConfig, SimState, Simulation};

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub params: Params,
    pub cfg: NumericsConfig,
    pub schedule: BoundarySchedule,
    pub initial: SimState,
}

impl Scenario {
    pub fn simulation(&self) -> Result<Simulation> {
        Simulation::new(
            self.initial.clone(),
            self.schedule.clone(),
            self.params,
            self.cfg,
        )
    }
}

#[allow(clippy::too_many_arguments)]
fn build(
    name: &'static str,
    params: Params,
    n_cells: usize,
    b: f64,
    b_dot: f64,
    rho: impl Fn(f64) -> f64,
    u: impl Fn(f64) -> f64,
    schedule: BoundarySchedule,
) -> Result<Scenario> {
    let cfg = NumericsConfig {
        n_cells,
        ..NumericsConfig::default()
    };
    let field = EulerianField::sample(b, 4 * n_cells + 1, rho, u)?;
    let (initial, _) = SimState::from_eulerian(&field, b_dot, 0.0, &schedule, &cfg)?;
    Ok(Scenario {
        name,
        params,
        cfg,
        schedule,
        initial,
    })
}

/// Closed pipe: zero open-end velocity, outflow regime throughout.
pub fn closed_schedule(t_end: f64) -> BoundarySchedule {
    BoundarySchedule {
        t_star: 0.0,
        t_end,
        u_in: Profile::constant(0.0),
        rho_in: Profile::constant(1.0),
        u_out: Profile::constant(0.0),
    }
}

/// Uniform gas at rest balancing the spring: `v = 1`, `b = 1`, `K (b - b_rest) = 1`.
pub fn equilibrium(n_cells: usize, t_end: f64) -> Result<Scenario> {
    build(
        "equilibrium",
        Params::default(),
        n_cells,
        1.0,
        0.0,
        |_| 1.0,
        |_| 0.0,
        closed_schedule(t_end),
    )
}

/// Closed pipe with the piston displaced `delta` beyond equilibrium, same mass.
pub fn perturbed_closed(n_cells: usize, delta: f64, t_end: f64) -> Result<Scenario> {
    let b = 1.0 + delta;
    build(
        "perturbed_closed",
        Params::default(),
        n_cells,
        b,
        0.0,
        move |_| 1.0 / b,
        |_| 0.0,
        closed_schedule(t_end),
    )
}

/// Outflow from `t = 0` at constant speed `u0` through uniform gas at rest.
pub fn constant_outflow(n_cells: usize, u0: f64, t_end: f64) -> Result<Scenario> {
    let schedule = BoundarySchedule {
        t_star: 0.0,
        t_end,
        u_in: Profile::constant(0.0),
        rho_in: Profile::constant(1.0),
        u_out: Profile::constant(-u0),
    };
    build(
        "constant_outflow",
        Params::default(),
        n_cells,
        1.0,
        0.0,
        |_| 1.0,
        |_| 0.0,
        schedule,
    )
}

/// Strong outflow through a weakly viscous gas.
pub fn stiff_outflow(n_cells: usize) -> Result<Scenario> {
    let schedule = BoundarySchedule {
        t_star: 0.0,
        t_end: 0.2,
        u_in: Profile::constant(0.0),
        rho_in: Profile::constant(1.0),
        u_out: Profile::constant(-2.0),
    };
    let params = Params {
        mu: 0.05,
        ..Params::default()
    };
    build(
        "stiff_outflow",
        params,
        n_cells,
        1.0,
        0.0,
        |_| 1.0,
        |_| 0.0,
        schedule,
    )
}

/// The standard suite: inflow followed by outflow under several schedules.
pub fn standard_suite(n_cells: usize) -> Result<Vec<Scenario>> {
    let p = Params::default();
    Ok(vec![
        build(
            "breathing",
            p,
            n_cells,
            1.0,
            0.0,
            |_| 1.0,
            |_| 0.0,
            BoundarySchedule {
                t_star: 0.5,
                t_end: 1.5,
                u_in: Profile::constant(0.2),
                rho_in: Profile::constant(1.0),
                u_out: Profile::constant(-0.2),
            },
        )?,
        build(
            "compression",
            p,
            n_cells,
            1.0,
            -0.3,
            |_| 1.0,
            |x| -0.3 * x,
            BoundarySchedule {
                t_star: 0.3,
                t_end: 1.3,
                u_in: Profile::constant(0.1),
                rho_in: Profile::constant(1.0),
                u_out: Profile::constant(-0.3),
            },
        )?,
        build(
            "sinusoidal",
            p,
            n_cells,
            1.0,
            0.0,
            |x| 1.0 + 0.2 * x,
            |_| 0.0,
            BoundarySchedule {
                t_star: 0.4,
                t_end: 1.4,
                u_in: Profile::Sinusoid {
                    mean: 0.2,
                    amplitude: 0.1,
                    period: 0.5,
                    phase: 0.0,
                },
                rho_in: Profile::constant(1.2),
                u_out: Profile::Sinusoid {
                    mean: -0.25,
                    amplitude: 0.1,
                    period: 0.4,
                    phase: 0.0,
                },
            },
        )?,
        build(
            "ramped_outflow",
            p,
            n_cells,
            1.2,
            0.0,
            |x| 1.0 - 0.2 * (x - 0.6),
            |_| 0.0,
            BoundarySchedule {
                t_star: 0.0,
                t_end: 1.0,
                u_in: Profile::constant(0.0),
                rho_in: Profile::constant(1.0),
                u_out: Profile::Ramp {
                    s0: 0.0,
                    v0: 0.0,
                    s1: 0.2,
                    v1: -0.5,
                },
            },
        )?,
    ])
}
