//! Time integration of the fixed-domain system coupled to the piston ODE.
//!
//! One step is operator split: total mass update (explicit inflow flux or a
//! Picard-resolved outflow flux), an implicit viscous solve for the edge
//! velocities with the pressure taken from the old specific volume and the
//! piston velocity as the `z = 0` unknown, then transport of `v` with the new
//! velocities. With this ordering the pressure work exchanged between the gas
//! and the piston cancels exactly in the discrete energy.

mod driver;
mod fixed_point;
mod mass;
mod momentum;
mod transport;

pub use driver::{RunEvent, RunOutcome, RunStats, Simulation};
pub use fixed_point::{fixed_step_eta_trajectory, whole_horizon_fixed_point, FixedPointOutcome};
pub use mass::{eta_update_inflow, eta_update_outflow_picard, PicardOutcome};
pub use momentum::{momentum_piston_solve, momentum_piston_solve_with, MomentumSource};
pub use transport::{transport_update, transport_update_with};

use serde::{Deserialize, Serialize};

use crate::coords::{lagrangian_init_from_eulerian, EulerianField, GridCoefficients};
use crate::error::{Error, Result};
use crate::model::{BoundarySchedule, GridState, Params, PistonState};

use transport::advection_rate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericsConfig {
    pub n_cells: usize,
    pub dt_initial: f64,
    /// Upper bound for adaptive growth of the step.
    pub dt_max: f64,
    /// Rejected steps are halved until they fall below this size.
    pub dt_min: f64,
    pub cfl_advection: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub theta_viscous: f64,
    /// Piston contact threshold.
    pub b_min: f64,
    /// Total mass below which the pipe counts as emptied.
    pub eta_floor: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            n_cells: 128,
            dt_initial: 1e-3,
            dt_max: 1e-2,
            dt_min: 1e-12,
            cfl_advection: 0.5,
            picard_tol: 1e-10,
            picard_max_iter: 20,
            theta_viscous: 1.0,
            b_min: 1e-8,
            eta_floor: 1e-6,
        }
    }
}

impl NumericsConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: &str| {
            Err(Error::InvalidParam {
                name,
                reason: reason.into(),
            })
        };
        if self.n_cells < 4 {
            return bad("n_cells", "need at least 4 cells");
        }
        if !(self.dt_initial > 0.0) || !(self.dt_max >= self.dt_initial) || !(self.dt_min > 0.0) {
            return bad("dt_initial", "need 0 < dt_min, 0 < dt_initial <= dt_max");
        }
        if !(self.cfl_advection > 0.0 && self.cfl_advection <= 1.0) {
            return bad("cfl_advection", "safety factor must lie in (0, 1]");
        }
        if !(self.picard_tol > 0.0) || self.picard_max_iter < 1 {
            return bad("picard_tol", "need picard_tol > 0 and picard_max_iter >= 1");
        }
        if !(0.5..=1.0).contains(&self.theta_viscous) {
            return bad("theta_viscous", "implicitness weight must lie in [0.5, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Inflow,
    Outflow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub t: f64,
    pub grid: GridState,
    pub piston: PistonState,
    pub regime: Regime,
    /// Step size the next adaptive step will try first.
    pub dt_next: f64,
}

impl SimState {
    /// Builds the initial state from physical profiles. If the gas velocity at
    /// the piston differs from `b_dot`, the piston edge is overwritten with
    /// `b_dot` and the discrepancy is returned.
    pub fn from_eulerian(
        field: &EulerianField,
        b_dot: f64,
        t0: f64,
        schedule: &BoundarySchedule,
        cfg: &NumericsConfig,
    ) -> Result<(Self, f64)> {
        let mut grid = lagrangian_init_from_eulerian(field, cfg.n_cells)?;
        let discrepancy = grid.u[0] - b_dot;
        grid.u[0] = b_dot;
        let regime = if t0 < schedule.t_star {
            Regime::Inflow
        } else {
            Regime::Outflow
        };
        let state = SimState {
            t: t0,
            grid,
            piston: PistonState { b: field.b, b_dot },
            regime,
            dt_next: cfg.dt_initial,
        };
        Ok((state, discrepancy))
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(self.piston.b > 0.0) {
            return Err(Error::State(format!(
                "piston position {} is not positive",
                self.piston.b
            )));
        }
        if self.grid.u[0] != self.piston.b_dot {
            return Err(Error::State(
                "gas velocity at the piston differs from the piston velocity".into(),
            ));
        }
        Ok(())
    }
}

/// Flips the regime at `t_star`; grid, piston and mass are carried over.
pub fn switch_regime(state: &SimState, schedule: &BoundarySchedule) -> Result<SimState> {
    if state.regime == Regime::Outflow {
        return Err(Error::State("regime already switched to outflow".into()));
    }
    let slack = state.dt_next.max(1e-12 * schedule.t_star.max(1.0));
    if (state.t - schedule.t_star).abs() > slack {
        return Err(Error::State(format!(
            "cannot switch at t = {} (t_star = {})",
            state.t, schedule.t_star
        )));
    }
    Ok(SimState {
        regime: Regime::Outflow,
        ..state.clone()
    })
}

/// How the total mass evolves over one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct MassStep {
    pub eta_new: f64,
    pub eta_dot: f64,
}

impl MassStep {
    pub fn eta_mid(&self, dt: f64) -> f64 {
        self.eta_new - 0.5 * dt * self.eta_dot
    }
}

/// Forcing terms for manufactured runs.
pub(crate) struct StepSources<'a> {
    pub transport: &'a [f64],
    pub momentum: &'a MomentumSource,
}

/// Transport plus momentum with the mass evolution already decided.
#[allow(clippy::too_many_arguments)]
pub(crate) fn advance(
    state: &SimState,
    params: &Params,
    cfg: &NumericsConfig,
    dt: f64,
    mass: MassStep,
    bc_u: f64,
    open_end_v: Option<f64>,
    sources: Option<StepSources<'_>>,
) -> Result<(GridState, PistonState)> {
    let n = state.grid.n_cells();
    let coeffs = GridCoefficients::new(mass.eta_mid(dt), mass.eta_dot, n)?;
    let volume_rate: Vec<f64> = (0..n)
        .map(|j| {
            advection_rate(&state.grid, &coeffs, open_end_v, j)
                + sources.as_ref().map_or(0.0, |s| s.transport[j])
        })
        .collect();
    let (u_new, piston_new) = momentum_piston_solve_with(
        &state.grid,
        &coeffs,
        &state.piston,
        params,
        bc_u,
        dt,
        cfg.theta_viscous,
        sources.as_ref().map(|s| s.momentum),
        Some(&volume_rate),
    )?;
    let mid = GridState {
        v: state.grid.v.clone(),
        u: theta_blend(&state.grid.u, &u_new, cfg.theta_viscous),
        eta: state.grid.eta,
    };
    let transported = transport_update_with(
        &mid,
        &coeffs,
        dt,
        cfg.cfl_advection,
        open_end_v,
        sources.as_ref().map(|s| s.transport),
    )?;
    Ok((
        GridState {
            v: transported.v,
            u: u_new,
            eta: mass.eta_new,
        },
        piston_new,
    ))
}

/// `old + θ (new - old)`, the velocity the transport step sees.
pub(crate) fn theta_blend(old: &[f64], new: &[f64], theta: f64) -> Vec<f64> {
    old.iter()
        .zip(new)
        .map(|(o, n)| o + theta * (n - o))
        .collect()
}

/// Outcome of one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub state: SimState,
    pub dt: f64,
    pub eta_dot: f64,
    pub picard_iterations: usize,
    pub rejections: usize,
    /// Terminal event detected during the step, if any. On depletion `state`
    /// is the last valid state before the step.
    pub event: Option<RunEvent>,
}

/// One step with a fixed `dt`; errors are returned, not retried.
pub fn step_with_dt(
    state: &SimState,
    schedule: &BoundarySchedule,
    params: &Params,
    cfg: &NumericsConfig,
    dt: f64,
) -> Result<StepReport> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let t = state.t;
    let (mass, iterations, open_end_v) = match state.regime {
        Regime::Inflow => {
            if t + dt > schedule.t_star * (1.0 + 1e-12) + 1e-15 {
                return Err(Error::State(format!(
                    "inflow step to {} overruns t_star = {}",
                    t + dt,
                    schedule.t_star
                )));
            }
            let (eta_new, eta_dot) = eta_update_inflow(state.grid.eta, t, dt, schedule);
            let rho = schedule.rho_in.eval(t + 0.5 * dt);
            (MassStep { eta_new, eta_dot }, 0, Some(1.0 / rho))
        }
        Regime::Outflow => {
            let p = eta_update_outflow_picard(state, schedule, params, cfg, dt)?;
            (
                MassStep {
                    eta_new: p.eta_new,
                    eta_dot: p.eta_dot,
                },
                p.iterations,
                None,
            )
        }
    };
    if mass.eta_new <= cfg.eta_floor {
        let eta = state.grid.eta;
        let frac = ((eta - cfg.eta_floor) / (eta - mass.eta_new)).clamp(0.0, 1.0);
        return Ok(StepReport {
            state: state.clone(),
            dt,
            eta_dot: mass.eta_dot,
            picard_iterations: iterations,
            rejections: 0,
            event: Some(RunEvent::Depleted { t: t + frac * dt }),
        });
    }
    let bc_u = match state.regime {
        Regime::Inflow => schedule.u_in.eval(t + dt),
        Regime::Outflow => schedule.u_out.eval(t + dt),
    };
    let (grid, piston) = advance(state, params, cfg, dt, mass, bc_u, open_end_v, None)?;
    let event = if piston.b <= cfg.b_min {
        let frac = ((state.piston.b - cfg.b_min) / (state.piston.b - piston.b)).clamp(0.0, 1.0);
        Some(RunEvent::Contact { t: t + frac * dt })
    } else {
        None
    };
    let new_state = SimState {
        t: t + dt,
        grid,
        piston,
        regime: state.regime,
        dt_next: state.dt_next,
    };
    Ok(StepReport {
        state: new_state,
        dt,
        eta_dot: mass.eta_dot,
        picard_iterations: iterations,
        rejections: 0,
        event,
    })
}

/// Largest step allowed by the advective and acoustic stability limits.
pub fn cfl_bound(
    state: &SimState,
    schedule: &BoundarySchedule,
    params: &Params,
    cfg: &NumericsConfig,
) -> f64 {
    let g = &state.grid;
    let h = g.dz();
    let eta_dot = match state.regime {
        Regime::Inflow => schedule.u_in.eval(state.t) * schedule.rho_in.eval(state.t),
        Regime::Outflow => schedule.u_out.eval(state.t) / g.v[g.n_cells() - 1],
    };
    let advective = if eta_dot != 0.0 {
        cfg.cfl_advection * h * g.eta / eta_dot.abs()
    } else {
        f64::INFINITY
    };
    let c_max =
        g.v.iter()
            .map(|&v| (params.gamma * v.powf(-params.gamma - 1.0)).sqrt())
            .fold(0.0, f64::max);
    let acoustic = cfg.cfl_advection * g.eta * h / c_max;
    advective.min(acoustic)
}

fn is_retryable(e: &Error) -> bool {
    matches!(
        e,
        Error::Cfl { .. }
            | Error::StepTooLarge { .. }
            | Error::Vacuum { .. }
            | Error::PicardDiverged { .. }
            | Error::Singular { .. }
            | Error::DomainCollapse { .. }
    )
}

/// One adaptive step. A proposal above the stability bound, or one whose
/// update fails, is rejected and halved; the step is clipped to the next regime
/// boundary, and the following proposal grows by 1.1 up to the bound.
pub fn step(
    state: &SimState,
    schedule: &BoundarySchedule,
    params: &Params,
    cfg: &NumericsConfig,
) -> Result<StepReport> {
    let horizon = match state.regime {
        Regime::Inflow => schedule.t_star,
        Regime::Outflow => schedule.t_end,
    };
    let remaining = horizon - state.t;
    if !(remaining > 0.0) {
        return Err(Error::State(format!(
            "no time left in the current regime at t = {}",
            state.t
        )));
    }
    let bound = cfl_bound(state, schedule, params, cfg);
    let mut dt = state.dt_next.min(cfg.dt_max);
    let mut rejections = 0;
    loop {
        let landing = dt >= remaining * (1.0 - 1e-9);
        let attempt = if landing { remaining } else { dt };
        let result = if attempt > bound {
            Err(Error::StepTooLarge { dt: attempt, bound })
        } else {
            step_with_dt(state, schedule, params, cfg, attempt)
        };
        match result {
            Ok(mut report) => {
                report.rejections = rejections;
                let next_bound = cfl_bound(&report.state, schedule, params, cfg);
                report.state.dt_next = (dt * 1.1).min(cfg.dt_max).min(next_bound).max(cfg.dt_min);
                if landing {
                    report.state.t = horizon;
                }
                return Ok(report);
            }
            Err(e) if is_retryable(&e) => {
                rejections += 1;
                dt *= 0.5;
                if dt < cfg.dt_min {
                    return Err(e);
                }
            }
            Err(e) => return Err(e),
        }
    }
}
