//! Fixed-point iteration for the total mass over a whole outflow horizon.
//!
//! Given a trajectory `eta^k`, the system is integrated on the domain it
//! prescribes; the outflux seen at the open end then defines
//! `eta^{k+1}(t) = eta(t0) + int u_out / v(., z=1)`. The per-step Picard
//! solve uses the same discrete flux, so both iterations share fixed points.

use crate::error::{Error, Result};
use crate::model::{BoundarySchedule, Params};

use super::{advance, eta_update_outflow_picard, MassStep, NumericsConfig, Regime, SimState};

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointOutcome {
    pub times: Vec<f64>,
    pub eta: Vec<f64>,
    pub iterations: usize,
    /// Discrete `C^1` distance between successive iterates.
    pub residuals: Vec<f64>,
    pub final_state: SimState,
}

fn check_outflow(initial: &SimState, dt: f64, horizon: f64) -> Result<usize> {
    if initial.regime != Regime::Outflow {
        return Err(Error::State(
            "fixed-point iteration needs an outflow state".into(),
        ));
    }
    if !(dt > 0.0) || !(horizon > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need dt > 0 and horizon > 0, got {dt} and {horizon}"
        )));
    }
    Ok((horizon / dt).round().max(1.0) as usize)
}

/// Integrates on the prescribed trajectory and returns the image under the
/// fixed-point map together with the final state.
fn image(
    initial: &SimState,
    schedule: &BoundarySchedule,
    params: &Params,
    cfg: &NumericsConfig,
    dt: f64,
    eta_dot: &[f64],
) -> Result<(Vec<f64>, SimState)> {
    let mut state = initial.clone();
    let mut next = Vec::with_capacity(eta_dot.len() + 1);
    next.push(initial.grid.eta);
    for &rate in eta_dot {
        let mass = MassStep {
            eta_new: state.grid.eta + dt * rate,
            eta_dot: rate,
        };
        if !(mass.eta_new > 0.0) {
            return Err(Error::DomainCollapse { eta: mass.eta_new });
        }
        let u_out = schedule.u_out.eval(state.t + dt);
        let (grid, piston) = advance(&state, params, cfg, dt, mass, u_out, None, None)?;
        let v_last = grid.v[grid.n_cells() - 1];
        next.push(next.last().unwrap() + dt * u_out / v_last);
        state = SimState {
            t: state.t + dt,
            grid,
            piston,
            ..state
        };
    }
    Ok((next, state))
}

/// Iterates the fixed-point map from the constant trajectory `eta(t0)` with
/// step `dt` over `[t0, t0 + horizon]`. Rates are clipped to
/// `[-10 eta(t0), 0]`. Three consecutive residual increases abort with
/// [`Error::NonContraction`].
#[allow(clippy::too_many_arguments)]
pub fn whole_horizon_fixed_point(
    initial: &SimState,
    schedule: &BoundarySchedule,
    params: &Params,
    cfg: &NumericsConfig,
    horizon: f64,
    dt: f64,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPointOutcome> {
    let m = check_outflow(initial, dt, horizon)?;
    let eta0 = initial.grid.eta;
    let cap = 10.0 * eta0;
    let times: Vec<f64> = (0..=m).map(|i| initial.t + i as f64 * dt).collect();
    let mut eta = vec![eta0; m + 1];
    let mut residuals = Vec::new();
    let mut growth = 0;
    for k in 1..=max_iter {
        let rates: Vec<f64> = eta
            .windows(2)
            .map(|w| ((w[1] - w[0]) / dt).clamp(-cap, 0.0))
            .collect();
        let (next, state) = image(initial, schedule, params, cfg, dt, &rates)?;
        let mut sup = 0.0f64;
        let mut sup_rate = 0.0f64;
        for i in 0..=m {
            sup = sup.max((next[i] - eta[i]).abs());
            if i < m {
                let a = (next[i + 1] - next[i]) / dt;
                let b = (eta[i + 1] - eta[i]) / dt;
                sup_rate = sup_rate.max((a - b).abs());
            }
        }
        let res = sup + sup_rate;
        if residuals.last().is_some_and(|&r| res > r) {
            growth += 1;
        } else {
            growth = 0;
        }
        residuals.push(res);
        eta = next;
        if res < tol {
            return Ok(FixedPointOutcome {
                times,
                eta,
                iterations: k,
                residuals,
                final_state: state,
            });
        }
        if growth >= 3 {
            return Err(Error::NonContraction { history: residuals });
        }
    }
    Err(Error::NonContraction { history: residuals })
}

/// Mass trajectory of a fixed-step run using the per-step Picard solve.
pub fn fixed_step_eta_trajectory(
    initial: &SimState,
    schedule: &BoundarySchedule,
    params: &Params,
    cfg: &NumericsConfig,
    horizon: f64,
    dt: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = check_outflow(initial, dt, horizon)?;
    let mut state = initial.clone();
    let mut eta = vec![state.grid.eta];
    let mut rates = Vec::with_capacity(m);
    for _ in 0..m {
        let p = eta_update_outflow_picard(&state, schedule, params, cfg, dt)?;
        let mass = MassStep {
            eta_new: p.eta_new,
            eta_dot: p.eta_dot,
        };
        let u_out = schedule.u_out.eval(state.t + dt);
        let (grid, piston) = advance(&state, params, cfg, dt, mass, u_out, None, None)?;
        state = SimState {
            t: state.t + dt,
            grid,
            piston,
            ..state
        };
        eta.push(state.grid.eta);
        rates.push(p.eta_dot);
    }
    Ok((eta, rates))
}
