//! Evolution of the total mass `eta`, whose rate is the open-end mass flux.

use crate::coords::GridCoefficients;
use crate::error::{Error, Result};
use crate::model::{BoundarySchedule, GridState, Params};

use super::momentum::momentum_piston_solve;
use super::transport::transport_cell;
use super::{theta_blend, NumericsConfig, SimState};

/// Inflow: `eta_dot = u_in rho_in` at the step midpoint, `eta_new = eta + dt eta_dot`.
pub fn eta_update_inflow(eta: f64, t: f64, dt: f64, schedule: &BoundarySchedule) -> (f64, f64) {
    let tm = t + 0.5 * dt;
    let eta_dot = schedule.u_in.eval(tm) * schedule.rho_in.eval(tm);
    (eta + dt * eta_dot, eta_dot)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardOutcome {
    pub eta_new: f64,
    pub eta_dot: f64,
    pub iterations: usize,
    /// `|eta_dot^{k+1} - eta_dot^k|` per iteration.
    pub residuals: Vec<f64>,
}

/// Outflow: resolves `eta_dot = u_out(t+dt) / v_new(z=1)` where `v_new` is the
/// provisional end-of-step specific volume of the last cell. It depends on
/// `eta_dot` through the coefficients of both the momentum solve and the
/// transport step, so each iterate runs both.
pub fn eta_update_outflow_picard(
    state: &SimState,
    schedule: &BoundarySchedule,
    params: &Params,
    cfg: &NumericsConfig,
    dt: f64,
) -> Result<PicardOutcome> {
    let grid = &state.grid;
    let n = grid.n_cells();
    let u_out = schedule.u_out.eval(state.t + dt);
    let mut eta_dot = u_out / grid.v[n - 1];
    let mut residuals = Vec::new();
    for k in 1..=cfg.picard_max_iter {
        let v_last = provisional_last_v(state, params, cfg, dt, eta_dot, u_out)?;
        let next = u_out / v_last;
        let res = (next - eta_dot).abs();
        residuals.push(res);
        eta_dot = next;
        if res < cfg.picard_tol {
            return Ok(PicardOutcome {
                eta_new: grid.eta + dt * eta_dot,
                eta_dot,
                iterations: k,
                residuals,
            });
        }
    }
    Err(Error::PicardDiverged {
        iterations: cfg.picard_max_iter,
        residual: residuals.last().copied().unwrap_or(f64::NAN),
    })
}

/// End-of-step specific volume of the last cell for a trial mass rate.
fn provisional_last_v(
    state: &SimState,
    params: &Params,
    cfg: &NumericsConfig,
    dt: f64,
    eta_dot: f64,
    bc_u: f64,
) -> Result<f64> {
    let grid = &state.grid;
    let n = grid.n_cells();
    let eta_mid = grid.eta + 0.5 * dt * eta_dot;
    if !(eta_mid > 0.0) {
        return Err(Error::DomainCollapse { eta: eta_mid });
    }
    let coeffs = GridCoefficients::new(eta_mid, eta_dot, n)?;
    let (u_new, _) = momentum_piston_solve(
        grid,
        &coeffs,
        &state.piston,
        params,
        bc_u,
        dt,
        cfg.theta_viscous,
    )?;
    let mid = GridState {
        v: grid.v.clone(),
        u: theta_blend(&grid.u, &u_new, cfg.theta_viscous),
        eta: grid.eta,
    };
    let v_last = transport_cell(&mid, &coeffs, dt, None, n - 1);
    if !(v_last > 0.0) {
        return Err(Error::Vacuum {
            cell: n - 1,
            value: v_last,
        });
    }
    Ok(v_last)
}
