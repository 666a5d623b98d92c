//! Explicit update of the specific volume: upwind for `beta v_z`, centred
//! staggered difference for `alpha u_z`.

use crate::coords::GridCoefficients;
use crate::error::{Error, Result};
use crate::model::GridState;

/// Rejects `dt` when `max|beta| dt > cfl dz`.
pub(crate) fn check_cfl(coeffs: &GridCoefficients, dt: f64, dz: f64, cfl: f64) -> Result<()> {
    let courant = coeffs.max_abs_beta() * dt;
    let limit = cfl * dz;
    if courant > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl { courant, limit });
    }
    Ok(())
}

/// One transport step with zeroth-order extrapolation at the open end.
pub fn transport_update(
    grid: &GridState,
    coeffs: &GridCoefficients,
    dt: f64,
    cfl: f64,
) -> Result<GridState> {
    transport_update_with(grid, coeffs, dt, cfl, None, None)
}

/// One transport step.
///
/// `open_end_v` is the prescribed specific volume at `z = 1`, used as the
/// upwind neighbour of the last cell when `beta < 0` there (inflow). Without
/// it the last cell's own value is used. `source` adds `dt * source[j]` per cell.
pub fn transport_update_with(
    grid: &GridState,
    coeffs: &GridCoefficients,
    dt: f64,
    cfl: f64,
    open_end_v: Option<f64>,
    source: Option<&[f64]>,
) -> Result<GridState> {
    let n = grid.n_cells();
    let h = grid.dz();
    check_cfl(coeffs, dt, h, cfl)?;
    let mut v_new = Vec::with_capacity(n);
    for j in 0..n {
        let v_new_j =
            transport_cell(grid, coeffs, dt, open_end_v, j) + source.map_or(0.0, |s| dt * s[j]);
        if !(v_new_j > 0.0) {
            return Err(Error::Vacuum {
                cell: j,
                value: v_new_j,
            });
        }
        v_new.push(v_new_j);
    }
    Ok(GridState {
        v: v_new,
        u: grid.u.clone(),
        eta: grid.eta,
    })
}

/// Updated value of a single cell, without positivity or CFL checks.
pub(crate) fn transport_cell(
    grid: &GridState,
    coeffs: &GridCoefficients,
    dt: f64,
    open_end_v: Option<f64>,
    j: usize,
) -> f64 {
    let divergence = coeffs.alpha * (grid.u[j + 1] - grid.u[j]) / grid.dz();
    grid.v[j] + dt * (divergence + advection_rate(grid, coeffs, open_end_v, j))
}

/// Upwind `-beta v_z` in cell `j`, the part of `v_t` that does not depend on `u`.
///
/// `beta` is taken on the upwind face. Since `beta` is linear in `z` this is
/// the flux form `-(beta v)_z + beta_z v` with upwind face values, so
/// `sum_j v_j dz` changes only through the open-end flux.
pub(crate) fn advection_rate(
    grid: &GridState,
    coeffs: &GridCoefficients,
    open_end_v: Option<f64>,
    j: usize,
) -> f64 {
    let n = grid.n_cells();
    let h = grid.dz();
    let v = &grid.v;
    let beta = coeffs.beta_centres[j];
    let advect = if beta > 0.0 {
        let left = if j == 0 { v[0] } else { v[j - 1] };
        coeffs.beta_edges[j] * (v[j] - left) / h
    } else if beta < 0.0 {
        let right = if j + 1 == n {
            open_end_v.unwrap_or(v[j])
        } else {
            v[j + 1]
        };
        coeffs.beta_edges[j + 1] * (right - v[j]) / h
    } else {
        0.0
    };
    -advect
}
