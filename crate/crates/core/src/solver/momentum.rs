//! Implicit edge-velocity solve with the piston velocity as the `z = 0` unknown.
//!
//! The edge-0 control volume holds the piston (unit mass) plus the half cell
//! of gas between `z = 0` and the first cell centre, so the piston row reads
//!
//! ```text
//! (1 + dy/2) (b'_new - b') = dt * ( -sigma(cell 0) - l b'_θ - K (b_θ - b_rest) )
//! ```
//!
//! Everything mechanical is evaluated at the θ level `x_θ = x + θ (x_new - x)`:
//! the viscous traction, damping, spring (`b_new = b + dt b'_θ`) and the
//! pressure, linearised as `q(v) + θ q'(v) (v_new - v)` with the full
//! transport increment. The linearised pressure adds an
//! acoustic term to the diffusion coefficient, so the system stays tridiagonal.
//! The caller transports with `u_θ`. The discrete energy change is then
//! `-dt D - dt l b'_θ^2 + (1/2 - θ) (|du|^2 + f'' dv^2 + K db^2)` up to cubic
//! terms in `dv`.

use crate::coords::GridCoefficients;
use crate::error::Result;
use crate::model::{q_of, GridState, Params, PistonState};
use crate::tridiag;

use super::transport::advection_rate;

/// Optional source terms, used by manufactured-solution runs.
#[derive(Debug, Clone, Default)]
pub struct MomentumSource {
    /// Per edge, added to `u_t`.
    pub edges: Vec<f64>,
    /// Added to the piston acceleration.
    pub piston: f64,
}

pub fn momentum_piston_solve(
    grid: &GridState,
    coeffs: &GridCoefficients,
    piston: &PistonState,
    params: &Params,
    bc_open_end_velocity: f64,
    dt: f64,
    theta: f64,
) -> Result<(Vec<f64>, PistonState)> {
    momentum_piston_solve_with(
        grid,
        coeffs,
        piston,
        params,
        bc_open_end_velocity,
        dt,
        theta,
        None,
        None,
    )
}

/// `volume_rate` is the part of `v_t` per cell that does not depend on `u`
/// (advection plus any source). Without it the upwind advection with a
/// zero-gradient open end is used.
#[allow(clippy::too_many_arguments)]
pub fn momentum_piston_solve_with(
    grid: &GridState,
    coeffs: &GridCoefficients,
    piston: &PistonState,
    params: &Params,
    bc_open_end_velocity: f64,
    dt: f64,
    theta: f64,
    source: Option<&MomentumSource>,
    volume_rate: Option<&[f64]>,
) -> Result<(Vec<f64>, PistonState)> {
    grid.validate()?;
    let n = grid.n_cells();
    let h = grid.dz();
    let alpha = coeffs.alpha;
    let dy = -h / alpha;
    let (v, u) = (&grid.v, &grid.u);
    let mu = params.mu;

    let gamma = params.gamma;
    // acoustic coefficient of cell j: -θ dt alpha q'(v_j) / h
    let acoustic: Vec<f64> = v
        .iter()
        .map(|&vj| theta * dt * alpha * gamma * vj.powf(-gamma - 1.0) / h)
        .collect();
    // traction coefficient g_j (sigma_j = -g_j (u_{j+1} - u_j) + ...) and diffusion kappa_j = g_j alpha / h
    let traction: Vec<f64> = v
        .iter()
        .zip(&acoustic)
        .map(|(vj, aj)| mu * alpha / (vj * h) + aj)
        .collect();
    let kappa: Vec<f64> = traction.iter().map(|gj| gj * alpha / h).collect();
    // q + θ q' dt (v_t - alpha u_z): the explicit part of the linearised pressure
    let q: Vec<f64> = (0..n)
        .map(|j| {
            let rate = volume_rate.map_or_else(|| advection_rate(grid, coeffs, None, j), |r| r[j]);
            q_of(v[j], gamma) - theta * dt * gamma * v[j].powf(-gamma - 1.0) * rate
        })
        .collect();
    let k_spring = params.stiffness_k;
    let l = params.damping_l;

    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];

    // piston row
    let mass = 1.0 + 0.5 * dy;
    let g = traction[0];
    diag[0] = mass + dt * theta * l + dt * dt * theta * theta * k_spring - dt * theta * g;
    upper[0] = dt * theta * g;
    let spring = k_spring * (piston.b - params.b_rest);
    let mut force = q[0] - spring - (1.0 - theta) * (l + k_spring * theta * dt) * u[0];
    if let Some(s) = source {
        force += s.piston + 0.5 * dy * s.edges[0];
    }
    rhs[0] = mass * u[0] - dt * (1.0 - theta) * g * (u[1] - u[0]) + dt * force;

    for i in 1..n {
        let beta = coeffs.beta_edges[i];
        let advect = if beta > 0.0 {
            beta * (u[i] - u[i - 1]) / h
        } else if beta < 0.0 {
            beta * (u[i + 1] - u[i]) / h
        } else {
            0.0
        };
        let pressure = alpha * (q[i] - q[i - 1]) / h;
        let visc_old = kappa[i] * (u[i + 1] - u[i]) - kappa[i - 1] * (u[i] - u[i - 1]);
        lower[i] = -dt * theta * kappa[i - 1];
        diag[i] = 1.0 + dt * theta * (kappa[i] + kappa[i - 1]);
        upper[i] = -dt * theta * kappa[i];
        rhs[i] = u[i] + dt * (-advect - pressure + (1.0 - theta) * visc_old);
        if let Some(s) = source {
            rhs[i] += dt * s.edges[i];
        }
    }
    // Dirichlet open end
    rhs[n - 1] -= upper[n - 1] * bc_open_end_velocity;
    upper[n - 1] = 0.0;

    let mut u_new = tridiag::solve(&lower, &diag, &upper, &rhs)?;
    u_new.push(bc_open_end_velocity);
    let b_dot = u_new[0];
    let b_dot_theta = u[0] + theta * (b_dot - u[0]);
    let piston_new = PistonState {
        b: piston.b + dt * b_dot_theta,
        b_dot,
    };
    Ok((u_new, piston_new))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equilibrium(n: usize) -> (GridState, PistonState, Params) {
        let params = Params {
            b_rest: Params::equilibrium_rest(1.0, 1.4, 1.0, 1.0),
            ..Params::default()
        };
        (
            GridState::uniform(n, 1.0, 0.0, 1.0).unwrap(),
            PistonState { b: 1.0, b_dot: 0.0 },
            params,
        )
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let (g, p, params) = equilibrium(32);
        let c = GridCoefficients::frozen(g.eta, 32).unwrap();
        let (u, pn) = momentum_piston_solve(&g, &c, &p, &params, 0.0, 1e-2, 1.0).unwrap();
        assert!(u.iter().all(|x| x.abs() < 1e-12));
        assert!((pn.b - 1.0).abs() < 1e-12 && pn.b_dot.abs() < 1e-12);
    }

    /// Viscous step against a dense Gaussian-elimination solve of the
    /// same linear system assembled independently.
    #[test]
    fn large_viscosity_matches_dense_solve() {
        let n = 12;
        let mu = 50.0;
        let dt = 0.05;
        let params = Params {
            mu,
            ..Params::default()
        };
        let u0: Vec<f64> = (0..=n)
            .map(|i| {
                if i == 0 || i == n {
                    0.0
                } else {
                    (i as f64 * 0.7).sin()
                }
            })
            .collect();
        let g = GridState::new(vec![1.0; n], u0.clone(), 1.0).unwrap();
        let c = GridCoefficients::frozen(1.0, n).unwrap();
        // cancel pressure and spring so only viscosity acts on the piston
        let pist = PistonState {
            b: params.b_rest + 1.0 / params.stiffness_k,
            b_dot: 0.0,
        };
        let (u, _) = momentum_piston_solve(&g, &c, &pist, &params, 0.0, dt, 1.0).unwrap();

        let h = 1.0 / n as f64;
        let dy = h;
        // viscosity plus the linearised pressure at v = 1
        let k = (mu + dt * params.gamma) / (h * h);
        let m = n; // unknowns u_0 .. u_{n-1}
        let mut a = vec![vec![0.0; m]; m];
        let mut r = vec![0.0; m];
        let mass = 1.0 + 0.5 * dy;
        let gcoef = -(mu + dt * params.gamma) / h;
        a[0][0] = mass + dt * params.damping_l + dt * dt * params.stiffness_k - dt * gcoef;
        a[0][1] = dt * gcoef;
        r[0] = mass * u0[0];
        for i in 1..m {
            a[i][i - 1] = -dt * k;
            a[i][i] = 1.0 + 2.0 * dt * k;
            if i + 1 < m {
                a[i][i + 1] = -dt * k;
            }
            r[i] = u0[i];
        }
        // Gaussian elimination with partial pivoting
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
                .unwrap();
            a.swap(col, piv);
            r.swap(col, piv);
            for row in col + 1..m {
                let f = a[row][col] / a[col][col];
                for cc in col..m {
                    a[row][cc] -= f * a[col][cc];
                }
                r[row] -= f * r[col];
            }
        }
        let mut x = vec![0.0; m];
        for row in (0..m).rev() {
            let s: f64 = (row + 1..m).map(|cc| a[row][cc] * x[cc]).sum();
            x[row] = (r[row] - s) / a[row][row];
        }
        for i in 0..m {
            assert!(
                (u[i] - x[i]).abs() < 1e-12,
                "edge {i}: {} vs {}",
                u[i],
                x[i]
            );
        }
        // heavy damping drives the profile toward the linear interpolant of the ends (zero)
        let before: f64 = u0.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let after: f64 = u.iter().map(|x| x.abs()).fold(0.0, f64::max);
        assert!(after < 0.2 * before);
    }

    #[test]
    fn velocity_continuity_holds() {
        let (g, _, params) = equilibrium(16);
        let c = GridCoefficients::frozen(1.0, 16).unwrap();
        let p = PistonState { b: 1.3, b_dot: 0.2 };
        let (u, pn) = momentum_piston_solve(&g, &c, &p, &params, -0.1, 1e-3, 1.0).unwrap();
        assert_eq!(u[0], pn.b_dot);
        assert_eq!(u[16], -0.1);
        assert_eq!(pn.b, 1.3 + 1e-3 * pn.b_dot);
    }
}
