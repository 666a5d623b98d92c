//! Reference integrator for the piston equation with a prescribed load.

use crate::error::{Error, Result};
use crate::model::Params;

/// `(t, b, b_dot)` samples.
pub type PistonTrajectory = Vec<[f64; 3]>;

/// Integrates `b'' + l b' + K (b - b_rest) = F(t)` with backward Euler,
/// the update the coupled solver applies to the piston row at θ = 1:
/// implicit damping and spring, load at the new time level.
pub fn piston_ode_oracle(
    params: &Params,
    forcing: impl Fn(f64) -> f64,
    b0: f64,
    b1: f64,
    dt: f64,
    t_end: f64,
) -> Result<PistonTrajectory> {
    piston_ode_oracle_with_mass(params, 1.0, forcing, b0, b1, dt, t_end)
}

/// As [`piston_ode_oracle`] with an explicit inertia `mass`.
pub fn piston_ode_oracle_with_mass(
    params: &Params,
    mass: f64,
    forcing: impl Fn(f64) -> f64,
    b0: f64,
    b1: f64,
    dt: f64,
    t_end: f64,
) -> Result<PistonTrajectory> {
    params.validate()?;
    if !(dt > 0.0) || !(t_end >= 0.0) || !(mass > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need dt > 0, t_end >= 0 and mass > 0, got {dt}, {t_end}, {mass}"
        )));
    }
    let steps = (t_end / dt).round() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let (mut b, mut bd) = (b0, b1);
    out.push([0.0, b, bd]);
    for k in 0..steps {
        let t_new = (k + 1) as f64 * dt;
        let rhs = mass * bd + dt * (forcing(t_new) - params.stiffness_k * (b - params.b_rest));
        bd = rhs / (mass + dt * params.damping_l + dt * dt * params.stiffness_k);
        b += dt * bd;
        out.push([t_new, b, bd]);
    }
    Ok(out)
}
