//! Viscous compressible gas column in a pipe closed by a spring-loaded piston.
//!
//! The gas occupies `(0, b(t))` with the piston at `x = b`; mass enters or
//! leaves through the open end `x = 0`. The solver works in a normalised
//! Lagrangian mass coordinate so the computational domain is always `[0, 1]`.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::too_many_arguments
)]

pub mod coords;
pub mod diagnostics;
pub mod error;
pub mod model;
pub mod oracle;
pub mod profile;
pub mod scenarios;
pub mod solver;
pub mod tridiag;

pub use coords::{
    coefficients_alpha_beta, lagrangian_init_from_eulerian, reconstruct_eulerian, CoeffPair,
    EulerianField, GridCoefficients, Reconstruction,
};
pub use diagnostics::{
    contact_time_lower_bound, contact_time_lower_bound_fn, energy, energy_budget_residual,
    energy_budget_residual_from, exponent_g, total_mass, DiagRecord, EnergyParts, MassReport,
    Recorder,
};
pub use error::{Error, Result};
pub use model::{
    log_potential_M, pressure_potential_Q, pressure_q, stress_sigma, BoundarySchedule, GridState,
    Params, PistonState,
};
pub use profile::Profile;
pub use solver::{
    cfl_bound, step, step_with_dt, switch_regime, NumericsConfig, Regime, RunEvent, RunOutcome,
    RunStats, SimState, Simulation, StepReport,
};
