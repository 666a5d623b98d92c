//! Independent references: exact solutions with their sources, a reference
//! piston integrator, and convergence studies against both.

mod convergence;
mod jet;
mod manufactured;
mod piston;

pub use convergence::{convergence_order, forced_run, ConvergenceReport, ErrorRow};
pub use jet::{Dual2, Jet};
pub use manufactured::{manufactured_residual, CaseKind, ManufacturedCase, Residual};
pub use piston::{piston_ode_oracle, piston_ode_oracle_with_mass, PistonTrajectory};
