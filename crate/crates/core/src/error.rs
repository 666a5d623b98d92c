use thiserror::Error;

/// Errors raised by the model, the coordinate maps and the solver.
///
/// Terminal physical events (piston contact, mass depletion) are not errors;
/// they are reported through [`crate::solver::RunEvent`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain collapse: total mass eta = {eta} is not positive")]
    DomainCollapse { eta: f64 },

    #[error("CFL violation: max|beta|*dt = {courant:.3e} exceeds {limit:.3e}")]
    Cfl { courant: f64, limit: f64 },

    #[error("step {dt:.3e} exceeds the stability bound {bound:.3e}")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("vacuum: specific volume {value:.3e} in cell {cell} is not positive")]
    Vacuum { cell: usize, value: f64 },

    #[error("singular tridiagonal system at row {row}")]
    Singular { row: usize },

    #[error("outflow mass iteration did not converge in {iterations} iterations (residual {residual:.3e})")]
    PicardDiverged { iterations: usize, residual: f64 },

    #[error("whole-horizon fixed point did not contract (residual history {history:?})")]
    NonContraction { history: Vec<f64> },

    #[error("convergence study failed: errors are not decreasing\n{0}")]
    NotConvergent(String),

    #[error("state error: {0}")]
    State(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn positive(what: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonPositive { what, value })
    }
}
