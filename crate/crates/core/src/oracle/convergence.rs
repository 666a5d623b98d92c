//! Forced runs against manufactured solutions and observed convergence order.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{GridState, PistonState};
use crate::solver::{
    advance, MassStep, MomentumSource, NumericsConfig, Regime, SimState, StepSources,
};

use super::jet::Dual2;
use super::manufactured::ManufacturedCase;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub n_cells: usize,
    pub dt: f64,
    /// Largest discrete `L2` error of `v` over the output times.
    pub err_v: f64,
    pub err_u: f64,
    /// Order against the previous row; NaN for the first.
    pub order: f64,
}

impl ErrorRow {
    pub fn err(&self) -> f64 {
        self.err_v.max(self.err_u)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ErrorRow>,
    /// Least-squares slope of `-log2(err)` against `log2(n_cells)`.
    pub order: f64,
    /// All errors are at rounding level, so no order is defined.
    pub exact: bool,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n_cells,dt,err_v,err_u,order\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:e},{:e},{:e},{}",
                r.n_cells, r.dt, r.err_v, r.err_u, r.order
            );
        }
        s
    }
}

/// Runs the forced scheme from the exact initial data to `t_end` with a fixed
/// step and the exact mass trajectory, measuring errors after every step.
pub fn forced_run(
    case: &ManufacturedCase,
    n_cells: usize,
    dt: f64,
    t_end: f64,
    theta: f64,
) -> Result<ErrorRow> {
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need dt > 0 and t_end > 0, got {dt} and {t_end}"
        )));
    }
    let cfg = NumericsConfig {
        n_cells,
        theta_viscous: theta,
        cfl_advection: 1.0,
        ..NumericsConfig::default()
    };
    cfg.validate()?;
    let params = case.params;
    let h = 1.0 / n_cells as f64;
    let centres: Vec<f64> = (0..n_cells).map(|j| (j as f64 + 0.5) * h).collect();
    let edges: Vec<f64> = (0..=n_cells).map(|i| i as f64 * h).collect();

    let grid = GridState::new(
        centres.iter().map(|&z| case.v(0.0, z)).collect(),
        edges.iter().map(|&z| case.u(0.0, z)).collect(),
        case.eta(0.0),
    )?;
    let b = case.b(Dual2::var(0.0));
    let mut state = SimState {
        t: 0.0,
        grid,
        piston: PistonState {
            b: b.v,
            b_dot: b.d1,
        },
        regime: Regime::Outflow,
        dt_next: dt,
    };

    let steps = (t_end / dt).round().max(1.0) as usize;
    let (mut err_v, mut err_u) = (0.0f64, 0.0f64);
    for k in 0..steps {
        let t = k as f64 * dt;
        let eta_new = case.eta(t + dt);
        let mass = MassStep {
            eta_new,
            eta_dot: (eta_new - state.grid.eta) / dt,
        };
        let tm = t + theta * dt;
        let transport: Vec<f64> = centres.iter().map(|&z| case.forcing_v(tm, z)).collect();
        let momentum = MomentumSource {
            edges: edges.iter().map(|&z| case.forcing_u(tm, z)).collect(),
            piston: case.forcing_b(tm),
        };
        let sources = StepSources {
            transport: &transport,
            momentum: &momentum,
        };
        let bc = case.u(t + dt, 1.0);
        let open_end_v = Some(case.v(t, 1.0));
        let (grid, piston) = advance(
            &state,
            &params,
            &cfg,
            dt,
            mass,
            bc,
            open_end_v,
            Some(sources),
        )?;
        state = SimState {
            t: t + dt,
            grid,
            piston,
            ..state
        };

        let tn = state.t;
        let ev: f64 = centres
            .iter()
            .zip(&state.grid.v)
            .map(|(&z, v)| (v - case.v(tn, z)).powi(2))
            .sum::<f64>()
            * h;
        let eu: f64 = edges
            .iter()
            .zip(&state.grid.u)
            .enumerate()
            .map(|(i, (&z, u))| {
                let w = if i == 0 || i == n_cells { 0.5 } else { 1.0 };
                w * (u - case.u(tn, z)).powi(2)
            })
            .sum::<f64>()
            * h;
        err_v = err_v.max(ev.sqrt());
        err_u = err_u.max(eu.sqrt());
    }
    Ok(ErrorRow {
        n_cells,
        dt,
        err_v,
        err_u,
        order: f64::NAN,
    })
}

/// Errors below this are treated as exact reproduction.
const EXACT: f64 = 1e-12;

/// Runs `forced_run` on each resolution with `dt = dt_of(n)` and fits the
/// observed order. Errors that do not decrease give [`Error::NotConvergent`]
/// carrying the error table.
pub fn convergence_order(
    case: &ManufacturedCase,
    resolutions: &[usize],
    dt_of: impl Fn(usize) -> f64,
    t_end: f64,
    theta: f64,
) -> Result<ConvergenceReport> {
    if resolutions.len() < 2 {
        return Err(Error::InvalidInput("need at least two resolutions".into()));
    }
    let mut rows: Vec<ErrorRow> = Vec::with_capacity(resolutions.len());
    for &n in resolutions {
        let mut row = forced_run(case, n, dt_of(n), t_end, theta)?;
        if let Some(prev) = rows.last() {
            row.order = (prev.err() / row.err()).log2() / (n as f64 / prev.n_cells as f64).log2();
        }
        rows.push(row);
    }
    let exact = rows.iter().all(|r| r.err() < EXACT);
    let xs: Vec<f64> = rows.iter().map(|r| (r.n_cells as f64).log2()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| -r.err().log2()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let report = ConvergenceReport {
        rows,
        order: if exact { f64::INFINITY } else { sxy / sxx },
        exact,
    };
    if !exact && report.rows.windows(2).any(|w| w[1].err() >= w[0].err()) {
        return Err(Error::NotConvergent(report.to_csv()));
    }
    Ok(report)
}
