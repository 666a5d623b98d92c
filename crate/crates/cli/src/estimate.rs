//! The `estimate-contact` command.

use pistonpipe::{contact_time_lower_bound, Profile, RunEvent};
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::run::{event_time, new_simulation, RunError};

/// Cells used for the coarse run that estimates the boundary volume.
pub const COARSE_CELLS: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactEstimate {
    /// `None` when the outflux cannot remove the mass within the horizon.
    pub lower_bound: Option<f64>,
    pub v_min_estimate: Option<f64>,
    pub eta_at_switch: Option<f64>,
    pub event: RunEvent,
    pub event_time: Option<f64>,
}

impl ContactEstimate {
    pub fn bound_respected(&self) -> Option<bool> {
        match (self.lower_bound, self.event_time) {
            (Some(b), Some(t)) => Some(t >= b),
            (None, Some(_)) => Some(false),
            _ => None,
        }
    }
}

/// Runs `cfg` on a coarse grid and evaluates the lower bound with the
/// realized minimum open-end specific volume.
pub fn estimate_contact(cfg: &ScenarioConfig) -> Result<ContactEstimate, RunError> {
    let mut coarse = cfg.clone();
    coarse.numerics.n_cells = cfg.numerics.n_cells.min(COARSE_CELLS);
    let mut sim = new_simulation(&coarse)?;
    let event = sim.run().event;
    let s = &cfg.schedule;
    let reference = sim.recorder.reference.as_ref();
    let v_min = sim.recorder.min_boundary_v;
    let lower_bound = match (reference, v_min) {
        (Some(r), Some(v)) => {
            let b = contact_time_lower_bound(r.eta, &s.u_out, s.t_star, s.t_end, v)?;
            b.is_finite().then_some(b)
        }
        _ => None,
    };
    Ok(ContactEstimate {
        lower_bound,
        v_min_estimate: v_min,
        eta_at_switch: reference.map(|r| r.eta),
        event_time: event_time(&event),
        event,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub u0: f64,
    pub estimate: ContactEstimate,
}

/// Replaces the outflow by constant `-u0` for `u0 = 0.1, ..., 1.0`.
pub fn sweep(cfg: &ScenarioConfig) -> Result<Vec<SweepRow>, RunError> {
    (1..=10)
        .map(|k| {
            let u0 = k as f64 / 10.0;
            let mut c = cfg.clone();
            c.schedule.u_out = Profile::constant(-u0);
            Ok(SweepRow {
                u0,
                estimate: estimate_contact(&c)?,
            })
        })
        .collect()
}

/// Bounds never increase with `u0`; an unbounded estimate counts as `+inf`.
pub fn bounds_decreasing(rows: &[SweepRow]) -> bool {
    let b = |r: &SweepRow| r.estimate.lower_bound.unwrap_or(f64::INFINITY);
    rows.windows(2).all(|w| b(&w[1]) <= b(&w[0]))
}
