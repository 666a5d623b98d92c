//! Mass, energy and the quantities bounded by the a priori estimates,
//! evaluated on the discrete state and accumulated along a run.
//!
//! Spatial sums use the cell width `dy = eta / n` for cell quantities and
//! trapezoid weights for edge quantities; time integrals use the trapezoid
//! rule over accepted steps.

use serde::{Deserialize, Serialize};

use crate::coords::reconstruct_eulerian;
use crate::error::{Error, Result};
use crate::model::{big_q_of, q_of, BoundarySchedule, GridState, Params};
use crate::profile::{interp_clamped, Profile};
use crate::solver::{Regime, SimState};

/// One row of the run series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagRecord {
    pub t: f64,
    pub b: f64,
    pub b_dot: f64,
    pub eta: f64,
    pub mass_eulerian: f64,
    pub energy: f64,
    pub dissipation_cum: f64,
    pub outflux_pressure_cum: f64,
    pub min_v: f64,
    pub max_v: f64,
    /// NaN before the switch to outflow.
    pub g_exponent: f64,
    pub damping_cum: f64,
    pub boundary_work_cum: f64,
    /// Accumulated `dt * eta_dot`.
    pub eta_flux_cum: f64,
    pub spring_cum: f64,
    pub u_norm: f64,
    pub v_boundary: f64,
    /// `b - sum v_j dy`.
    pub b_drift: f64,
    /// Largest ratio of `1/v` to its exponential bound; NaN before outflow.
    pub bound_ratio: f64,
    pub outflow: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassReport {
    /// Total mass carried by the state.
    pub eta: f64,
    /// `int rho dx` over the reconstructed column.
    pub eulerian: f64,
}

pub fn total_mass(state: &SimState) -> Result<MassReport> {
    let rec = reconstruct_eulerian(&state.grid, &state.piston)?;
    let f = &rec.field;
    let eulerian =
        f.x.windows(2)
            .zip(f.rho.windows(2))
            .map(|(x, r)| 0.5 * (x[1] - x[0]) * (r[0] + r[1]))
            .sum();
    Ok(MassReport {
        eta: state.grid.eta,
        eulerian,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParts {
    pub kinetic: f64,
    /// `-int Q(v) dy`.
    pub internal: f64,
    pub piston_kinetic: f64,
    pub spring: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.kinetic + self.internal + self.piston_kinetic + self.spring
    }
}

/// Trapezoid-weighted `sum w_i u_i^2` over the edges.
fn edge_square_sum(grid: &GridState) -> f64 {
    let dy = grid.dy();
    let n = grid.n_cells();
    let inner: f64 = grid.u[1..n].iter().map(|u| u * u).sum();
    dy * (inner + 0.5 * (grid.u[0] * grid.u[0] + grid.u[n] * grid.u[n]))
}

/// Discrete `L2` norm of the gas velocity in the mass coordinate.
pub fn velocity_norm(grid: &GridState) -> f64 {
    edge_square_sum(grid).sqrt()
}

pub fn energy_parts(state: &SimState, params: &Params) -> EnergyParts {
    let g = &state.grid;
    let dy = g.dy();
    let p = &state.piston;
    EnergyParts {
        kinetic: 0.5 * edge_square_sum(g),
        internal: -dy * g.v.iter().map(|&v| big_q_of(v, params.gamma)).sum::<f64>(),
        piston_kinetic: 0.5 * p.b_dot * p.b_dot,
        spring: 0.5 * params.stiffness_k * (p.b - params.b_rest).powi(2),
    }
}

pub fn energy(state: &SimState, params: &Params) -> f64 {
    energy_parts(state, params).total()
}

/// Instantaneous integrands of the energy budget.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
struct Rates {
    dissipation: f64,
    damping: f64,
    outflux: f64,
    work: f64,
    spring: f64,
    v_boundary: f64,
}

fn boundary_v(state: &SimState, schedule: &BoundarySchedule) -> f64 {
    match state.regime {
        Regime::Inflow => 1.0 / schedule.rho_in.eval(state.t),
        Regime::Outflow => state.grid.v[state.grid.n_cells() - 1],
    }
}

fn rates(state: &SimState, schedule: &BoundarySchedule, params: &Params) -> Rates {
    let g = &state.grid;
    let n = g.n_cells();
    let dy = g.dy();
    let dissipation =
        g.v.iter()
            .enumerate()
            .map(|(j, &v)| {
                let uy = (g.u[j] - g.u[j + 1]) / dy;
                dy * params.mu * uy * uy / v
            })
            .sum();
    let b_dot = state.piston.b_dot;
    let v_b = boundary_v(state, schedule);
    let u_b = g.u[n];
    let v_last = g.v[n - 1];
    let sigma_b = params.mu * (g.u[n - 1] - g.u[n]) / (dy * v_last) - q_of(v_last, params.gamma);
    let eta_dot = u_b / v_b;
    Rates {
        dissipation,
        damping: params.damping_l * b_dot * b_dot,
        outflux: -u_b / (params.gamma - 1.0) * q_of(v_b, params.gamma),
        work: -u_b * sigma_b + 0.5 * eta_dot * u_b * u_b,
        spring: params.stiffness_k * (state.piston.b - params.b_rest),
        v_boundary: v_b,
    }
}

/// State at the regime switch that the exponential bound refers to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutflowReference {
    pub t: f64,
    pub b: f64,
    pub b_dot: f64,
    pub eta: f64,
    pub u_norm: f64,
    pub z: Vec<f64>,
    pub inv_v: Vec<f64>,
}

impl OutflowReference {
    fn of(state: &SimState) -> Self {
        let g = &state.grid;
        OutflowReference {
            t: state.t,
            b: state.piston.b,
            b_dot: state.piston.b_dot,
            eta: g.eta,
            u_norm: velocity_norm(g),
            z: g.cell_centres(),
            inv_v: g.v.iter().map(|v| 1.0 / v).collect(),
        }
    }
}

fn g_value(
    reference: &OutflowReference,
    b: f64,
    b_dot: f64,
    eta: f64,
    u_norm: f64,
    spring_cum: f64,
    params: &Params,
) -> f64 {
    (b_dot - reference.b_dot
        + params.damping_l * (b - reference.b)
        + spring_cum
        + eta.sqrt() * (u_norm + reference.u_norm))
        / params.mu
}

/// Largest `(1/v) / ((1/v_ref) e^G)` over the cells, comparing the same
/// material point: cell centre `z` at mass `eta` maps to `z eta / eta_ref`.
fn bound_ratio(reference: &OutflowReference, grid: &GridState, g: f64) -> f64 {
    let scale = grid.eta / reference.eta;
    grid.cell_centres()
        .iter()
        .zip(&grid.v)
        .map(|(&z, &v)| {
            (1.0 / v) / (interp_clamped(&reference.z, &reference.inv_v, z * scale) * g.exp())
        })
        .fold(0.0, f64::max)
}

/// Accumulates the time integrals of a run and emits one record per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recorder {
    pub e0: f64,
    pub dissipation_cum: f64,
    pub damping_cum: f64,
    pub outflux_cum: f64,
    pub work_cum: f64,
    pub spring_cum: f64,
    pub eta_flux_cum: f64,
    /// Smallest open-end specific volume seen during outflow.
    pub min_boundary_v: Option<f64>,
    pub max_bound_ratio: f64,
    pub max_b_drift: f64,
    pub reference: Option<OutflowReference>,
    last: Rates,
}

impl Recorder {
    /// Starts recording at `state`; returns the initial record.
    pub fn start(
        state: &SimState,
        schedule: &BoundarySchedule,
        params: &Params,
    ) -> Result<(Self, DiagRecord)> {
        let last = rates(state, schedule, params);
        let mut rec = Recorder {
            e0: energy(state, params),
            dissipation_cum: 0.0,
            damping_cum: 0.0,
            outflux_cum: 0.0,
            work_cum: 0.0,
            spring_cum: 0.0,
            eta_flux_cum: 0.0,
            min_boundary_v: None,
            max_bound_ratio: 0.0,
            max_b_drift: 0.0,
            reference: None,
            last,
        };
        if state.regime == Regime::Outflow {
            rec.reference = Some(OutflowReference::of(state));
            rec.min_boundary_v = Some(last.v_boundary);
        }
        let first = rec.make_record(state, last, params)?;
        Ok((rec, first))
    }

    fn note_boundary_v(&mut self, v: f64) {
        self.min_boundary_v = Some(self.min_boundary_v.map_or(v, |m| m.min(v)));
    }

    /// Call right after the regime switch.
    pub fn on_switch(&mut self, state: &SimState, schedule: &BoundarySchedule, params: &Params) {
        self.reference = Some(OutflowReference::of(state));
        self.last = rates(state, schedule, params);
        self.note_boundary_v(self.last.v_boundary);
    }

    /// Accounts for a step of length `dt` with mass rate `eta_dot` that ended in `state`.
    pub fn record(
        &mut self,
        state: &SimState,
        dt: f64,
        eta_dot: f64,
        schedule: &BoundarySchedule,
        params: &Params,
    ) -> Result<DiagRecord> {
        let now = rates(state, schedule, params);
        let trap = |a: f64, b: f64| 0.5 * dt * (a + b);
        self.dissipation_cum += trap(self.last.dissipation, now.dissipation);
        self.damping_cum += trap(self.last.damping, now.damping);
        self.outflux_cum += trap(self.last.outflux, now.outflux);
        self.work_cum += trap(self.last.work, now.work);
        self.eta_flux_cum += dt * eta_dot;
        if self.reference.is_some() {
            self.spring_cum += trap(self.last.spring, now.spring);
            self.note_boundary_v(now.v_boundary);
        }
        self.last = now;
        self.make_record(state, now, params)
    }

    fn make_record(&mut self, state: &SimState, now: Rates, params: &Params) -> Result<DiagRecord> {
        let g = &state.grid;
        let mass = total_mass(state)?;
        let u_norm = velocity_norm(g);
        let b_drift = state.piston.b - g.column_length();
        self.max_b_drift = self.max_b_drift.max(b_drift.abs());
        let (g_exponent, ratio) = match &self.reference {
            Some(r) => {
                let gx = g_value(
                    r,
                    state.piston.b,
                    state.piston.b_dot,
                    g.eta,
                    u_norm,
                    self.spring_cum,
                    params,
                );
                (gx, bound_ratio(r, g, gx))
            }
            None => (f64::NAN, f64::NAN),
        };
        if ratio.is_finite() {
            self.max_bound_ratio = self.max_bound_ratio.max(ratio);
        }
        Ok(DiagRecord {
            t: state.t,
            b: state.piston.b,
            b_dot: state.piston.b_dot,
            eta: g.eta,
            mass_eulerian: mass.eulerian,
            energy: energy(state, params),
            dissipation_cum: self.dissipation_cum,
            outflux_pressure_cum: self.outflux_cum,
            min_v: g.min_v(),
            max_v: g.max_v(),
            g_exponent,
            damping_cum: self.damping_cum,
            boundary_work_cum: self.work_cum,
            eta_flux_cum: self.eta_flux_cum,
            spring_cum: self.spring_cum,
            u_norm,
            v_boundary: now.v_boundary,
            b_drift,
            bound_ratio: ratio,
            outflow: self.reference.is_some(),
        })
    }
}

/// Largest `|E + D + L + P - E(0) - W| / E(0)` along a series, where `D`, `L`
/// and `P` are the accumulated viscous dissipation, damper work and open-end
/// pressure flux and `W` the accumulated open-end boundary work.
pub fn energy_budget_residual(series: &[DiagRecord]) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 records, got {}",
            series.len()
        )));
    }
    energy_budget_residual_from(series, series[0].energy)
}

/// As [`energy_budget_residual`] for a series that starts after `t = 0`,
/// with the initial energy `e0` supplied (see [`Recorder::e0`]).
pub fn energy_budget_residual_from(series: &[DiagRecord], e0: f64) -> Result<f64> {
    if !(e0 > 0.0) {
        return Err(Error::NonPositive {
            what: "initial energy",
            value: e0,
        });
    }
    Ok(series
        .iter()
        .map(|r| {
            (r.energy + r.dissipation_cum + r.damping_cum + r.outflux_pressure_cum
                - e0
                - r.boundary_work_cum)
                .abs()
                / e0
        })
        .fold(0.0, f64::max))
}

/// Exponent `G(t)` of the lower bound on `v`, recomputed from the series.
///
/// The reference is the last record taken before the switch to outflow (or
/// the first record when the run starts in outflow).
pub fn exponent_g(series: &[DiagRecord], state: &SimState, params: &Params) -> Result<f64> {
    if state.regime != Regime::Outflow {
        return Err(Error::State(
            "the exponent is only defined during outflow".into(),
        ));
    }
    let start = match series.iter().position(|r| r.outflow) {
        Some(0) => 0,
        Some(k) => k - 1,
        None => series
            .len()
            .checked_sub(1)
            .ok_or_else(|| Error::InvalidInput("empty series".into()))?,
    };
    let r0 = &series[start];
    let reference = OutflowReference {
        t: r0.t,
        b: r0.b,
        b_dot: r0.b_dot,
        eta: r0.eta,
        u_norm: r0.u_norm,
        z: Vec::new(),
        inv_v: Vec::new(),
    };
    let spring = |b: f64| params.stiffness_k * (b - params.b_rest);
    let mut integral = 0.0;
    let mut prev = r0;
    for r in series[start + 1..].iter().take_while(|r| r.t <= state.t) {
        integral += 0.5 * (r.t - prev.t) * (spring(prev.b) + spring(r.b));
        prev = r;
    }
    if state.t > prev.t {
        integral += 0.5 * (state.t - prev.t) * (spring(prev.b) + spring(state.piston.b));
    }
    let g = &state.grid;
    Ok(g_value(
        &reference,
        state.piston.b,
        state.piston.b_dot,
        g.eta,
        velocity_norm(g),
        integral,
        params,
    ))
}

/// Adaptive Simpson quadrature.
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Smallest `T3 >= t_star` with `int_{t_star}^{T3} -u_out / v_min = eta0`,
/// or `+inf` when the outflux over `[t_star, t_end]` is not enough.
pub fn contact_time_lower_bound_fn<F: Fn(f64) -> f64>(
    eta0: f64,
    u_out: F,
    t_star: f64,
    t_end: f64,
    v_min_estimate: f64,
) -> Result<f64> {
    if !(eta0 > 0.0) {
        return Err(Error::NonPositive {
            what: "eta0",
            value: eta0,
        });
    }
    if !(v_min_estimate > 0.0) {
        return Err(Error::NonPositive {
            what: "v_min_estimate",
            value: v_min_estimate,
        });
    }
    if !(t_end >= t_star) {
        return Err(Error::InvalidInput(format!(
            "t_end = {t_end} precedes t_star = {t_star}"
        )));
    }
    let rate = |t: f64| (-u_out(t)).max(0.0) / v_min_estimate;
    let tol = 1e-13 * eta0;
    let chunks = 64;
    let width = (t_end - t_star) / chunks as f64;
    let mut acc = 0.0;
    for k in 0..chunks {
        let a = t_star + k as f64 * width;
        let b = if k + 1 == chunks { t_end } else { a + width };
        let piece = simpson(&rate, a, b, tol);
        if acc + piece >= eta0 {
            let (mut lo, mut hi) = (a, b);
            while hi - lo > 1e-12 * (1.0 + hi.abs()) {
                let mid = 0.5 * (lo + hi);
                if acc + simpson(&rate, a, mid, tol) >= eta0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        acc += piece;
    }
    Ok(f64::INFINITY)
}

/// Profile version of [`contact_time_lower_bound_fn`], exact for constant outflow.
pub fn contact_time_lower_bound(
    eta0: f64,
    u_out: &Profile,
    t_star: f64,
    t_end: f64,
    v_min_estimate: f64,
) -> Result<f64> {
    if let Profile::Constant { value } = u_out {
        if !(eta0 > 0.0) {
            return Err(Error::NonPositive {
                what: "eta0",
                value: eta0,
            });
        }
        if !(v_min_estimate > 0.0) {
            return Err(Error::NonPositive {
                what: "v_min_estimate",
                value: v_min_estimate,
            });
        }
        if *value >= 0.0 {
            return Ok(f64::INFINITY);
        }
        let t3 = t_star + eta0 * v_min_estimate / -value;
        return Ok(if t3 <= t_end { t3 } else { f64::INFINITY });
    }
    contact_time_lower_bound_fn(eta0, |t| u_out.eval(t), t_star, t_end, v_min_estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PistonState;

    fn state(v: Vec<f64>, u: Vec<f64>, b: f64, regime: Regime) -> SimState {
        SimState {
            t: 0.0,
            grid: GridState::new(v, u, 1.0).unwrap(),
            piston: PistonState { b, b_dot: 0.0 },
            regime,
            dt_next: 1e-3,
        }
    }

    fn params_gamma2() -> Params {
        Params {
            gamma: 2.0,
            b_rest: 1.0,
            ..Params::default()
        }
    }

    #[test]
    fn energy_closed_forms() {
        let p = params_gamma2();
        let s = state(vec![1.0; 8], vec![0.0; 9], 1.0, Regime::Outflow);
        assert!((energy(&s, &p) - 1.0).abs() < 1e-15);
        let mut s1 = state(vec![1.0; 8], vec![1.0; 9], 1.0, Regime::Outflow);
        s1.piston.b_dot = 1.0;
        // gas kinetic 1/2, piston kinetic 1/2
        assert!((energy_parts(&s1, &p).kinetic - 0.5).abs() < 1e-15);
        assert!((energy(&s1, &p) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn internal_energy_quadrature_converges_to_log2() {
        let n = 512;
        let v: Vec<f64> = (0..n).map(|j| 1.0 + (j as f64 + 0.5) / n as f64).collect();
        let s = state(v, vec![0.0; n + 1], 1.5, Regime::Outflow);
        let e = energy_parts(&s, &params_gamma2()).internal;
        assert!((e - std::f64::consts::LN_2).abs() < 1e-5);
    }

    #[test]
    fn uniform_mass_cross_check() {
        let s = state(vec![1.0; 16], vec![0.0; 17], 1.0, Regime::Outflow);
        let m = total_mass(&s).unwrap();
        assert_eq!(m.eta, 1.0);
        assert!((m.eulerian - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contact_bound_examples() {
        let c = Profile::constant(-0.5);
        assert_eq!(
            contact_time_lower_bound(1.0, &c, 0.0, 10.0, 0.5).unwrap(),
            1.0
        );
        assert_eq!(
            contact_time_lower_bound(1.0, &Profile::constant(0.0), 0.0, 10.0, 0.5).unwrap(),
            f64::INFINITY
        );
        let t3 = contact_time_lower_bound_fn(0.5, |t| -t, 0.0, 5.0, 1.0).unwrap();
        assert!((t3 - 1.0).abs() < 1e-10);
        let lin = Profile::Linear {
            intercept: 0.0,
            slope: -1.0,
        };
        assert!((contact_time_lower_bound(0.5, &lin, 0.0, 5.0, 1.0).unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(
            contact_time_lower_bound_fn(0.5, |t| -t, 0.0, 0.9, 1.0).unwrap(),
            f64::INFINITY
        );
        assert!(contact_time_lower_bound(1.0, &c, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn exponent_requires_outflow() {
        let p = Params::default();
        let s = state(vec![1.0; 8], vec![0.0; 9], 1.0, Regime::Inflow);
        let sched = BoundarySchedule {
            t_star: 0.5,
            t_end: 1.0,
            u_in: Profile::constant(0.1),
            rho_in: Profile::constant(1.0),
            u_out: Profile::constant(-0.1),
        };
        let (_, r) = Recorder::start(&s, &sched, &p).unwrap();
        assert!(r.g_exponent.is_nan());
        assert!(exponent_g(&[r], &s, &p).is_err());
    }
}
