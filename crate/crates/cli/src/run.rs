//! The `run` command: simulation, series CSV, snapshots and summary.

use std::io::Write;
use std::path::{Path, PathBuf};

use pistonpipe::{
    cfl_bound, contact_time_lower_bound, energy_budget_residual_from, DiagRecord, EulerianField,
    Recorder, Regime, RunEvent, RunStats, SimState, Simulation,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, ScenarioConfig};

/// Column order of the series CSV.
pub const SERIES_COLUMNS: [&str; 11] = [
    "t",
    "b",
    "b_dot",
    "eta",
    "mass_eulerian",
    "energy",
    "dissipation_cum",
    "outflux_pressure_cum",
    "min_v",
    "max_v",
    "G_exponent",
];

/// Points per cell used to sample the initial profiles.
const SAMPLES_PER_CELL: usize = 4;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("setup: {0}")]
    Setup(#[from] pistonpipe::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("writing series: {0}")]
    Csv(#[from] csv::Error),
    #[error("snapshot does not fit the configuration: {0}")]
    Snapshot(String),
    #[error("not reproducible: {0}")]
    NotReproducible(String),
}

impl RunError {
    fn io(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
        move |source| RunError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Process exit status for a terminal event.
pub fn exit_code(event: &RunEvent) -> i32 {
    match event {
        RunEvent::Completed => 0,
        RunEvent::Contact { .. } => 2,
        RunEvent::Depleted { .. } => 3,
        RunEvent::Failure { .. } => 4,
    }
}

/// Initial state from the configured Eulerian profiles.
pub fn initial_state(cfg: &ScenarioConfig) -> Result<SimState, RunError> {
    let init = &cfg.initial;
    let n_points = SAMPLES_PER_CELL * cfg.numerics.n_cells + 1;
    let field = EulerianField::sample(init.b0, n_points, |x| init.rho.eval(x), |x| init.u.eval(x))?;
    let (state, discrepancy) =
        SimState::from_eulerian(&field, init.b1, 0.0, &cfg.schedule, &cfg.numerics)?;
    if discrepancy.abs() > 1e-12 {
        log::warn!(
            "initial gas velocity at the piston differs from b1 by {discrepancy:.3e}; using b1"
        );
    }
    Ok(state)
}

pub fn new_simulation(cfg: &ScenarioConfig) -> Result<Simulation, RunError> {
    let state = initial_state(cfg)?;
    let bound = cfl_bound(&state, &cfg.schedule, &cfg.params, &cfg.numerics);
    if cfg.numerics.dt_initial > bound {
        log::info!(
            "dt_initial = {} exceeds the stability bound {bound:.3e}; the first step is shortened",
            cfg.numerics.dt_initial
        );
    }
    Ok(Simulation::new(
        state,
        cfg.schedule.clone(),
        cfg.params,
        cfg.numerics,
    )?)
}

/// Everything needed to continue a run, plus the grid coordinates for readers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    /// Cell centres, where `v` lives.
    pub z: Vec<f64>,
    /// Cell edges, where `u` lives.
    pub z_edges: Vec<f64>,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub eta: f64,
    pub b: f64,
    pub b_dot: f64,
    pub regime: Regime,
    pub dt_next: f64,
    pub recorder: Recorder,
    pub stats: RunStats,
}

impl Snapshot {
    pub fn of(sim: &Simulation) -> Self {
        let s = &sim.state;
        Snapshot {
            t: s.t,
            z: s.grid.cell_centres(),
            z_edges: s.grid.edges(),
            v: s.grid.v.clone(),
            u: s.grid.u.clone(),
            eta: s.grid.eta,
            b: s.piston.b,
            b_dot: s.piston.b_dot,
            regime: s.regime,
            dt_next: s.dt_next,
            recorder: sim.recorder.clone(),
            stats: sim.stats.clone(),
        }
    }

    pub fn read(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(RunError::io(path))?;
        serde_json::from_str(&text).map_err(|source| RunError::Json {
            path: path.into(),
            source,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), RunError> {
        let text = serde_json::to_string_pretty(self).map_err(|source| RunError::Json {
            path: path.into(),
            source,
        })?;
        std::fs::write(path, text + "\n").map_err(RunError::io(path))
    }

    /// Rebuilds the simulation; the grid size must match the configuration.
    pub fn resume(self, cfg: &ScenarioConfig) -> Result<Simulation, RunError> {
        if self.v.len() != cfg.numerics.n_cells {
            return Err(RunError::Snapshot(format!(
                "snapshot has {} cells, configuration asks for {}",
                self.v.len(),
                cfg.numerics.n_cells
            )));
        }
        let state = SimState {
            t: self.t,
            grid: pistonpipe::GridState::new(self.v, self.u, self.eta)?,
            piston: pistonpipe::PistonState {
                b: self.b,
                b_dot: self.b_dot,
            },
            regime: self.regime,
            dt_next: self.dt_next,
        };
        state.validate()?;
        Ok(Simulation::resume(
            state,
            self.recorder,
            self.stats,
            cfg.schedule.clone(),
            cfg.params,
            cfg.numerics,
        )?)
    }
}

pub fn write_series<W: Write>(records: &[DiagRecord], out: W) -> Result<(), RunError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SERIES_COLUMNS)?;
    for r in records {
        let row = [
            r.t,
            r.b,
            r.b_dot,
            r.eta,
            r.mass_eulerian,
            r.energy,
            r.dissipation_cum,
            r.outflux_pressure_cum,
            r.min_v,
            r.max_v,
            r.g_exponent,
        ];
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush().map_err(|e| RunError::Csv(e.into()))?;
    Ok(())
}

/// Contents of the summary file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub event: RunEvent,
    pub exit_code: i32,
    pub t_final: f64,
    pub stats: RunStats,
    pub energy_budget_residual: Option<f64>,
    pub max_b_drift: f64,
    pub max_bound_ratio: f64,
    /// Lower bound on the contact/depletion time; `None` when the run never
    /// reached outflow or the bound is unbounded within the horizon.
    pub contact_time_lower_bound: Option<f64>,
    pub event_time: Option<f64>,
    /// Whether the realized event time respects the lower bound.
    pub bound_respected: Option<bool>,
    pub snapshots: Vec<String>,
}

pub fn event_time(event: &RunEvent) -> Option<f64> {
    match event {
        RunEvent::Contact { t } | RunEvent::Depleted { t } => Some(*t),
        _ => None,
    }
}

/// Lower bound on the event time from the run's realized minimum boundary volume.
pub fn lower_bound_of(sim: &Simulation) -> Result<Option<f64>, RunError> {
    let (Some(reference), Some(v_min)) = (&sim.recorder.reference, sim.recorder.min_boundary_v)
    else {
        return Ok(None);
    };
    let s = &sim.schedule;
    let bound = contact_time_lower_bound(reference.eta, &s.u_out, s.t_star, s.t_end, v_min)?;
    Ok(bound.is_finite().then_some(bound))
}

pub fn summarize(
    sim: &Simulation,
    event: &RunEvent,
    series: &[DiagRecord],
    snapshots: Vec<String>,
) -> Result<RunSummary, RunError> {
    let bound = lower_bound_of(sim)?;
    let t_event = event_time(event);
    let bound_respected = match (bound, t_event) {
        (Some(b), Some(t)) => Some(t >= b),
        // an event after the switch with an unbounded estimate contradicts the bound
        (None, Some(_)) => sim.recorder.reference.as_ref().map(|_| false),
        _ => None,
    };
    Ok(RunSummary {
        event: event.clone(),
        exit_code: exit_code(event),
        t_final: sim.state.t,
        stats: sim.stats.clone(),
        energy_budget_residual: energy_budget_residual_from(series, sim.recorder.e0)
            .ok()
            .filter(|_| !series.is_empty()),
        max_b_drift: sim.recorder.max_b_drift,
        max_bound_ratio: sim.recorder.max_bound_ratio,
        contact_time_lower_bound: bound,
        event_time: t_event,
        bound_respected,
        snapshots,
    })
}

/// Runs `cfg` (optionally from a snapshot), writing the series, snapshots and
/// summary into `out_dir`.
pub fn run_command(
    cfg: &ScenarioConfig,
    out_dir: &Path,
    resume: Option<&Path>,
) -> Result<RunSummary, RunError> {
    std::fs::create_dir_all(out_dir).map_err(RunError::io(out_dir))?;
    let mut sim = match resume {
        Some(path) => {
            let sim = Snapshot::read(path)?.resume(cfg)?;
            log::info!("resuming at t = {}", sim.state.t);
            sim
        }
        None => new_simulation(cfg)?,
    };

    let interval = cfg.outputs.snapshot_interval;
    let mut next_snapshot = interval.map(|dt| ((sim.state.t / dt).floor() + 1.0) * dt);
    let mut snapshots = Vec::new();
    let mut snapshot_error = None;
    let outcome = sim.run_with(|s| {
        let (Some(dt), Some(next)) = (interval, next_snapshot) else {
            return;
        };
        if s.state.t + 1e-12 < next || snapshot_error.is_some() {
            return;
        }
        let name = format!(
            "{}_{:04}.json",
            cfg.outputs.snapshot_prefix,
            snapshots.len()
        );
        match Snapshot::of(s).write(&out_dir.join(&name)) {
            Ok(()) => snapshots.push(name),
            Err(e) => snapshot_error = Some(e),
        }
        next_snapshot = Some(((s.state.t / dt).floor() + 1.0) * dt);
    });
    if let Some(e) = snapshot_error {
        return Err(e);
    }
    if outcome.stats.rejections > 0 {
        log::info!("{} step rejections (dt halved)", outcome.stats.rejections);
    }
    if let RunEvent::Failure { t, reason } = &outcome.event {
        log::error!("numerical failure at t = {t}: {reason}");
    }

    let series = &sim.series;
    let series_path = out_dir.join(&cfg.outputs.series);
    let file = std::fs::File::create(&series_path).map_err(RunError::io(&series_path))?;
    write_series(series, std::io::BufWriter::new(file))?;

    let summary = summarize(&sim, &outcome.event, series, snapshots)?;
    let summary_path = out_dir.join(&cfg.outputs.summary);
    let text = serde_json::to_string_pretty(&summary).map_err(|source| RunError::Json {
        path: summary_path.clone(),
        source,
    })?;
    std::fs::write(&summary_path, text + "\n").map_err(RunError::io(&summary_path))?;
    Ok(summary)
}
