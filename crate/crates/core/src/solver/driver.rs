//! Whole-run driver: inflow phase, regime switch, outflow phase, with a
//! diagnostics record after every accepted step.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{DiagRecord, Recorder};
use crate::error::Result;
use crate::model::{BoundarySchedule, Params};

use super::{step, switch_regime, NumericsConfig, Regime, SimState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunEvent {
    Completed,
    Contact { t: f64 },
    Depleted { t: f64 },
    Failure { t: f64, reason: String },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub steps: usize,
    pub rejections: usize,
    pub picard_iterations_max: usize,
    pub picard_iterations_total: usize,
    pub dt_smallest: f64,
    pub dt_largest: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub event: RunEvent,
    pub stats: RunStats,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub state: SimState,
    pub schedule: BoundarySchedule,
    pub params: Params,
    pub cfg: NumericsConfig,
    pub recorder: Recorder,
    pub series: Vec<DiagRecord>,
    pub stats: RunStats,
    finished: Option<RunEvent>,
}

impl Simulation {
    pub fn new(
        state: SimState,
        schedule: BoundarySchedule,
        params: Params,
        cfg: NumericsConfig,
    ) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        schedule.validate()?;
        state.validate()?;
        let (recorder, first) = Recorder::start(&state, &schedule, &params)?;
        let stats = RunStats::default();
        Ok(Simulation {
            state,
            schedule,
            params,
            cfg,
            recorder,
            series: vec![first],
            stats,
            finished: None,
        })
    }

    /// Continues from saved state and accumulators; the series starts empty.
    pub fn resume(
        state: SimState,
        recorder: Recorder,
        stats: RunStats,
        schedule: BoundarySchedule,
        params: Params,
        cfg: NumericsConfig,
    ) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        schedule.validate()?;
        state.grid.validate()?;
        Ok(Simulation {
            state,
            schedule,
            params,
            cfg,
            recorder,
            series: Vec::new(),
            stats,
            finished: None,
        })
    }

    pub fn finished(&self) -> Option<&RunEvent> {
        self.finished.as_ref()
    }

    /// Takes one accepted step (switching regime first when due). Returns the
    /// terminal event once the run is over.
    pub fn advance(&mut self) -> Option<RunEvent> {
        if let Some(e) = &self.finished {
            return Some(e.clone());
        }
        let event = self.try_advance().unwrap_or_else(|e| {
            Some(RunEvent::Failure {
                t: self.state.t,
                reason: e.to_string(),
            })
        });
        if let Some(e) = &event {
            log::debug!("run finished at t = {}: {:?}", self.state.t, e);
            self.finished = Some(e.clone());
        }
        event
    }

    fn try_advance(&mut self) -> Result<Option<RunEvent>> {
        if self.state.regime == Regime::Inflow && self.state.t >= self.schedule.t_star {
            self.state = switch_regime(&self.state, &self.schedule)?;
            self.recorder
                .on_switch(&self.state, &self.schedule, &self.params);
            log::debug!("switched to outflow at t = {}", self.state.t);
        }
        if self.state.t >= self.schedule.t_end {
            return Ok(Some(RunEvent::Completed));
        }
        let report = step(&self.state, &self.schedule, &self.params, &self.cfg)?;
        let s = &mut self.stats;
        s.rejections += report.rejections;
        s.picard_iterations_max = s.picard_iterations_max.max(report.picard_iterations);
        s.picard_iterations_total += report.picard_iterations;
        if let Some(ev @ RunEvent::Depleted { .. }) = report.event {
            return Ok(Some(ev));
        }
        s.steps += 1;
        s.dt_smallest = if s.steps == 1 {
            report.dt
        } else {
            s.dt_smallest.min(report.dt)
        };
        s.dt_largest = s.dt_largest.max(report.dt);
        self.state = report.state;
        let rec = self.recorder.record(
            &self.state,
            report.dt,
            report.eta_dot,
            &self.schedule,
            &self.params,
        )?;
        self.series.push(rec);
        Ok(report.event)
    }

    pub fn run(&mut self) -> RunOutcome {
        self.run_with(|_| {})
    }

    /// Runs to the end, calling `observer` after every accepted step.
    pub fn run_with(&mut self, mut observer: impl FnMut(&Simulation)) -> RunOutcome {
        loop {
            let steps = self.stats.steps;
            let event = self.advance();
            if self.stats.steps > steps {
                observer(self);
            }
            if let Some(event) = event {
                return RunOutcome {
                    event,
                    stats: self.stats.clone(),
                };
            }
        }
    }
}
