//! Scalar functions of one variable used for boundary data and initial profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named analytic preset or a tabulated function.
///
/// Tabulated functions interpolate linearly and extrapolate with the end
/// values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `intercept + slope * s`, unbounded.
    Linear {
        intercept: f64,
        slope: f64,
    },
    /// Linear from `(s0, v0)` to `(s1, v1)`, constant outside.
    Ramp {
        s0: f64,
        v0: f64,
        s1: f64,
        v1: f64,
    },
    /// `mean + amplitude * sin(2 pi s / period + phase)`.
    Sinusoid {
        mean: f64,
        amplitude: f64,
        period: f64,
        phase: f64,
    },
    Tabulated {
        s: Vec<f64>,
        values: Vec<f64>,
    },
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn tabulated(s: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if s.is_empty() || s.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "tabulated profile needs matching non-empty columns, got {} and {}",
                s.len(),
                values.len()
            )));
        }
        if s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "tabulated abscissae must be strictly increasing".into(),
            ));
        }
        Ok(Profile::Tabulated { s, values })
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Linear { intercept, slope } => intercept + slope * s,
            Profile::Ramp { s0, v0, s1, v1 } => {
                if s <= *s0 {
                    *v0
                } else if s >= *s1 {
                    *v1
                } else {
                    v0 + (v1 - v0) * (s - s0) / (s1 - s0)
                }
            }
            Profile::Sinusoid {
                mean,
                amplitude,
                period,
                phase,
            } => mean + amplitude * (std::f64::consts::TAU * s / period + phase).sin(),
            Profile::Tabulated { s: xs, values } => interp_clamped(xs, values, s),
        }
    }

    /// Lower and upper bound of the profile over `[a, b]`.
    ///
    /// Exact for every variant: piecewise-linear variants attain extrema at
    /// breakpoints, the sinusoid is bounded by sampling plus its analytic
    /// extremes when a full period fits.
    pub fn range_on(&self, a: f64, b: f64) -> (f64, f64) {
        let mut pts = vec![a, b];
        match self {
            Profile::Ramp { s0, s1, .. } => pts.extend([*s0, *s1]),
            Profile::Tabulated { s, .. } => pts.extend(s.iter().copied()),
            Profile::Sinusoid { period, phase, .. } => {
                // critical points: 2 pi s / period + phase = pi/2 + k pi
                let w = std::f64::consts::TAU / period;
                let k0 = ((w * a + phase - std::f64::consts::FRAC_PI_2) / std::f64::consts::PI)
                    .floor() as i64;
                let k1 = ((w * b + phase - std::f64::consts::FRAC_PI_2) / std::f64::consts::PI)
                    .ceil() as i64;
                for k in k0..=k1.min(k0 + 10_000) {
                    pts.push(
                        (std::f64::consts::FRAC_PI_2 + k as f64 * std::f64::consts::PI - phase) / w,
                    );
                }
            }
            _ => {}
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in pts.into_iter().filter(|p| *p >= a && *p <= b) {
            let v = self.eval(p);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

/// Piecewise-linear interpolation on increasing `xs`, constant outside.
pub fn interp_clamped(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let k = xs.partition_point(|&p| p <= x);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let w = (x - x0) / (x1 - x0);
    ys[k - 1] * (1.0 - w) + ys[k] * w
}
