//! Constitutive laws, physical parameters and the state shared by every module.
//!
//! Units are nondimensional and the piston mass is 1.

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::profile::Profile;

/// Physical constants of the gas, the spring and the damper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub mu: f64,
    pub gamma: f64,
    pub stiffness_k: f64,
    pub damping_l: f64,
    /// Rest position of the spring.
    pub b_rest: f64,
}

impl Params {
    pub fn new(mu: f64, gamma: f64, stiffness_k: f64, damping_l: f64, b_rest: f64) -> Result<Self> {
        let p = Params {
            mu,
            gamma,
            stiffness_k,
            damping_l,
            b_rest,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &'static str, ok: bool, reason: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParam {
                    name,
                    reason: reason.to_string(),
                })
            }
        };
        check(
            "gamma",
            self.gamma > 1.0,
            "the adiabatic exponent must satisfy gamma > 1",
        )?;
        check("mu", self.mu > 0.0, "viscosity must be positive")?;
        check(
            "stiffness_k",
            self.stiffness_k > 0.0,
            "spring stiffness must be positive",
        )?;
        check(
            "damping_l",
            self.damping_l > 0.0,
            "damping coefficient must be positive",
        )?;
        check(
            "b_rest",
            self.b_rest.is_finite(),
            "rest position must be finite",
        )
    }

    /// Rest position for which `(b, v_bar)` is a mechanical equilibrium,
    /// i.e. `K (b - b_rest) = q(v_bar)`.
    pub fn equilibrium_rest(stiffness_k: f64, gamma: f64, b: f64, v_bar: f64) -> f64 {
        b - v_bar.powf(-gamma) / stiffness_k
    }
}

impl Default for Params {
    fn default() -> Self {
        Params {
            mu: 1.0,
            gamma: 1.4,
            stiffness_k: 1.0,
            damping_l: 0.5,
            b_rest: 0.0,
        }
    }
}

/// Specific volume at cell centres and velocity at cell edges on the
/// normalised domain `z in [0, 1]`, with the piston at `z = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridState {
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    /// Total mass in the pipe.
    pub eta: f64,
}

impl GridState {
    pub fn new(v: Vec<f64>, u: Vec<f64>, eta: f64) -> Result<Self> {
        let g = GridState { v, u, eta };
        g.validate()?;
        Ok(g)
    }

    pub fn uniform(n_cells: usize, v: f64, u: f64, eta: f64) -> Result<Self> {
        Self::new(vec![v; n_cells], vec![u; n_cells + 1], eta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.v.is_empty() {
            return Err(Error::InvalidInput("grid has no cells".into()));
        }
        if self.u.len() != self.v.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "staggered layout needs {} edge velocities, got {}",
                self.v.len() + 1,
                self.u.len()
            )));
        }
        if !(self.eta > 0.0) {
            return Err(Error::DomainCollapse { eta: self.eta });
        }
        if let Some((cell, &value)) = self.v.iter().enumerate().find(|(_, &x)| !(x > 0.0)) {
            return Err(Error::Vacuum { cell, value });
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.v.len()
    }

    pub fn dz(&self) -> f64 {
        1.0 / self.v.len() as f64
    }

    /// Mass per cell.
    pub fn dy(&self) -> f64 {
        self.eta / self.v.len() as f64
    }

    pub fn cell_centres(&self) -> Vec<f64> {
        let h = self.dz();
        (0..self.n_cells()).map(|j| (j as f64 + 0.5) * h).collect()
    }

    pub fn edges(&self) -> Vec<f64> {
        let h = self.dz();
        (0..=self.n_cells()).map(|i| i as f64 * h).collect()
    }

    /// Length of the gas column, `sum v_j dy`.
    pub fn column_length(&self) -> f64 {
        self.dy() * self.v.iter().sum::<f64>()
    }

    pub fn min_v(&self) -> f64 {
        self.v.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_v(&self) -> f64 {
        self.v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PistonState {
    pub b: f64,
    pub b_dot: f64,
}

/// Open-end boundary data: inflow on `[0, t_star)`, outflow on `[t_star, t_end]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySchedule {
    pub t_star: f64,
    pub t_end: f64,
    pub u_in: Profile,
    pub rho_in: Profile,
    pub u_out: Profile,
}

impl BoundarySchedule {
    /// Checks the schedule and returns non-fatal warnings.
    ///
    /// An inflow velocity that touches zero is accepted with a warning;
    /// a negative one, a nonpositive inflow density or a positive outflow
    /// velocity is rejected.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if !(self.t_end > 0.0) || !(self.t_star >= 0.0) || self.t_star > self.t_end {
            return Err(Error::InvalidInput(format!(
                "schedule needs 0 <= t_star <= t_end and t_end > 0, got t_star = {}, t_end = {}",
                self.t_star, self.t_end
            )));
        }
        if self.t_star > 0.0 {
            let (u_lo, _) = self.u_in.range_on(0.0, self.t_star);
            let (r_lo, _) = self.rho_in.range_on(0.0, self.t_star);
            if u_lo < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "u_in must be positive on [0, t_star), minimum is {u_lo}"
                )));
            }
            if u_lo == 0.0 {
                warnings.push("u_in vanishes somewhere on [0, t_star)".to_string());
            }
            if !(r_lo > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "rho_in must be positive on [0, t_star), minimum is {r_lo}"
                )));
            }
        }
        if self.t_star < self.t_end {
            let (_, hi) = self.u_out.range_on(self.t_star, self.t_end);
            if hi > 0.0 {
                return Err(Error::InvalidInput(format!(
                    "u_out must satisfy u_out <= 0 on [t_star, t_end], maximum is {hi}"
                )));
            }
        }
        Ok(warnings)
    }

    /// Velocity prescribed at the open end at time `t`.
    pub fn open_end_velocity(&self, t: f64) -> f64 {
        if t < self.t_star {
            self.u_in.eval(t)
        } else {
            self.u_out.eval(t)
        }
    }
}

/// Pressure as a function of specific volume, `q(v) = v^(-gamma)`.
pub fn pressure_q(v: f64, gamma: f64) -> Result<f64> {
    let v = positive("specific volume", v)?;
    Ok(v.powf(-gamma))
}

/// Pressure potential `Q(v) = v^(1-gamma) / (1-gamma)`, with `Q' = q`.
#[allow(non_snake_case)]
pub fn pressure_potential_Q(v: f64, gamma: f64) -> Result<f64> {
    let v = positive("specific volume", v)?;
    Ok(v.powf(1.0 - gamma) / (1.0 - gamma))
}

/// Logarithmic potential `M(v) = mu log v`, with `M' = mu / v`.
#[allow(non_snake_case)]
pub fn log_potential_M(v: f64, mu: f64) -> Result<f64> {
    let v = positive("specific volume", v)?;
    Ok(mu * v.ln())
}

/// Viscous-plus-pressure traction `mu u_y / v - q(v)`.
pub fn stress_sigma(u_y: f64, v: f64, params: &Params) -> Result<f64> {
    Ok(params.mu * u_y / positive("specific volume", v)? - pressure_q(v, params.gamma)?)
}

// Unchecked versions for the inner loops, where positivity is an invariant.
#[inline]
pub(crate) fn q_of(v: f64, gamma: f64) -> f64 {
    v.powf(-gamma)
}

#[inline]
pub(crate) fn big_q_of(v: f64, gamma: f64) -> f64 {
    v.powf(1.0 - gamma) / (1.0 - gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pressure_examples() {
        assert_eq!(pressure_q(1.0, 1.4).unwrap(), 1.0);
        assert_eq!(pressure_q(0.5, 2.0).unwrap(), 4.0);
        // 2^(-1.4) from a 30-digit evaluation
        assert!((pressure_q(2.0, 1.4).unwrap() - 0.378_929_141_627_599_5).abs() < 1e-15);
        assert!(matches!(
            pressure_q(0.0, 1.4),
            Err(Error::NonPositive { .. })
        ));
        assert!(pressure_q(-1.0, 1.4).is_err());
    }

    #[test]
    fn potential_examples() {
        assert_eq!(pressure_potential_Q(1.0, 2.0).unwrap(), -1.0);
        assert_eq!(pressure_potential_Q(2.0, 2.0).unwrap(), -0.5);
        assert!(pressure_potential_Q(0.0, 2.0).is_err());
        let h = 1e-5;
        let fd = (pressure_potential_Q(1.3 + h, 1.4).unwrap()
            - pressure_potential_Q(1.3 - h, 1.4).unwrap())
            / (2.0 * h);
        assert!((fd - pressure_q(1.3, 1.4).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn log_potential_examples() {
        assert_eq!(log_potential_M(1.0, 0.7).unwrap(), 0.0);
        assert!((log_potential_M(std::f64::consts::E, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let h = 1e-5;
        let fd = (log_potential_M(0.9 + h, 2.0).unwrap() - log_potential_M(0.9 - h, 2.0).unwrap())
            / (2.0 * h);
        assert!((fd - 2.0 / 0.9).abs() < 1e-8);
        assert!(log_potential_M(-0.1, 1.0).is_err());
    }

    #[test]
    fn stress_examples() {
        let p = Params {
            mu: 1.0,
            gamma: 1.4,
            ..Params::default()
        };
        assert_eq!(stress_sigma(0.0, 1.0, &p).unwrap(), -1.0);
        let p2 = Params {
            mu: 1.0,
            gamma: 2.0,
            ..Params::default()
        };
        assert!((stress_sigma(0.2, 2.0, &p2).unwrap() + 0.15).abs() < 1e-15);
        let inviscid = Params { mu: 0.0, ..p };
        assert_eq!(stress_sigma(123.0, 1.0, &inviscid).unwrap(), -1.0);
        assert!(stress_sigma(0.0, 0.0, &p).is_err());
    }

    #[test]
    fn params_reject_bad_values() {
        assert!(Params::new(1.0, 0.9, 1.0, 0.5, 0.0).is_err());
        assert!(Params::new(0.0, 1.4, 1.0, 0.5, 0.0).is_err());
        assert!(Params::new(1.0, 1.4, 0.0, 0.5, 0.0).is_err());
        assert!(Params::new(1.0, 1.4, 1.0, -0.5, 0.0).is_err());
        assert!(Params::new(1.0, 1.4, 1.0, 0.5, -3.0).is_ok());
    }

    #[test]
    fn grid_invariants() {
        assert!(GridState::new(vec![1.0; 4], vec![0.0; 4], 1.0).is_err());
        assert!(GridState::new(vec![1.0, -1.0], vec![0.0; 3], 1.0).is_err());
        assert!(GridState::new(vec![1.0; 2], vec![0.0; 3], 0.0).is_err());
        let g = GridState::uniform(4, 0.5, 0.0, 6.0).unwrap();
        assert_eq!(g.column_length(), 3.0);
    }

    #[test]
    fn schedule_checks_signs() {
        let mut s = BoundarySchedule {
            t_star: 1.0,
            t_end: 2.0,
            u_in: Profile::constant(0.5),
            rho_in: Profile::constant(1.0),
            u_out: Profile::constant(-0.5),
        };
        assert!(s.validate().unwrap().is_empty());
        s.u_in = Profile::constant(0.0);
        assert_eq!(s.validate().unwrap().len(), 1);
        s.u_out = Profile::Ramp {
            s0: 1.0,
            v0: -1.0,
            s1: 2.0,
            v1: 0.1,
        };
        assert!(s.validate().is_err());
    }

    proptest! {
        #[test]
        fn q_positive_and_decreasing(v in 0.05f64..20.0, dv in 1e-6f64..5.0, gamma in 1.0001f64..3.0) {
            let a = pressure_q(v, gamma).unwrap();
            let b = pressure_q(v + dv, gamma).unwrap();
            prop_assert!(a > 0.0 && b > 0.0);
            prop_assert!(b < a);
        }

        #[test]
        fn big_q_derivative_is_q(v in 0.1f64..10.0, gamma in 1.05f64..3.0) {
            let h = 1e-5;
            let fd = (pressure_potential_Q(v + h, gamma).unwrap() - pressure_potential_Q(v - h, gamma).unwrap()) / (2.0 * h);
            let q = pressure_q(v, gamma).unwrap();
            prop_assert!((fd - q).abs() < 1e-7 * q.max(1.0), "fd {} q {}", fd, q);
            prop_assert!(pressure_potential_Q(v, gamma).unwrap() < 0.0);
        }

        #[test]
        fn m_derivative_is_mu_over_v(v in 0.1f64..10.0, mu in 0.01f64..5.0) {
            let h = 1e-5;
            let fd = (log_potential_M(v + h, mu).unwrap() - log_potential_M(v - h, mu).unwrap()) / (2.0 * h);
            prop_assert!((fd - mu / v).abs() < 1e-7 * (mu / v).max(1.0));
        }

        #[test]
        fn stress_at_rest_is_minus_pressure(v in 0.05f64..20.0, gamma in 1.01f64..3.0, mu in 0.01f64..5.0) {
            let p = Params { mu, gamma, ..Params::default() };
            prop_assert_eq!(stress_sigma(0.0, v, &p).unwrap(), -pressure_q(v, gamma).unwrap());
        }
    }
}
