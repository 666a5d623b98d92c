//! Exact solutions of the forced fixed-domain system.
//!
//! Each case supplies the fields `v*(t,z)`, `u*(t,z)`, `eta*(t)`, `b*(t)`
//! together with hand-derived source terms that make them exact solutions.
//! [`manufactured_residual`] re-derives every derivative with [`Dual2`] jets
//! and so checks the hand-derived sources independently.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Params;

use super::jet::{Dual2, Jet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CaseKind {
    /// Gas at rest with `v = 1`, piston held at `b0`.
    Equilibrium { b0: f64 },
    /// `v = 1 + a_v t z`, `u = a_u t z (1-z) + p0 (1-z)`,
    /// `eta = eta0 + eta_rate t`, `b = b0 + b_rate t`.
    Polynomial {
        a_v: f64,
        a_u: f64,
        p0: f64,
        eta0: f64,
        eta_rate: f64,
        b0: f64,
        b_rate: f64,
    },
    /// `v = 1`, `u = amplitude e^{-t} sin(pi z)`, `eta = 1`, `b = b0`.
    Diffusion { amplitude: f64, b0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedCase {
    pub kind: CaseKind,
    pub params: Params,
}

/// Hand-computed partial derivatives at one point.
struct Partials {
    v: f64,
    v_t: f64,
    v_z: f64,
    u_t: f64,
    u_z: f64,
    u_zz: f64,
    eta: f64,
    eta_dot: f64,
}

/// Residuals of the continuity, momentum and piston equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub continuity: f64,
    pub momentum: f64,
    pub piston: f64,
}

impl Residual {
    pub fn max_abs(&self) -> f64 {
        self.continuity
            .abs()
            .max(self.momentum.abs())
            .max(self.piston.abs())
    }
}

impl ManufacturedCase {
    /// Rejects cases whose gas velocity at the piston differs from `b*'`.
    pub fn new(kind: CaseKind, params: Params) -> Result<Self> {
        params.validate()?;
        let case = ManufacturedCase { kind, params };
        for k in 0..=8 {
            let t = k as f64 * 0.25;
            let b_dot = case.b(Dual2::var(t)).d1;
            let u0 = case.u(t, 0.0);
            if (u0 - b_dot).abs() > 1e-12 * (1.0 + b_dot.abs()) {
                return Err(Error::InvalidInput(format!(
                    "incompatible manufactured case: u*(t, 0) = {u0} but b*'(t) = {b_dot} at t = {t}"
                )));
            }
            if !(case.eta(t) > 0.0) || !(case.v(t, 0.0) > 0.0) || !(case.v(t, 1.0) > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "manufactured fields leave the admissible set at t = {t}"
                )));
            }
        }
        Ok(case)
    }

    /// Smooth case on a fixed domain with the piston at rest:
    /// `v = 1 + 0.1 t z`, `u = 0.1 t z (1-z)`.
    pub fn standard() -> Self {
        let kind = CaseKind::Polynomial {
            a_v: 0.1,
            a_u: 0.1,
            p0: 0.0,
            eta0: 1.0,
            eta_rate: 0.0,
            b0: 1.0,
            b_rate: 0.0,
        };
        Self::new(
            kind,
            Params {
                mu: 1.0,
                ..Params::default()
            },
        )
        .expect("built-in case is compatible")
    }

    /// Smooth case with a moving piston, a shrinking domain and nonuniform `v`.
    pub fn moving_domain() -> Self {
        let kind = CaseKind::Polynomial {
            a_v: 0.4,
            a_u: 0.5,
            p0: 0.1,
            eta0: 1.0,
            eta_rate: -0.2,
            b0: 1.0,
            b_rate: 0.1,
        };
        Self::new(
            kind,
            Params {
                mu: 1.0,
                ..Params::default()
            },
        )
        .expect("built-in case is compatible")
    }

    /// Pure viscous diffusion of the velocity; the piston stays put.
    pub fn diffusion() -> Self {
        Self::new(
            CaseKind::Diffusion {
                amplitude: 0.1,
                b0: 1.0,
            },
            Params::default(),
        )
        .expect("built-in case is compatible")
    }

    /// Rest state; the sources vanish when `b0` balances the spring.
    pub fn equilibrium(params: Params) -> Result<Self> {
        let b0 = params.b_rest + 1.0 / params.stiffness_k;
        Self::new(CaseKind::Equilibrium { b0 }, params)
    }

    pub fn v_exact<T: Jet>(&self, t: T, z: T) -> T {
        match self.kind {
            CaseKind::Polynomial { a_v, .. } => T::cst(1.0) + T::cst(a_v) * t * z,
            _ => T::cst(1.0),
        }
    }

    pub fn u_exact<T: Jet>(&self, t: T, z: T) -> T {
        match self.kind {
            CaseKind::Equilibrium { .. } => T::cst(0.0),
            CaseKind::Polynomial { a_u, p0, .. } => {
                let one_minus = T::cst(1.0) - z;
                T::cst(a_u) * t * z * one_minus + T::cst(p0) * one_minus
            }
            CaseKind::Diffusion { amplitude, .. } => {
                T::cst(amplitude) * (-t).exp() * (T::cst(PI) * z).sin()
            }
        }
    }

    pub fn eta_exact<T: Jet>(&self, t: T) -> T {
        match self.kind {
            CaseKind::Polynomial { eta0, eta_rate, .. } => T::cst(eta0) + T::cst(eta_rate) * t,
            _ => T::cst(1.0),
        }
    }

    pub fn b_exact<T: Jet>(&self, t: T) -> T {
        match self.kind {
            CaseKind::Equilibrium { b0 } | CaseKind::Diffusion { b0, .. } => T::cst(b0),
            CaseKind::Polynomial { b0, b_rate, .. } => T::cst(b0) + T::cst(b_rate) * t,
        }
    }

    pub fn v(&self, t: f64, z: f64) -> f64 {
        self.v_exact(t, z)
    }

    pub fn u(&self, t: f64, z: f64) -> f64 {
        self.u_exact(t, z)
    }

    pub fn eta(&self, t: f64) -> f64 {
        self.eta_exact(t)
    }

    pub fn b(&self, t: Dual2) -> Dual2 {
        self.b_exact(t)
    }

    fn partials(&self, t: f64, z: f64) -> Partials {
        match self.kind {
            CaseKind::Equilibrium { .. } => Partials {
                v: 1.0,
                v_t: 0.0,
                v_z: 0.0,
                u_t: 0.0,
                u_z: 0.0,
                u_zz: 0.0,
                eta: 1.0,
                eta_dot: 0.0,
            },
            CaseKind::Polynomial {
                a_v,
                a_u,
                p0,
                eta0,
                eta_rate,
                ..
            } => Partials {
                v: 1.0 + a_v * t * z,
                v_t: a_v * z,
                v_z: a_v * t,
                u_t: a_u * z * (1.0 - z),
                u_z: a_u * t * (1.0 - 2.0 * z) - p0,
                u_zz: -2.0 * a_u * t,
                eta: eta0 + eta_rate * t,
                eta_dot: eta_rate,
            },
            CaseKind::Diffusion { amplitude, .. } => {
                let e = amplitude * (-t).exp();
                let (s, c) = (PI * z).sin_cos();
                Partials {
                    v: 1.0,
                    v_t: 0.0,
                    v_z: 0.0,
                    u_t: -e * s,
                    u_z: e * PI * c,
                    u_zz: -e * PI * PI * s,
                    eta: 1.0,
                    eta_dot: 0.0,
                }
            }
        }
    }

    fn piston_partials(&self, t: f64) -> (f64, f64, f64) {
        match self.kind {
            CaseKind::Equilibrium { b0 } | CaseKind::Diffusion { b0, .. } => (b0, 0.0, 0.0),
            CaseKind::Polynomial { b0, b_rate, .. } => (b0 + b_rate * t, b_rate, 0.0),
        }
    }

    /// Source of the continuity equation.
    pub fn forcing_v(&self, t: f64, z: f64) -> f64 {
        let p = self.partials(t, z);
        let alpha = -1.0 / p.eta;
        let beta = -z * p.eta_dot / p.eta;
        p.v_t + beta * p.v_z - alpha * p.u_z
    }

    /// Source of the momentum equation.
    pub fn forcing_u(&self, t: f64, z: f64) -> f64 {
        let p = self.partials(t, z);
        let (mu, gamma) = (self.params.mu, self.params.gamma);
        let alpha = -1.0 / p.eta;
        let beta = -z * p.eta_dot / p.eta;
        let viscous = mu * alpha * alpha * (p.u_zz / p.v - p.u_z * p.v_z / (p.v * p.v));
        // alpha q_z with q_z = -gamma v^(-gamma-1) v_z
        let pressure = -alpha * gamma * p.v.powf(-gamma - 1.0) * p.v_z;
        p.u_t + beta * p.u_z - viscous + pressure
    }

    /// Source of the piston equation.
    pub fn forcing_b(&self, t: f64) -> f64 {
        let pr = &self.params;
        let (b, b_dot, b_ddot) = self.piston_partials(t);
        let p = self.partials(t, 0.0);
        let alpha = -1.0 / p.eta;
        let load = p.v.powf(-pr.gamma) - pr.mu * alpha * p.u_z / p.v;
        b_ddot + pr.damping_l * b_dot + pr.stiffness_k * (b - pr.b_rest) - load
    }
}

/// Equation residuals of the exact fields with the hand-derived sources,
/// all derivatives taken by jets. Zero up to rounding for a correct case.
pub fn manufactured_residual(case: &ManufacturedCase, t: f64, z: f64) -> Residual {
    let pr = &case.params;
    let eta_j = case.eta_exact(Dual2::var(t));
    let (eta, eta_dot) = (eta_j.v, eta_j.d1);
    let alpha = -1.0 / eta;
    let beta = -z * eta_dot / eta;

    // time derivatives
    let tj = Dual2::var(t);
    let v_t = case.v_exact(tj, Dual2::cst(z)).d1;
    let u_t = case.u_exact(tj, Dual2::cst(z)).d1;

    // space derivatives, with the flux terms differentiated as composite jets
    let zj = Dual2::var(z);
    let tc = Dual2::cst(t);
    let v = case.v_exact(tc, zj);
    let u = case.u_exact(tc, zj);
    let u_z = Dual2 {
        v: u.d1,
        d1: u.d2,
        d2: 0.0,
    };
    let visc_flux = Dual2::cst(alpha) * u_z / v;
    let q = v.powf(-pr.gamma);

    let continuity = v_t + beta * v.d1 - alpha * u.d1 - case.forcing_v(t, z);
    let momentum =
        u_t + beta * u.d1 - pr.mu * alpha * visc_flux.d1 + alpha * q.d1 - case.forcing_u(t, z);

    let b = case.b_exact(Dual2::var(t));
    let b_dot = case.b_exact(Dual2::var(t)).d1;
    let b_ddot = b.d2;
    let z0 = Dual2::var(0.0);
    let v0 = case.v_exact(tc, z0);
    let u0 = case.u_exact(tc, z0);
    let load = v0.v.powf(-pr.gamma) - pr.mu * alpha * u0.d1 / v0.v;
    let piston = b_ddot + pr.damping_l * b_dot + pr.stiffness_k * (b.v - pr.b_rest)
        - load
        - case.forcing_b(t);

    Residual {
        continuity,
        momentum,
        piston,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sources_match_jet_derivatives() {
        for case in [
            ManufacturedCase::standard(),
            ManufacturedCase::moving_domain(),
            ManufacturedCase::diffusion(),
        ] {
            for &t in &[0.0, 0.3, 0.9] {
                for &z in &[0.0, 0.25, 0.5, 0.8, 1.0] {
                    let r = manufactured_residual(&case, t, z);
                    assert!(r.max_abs() < 1e-12, "{case:?} at ({t}, {z}): {r:?}");
                }
            }
        }
    }

    #[test]
    fn equilibrium_has_no_sources() {
        let case = ManufacturedCase::equilibrium(Params::default()).unwrap();
        assert_eq!(case.forcing_b(0.3), 0.0);
        assert_eq!(case.forcing_u(0.3, 0.4), 0.0);
        assert_eq!(case.forcing_v(0.3, 0.4), 0.0);
        assert!(manufactured_residual(&case, 0.3, 0.4).max_abs() < 1e-15);
    }

    #[test]
    fn incompatible_piston_velocity_is_rejected() {
        let kind = CaseKind::Polynomial {
            a_v: 0.0,
            a_u: 0.0,
            p0: 0.1,
            eta0: 1.0,
            eta_rate: 0.0,
            b0: 1.0,
            b_rate: 0.0,
        };
        assert!(matches!(
            ManufacturedCase::new(kind, Params::default()),
            Err(Error::InvalidInput(_))
        ));
    }
}
