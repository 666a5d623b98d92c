//! Eulerian `(0, b)`, Lagrangian mass `(-eta, 0)` and normalised `(0, 1)`
//! coordinates, with the maps between them.
//!
//! Orientation: `z = y / (-eta)`, so the piston (`x = b`, `y = 0`) sits at
//! `z = 0` and the open end (`x = 0`, `y = -eta`) at `z = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GridState, PistonState};
use crate::profile::interp_clamped;

/// Density and velocity sampled on `[0, b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerianField {
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub b: f64,
}

impl EulerianField {
    pub fn new(x: Vec<f64>, rho: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        let b = x.last().copied().unwrap_or(0.0);
        let f = EulerianField { x, rho, u, b };
        f.validate()?;
        Ok(f)
    }

    /// Samples `rho(x)` and `u(x)` at `n_points` uniform points of `[0, b]`.
    pub fn sample(
        b: f64,
        n_points: usize,
        rho: impl Fn(f64) -> f64,
        u: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::InvalidInput("need at least 2 sample points".into()));
        }
        let x: Vec<f64> = (0..n_points)
            .map(|i| {
                if i + 1 == n_points {
                    b
                } else {
                    b * i as f64 / (n_points - 1) as f64
                }
            })
            .collect();
        let r = x.iter().map(|&s| rho(s)).collect();
        let w = x.iter().map(|&s| u(s)).collect();
        Self::new(x, r, w)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.x.len();
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 sample points, got {n}"
            )));
        }
        if self.rho.len() != n || self.u.len() != n {
            return Err(Error::InvalidInput(
                "x, rho and u must have equal length".into(),
            ));
        }
        if self.x[0] != 0.0 || self.x[n - 1] != self.b || !(self.b > 0.0) {
            return Err(Error::InvalidInput(format!(
                "samples must span [0, b] with b > 0, got [{}, {}] and b = {}",
                self.x[0],
                self.x[n - 1],
                self.b
            )));
        }
        if self.x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("x must be strictly increasing".into()));
        }
        if let Some(r) = self.rho.iter().find(|r| !(**r > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "density must be positive (mass coordinate would not be monotone), found {r}"
            )));
        }
        Ok(())
    }
}

/// `alpha = -1/eta` and `beta(z) = -z * eta_dot / eta` at a set of points.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffPair {
    pub alpha: f64,
    pub beta: Vec<f64>,
}

/// Coefficients sampled where the solver needs them.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCoefficients {
    pub alpha: f64,
    pub beta_centres: Vec<f64>,
    pub beta_edges: Vec<f64>,
}

impl GridCoefficients {
    pub fn new(eta: f64, eta_dot: f64, n_cells: usize) -> Result<Self> {
        let h = 1.0 / n_cells as f64;
        let centres: Vec<f64> = (0..n_cells).map(|j| (j as f64 + 0.5) * h).collect();
        let edges: Vec<f64> = (0..=n_cells).map(|i| i as f64 * h).collect();
        let c = coefficients_alpha_beta(eta, eta_dot, &centres)?;
        let e = coefficients_alpha_beta(eta, eta_dot, &edges)?;
        Ok(GridCoefficients {
            alpha: c.alpha,
            beta_centres: c.beta,
            beta_edges: e.beta,
        })
    }

    pub fn frozen(eta: f64, n_cells: usize) -> Result<Self> {
        Self::new(eta, 0.0, n_cells)
    }

    pub fn max_abs_beta(&self) -> f64 {
        self.beta_edges.iter().fold(0.0, |m, b| m.max(b.abs()))
    }
}

/// Mass coordinate `chi(x) = -int_x^b rho` by composite trapezoid, and the
/// total mass `eta = -chi(0)`.
pub fn mass_coordinate_of(field: &EulerianField) -> Result<(Vec<f64>, f64)> {
    field.validate()?;
    let n = field.x.len();
    let mut chi = vec![0.0; n];
    for i in (0..n - 1).rev() {
        chi[i] =
            chi[i + 1] - 0.5 * (field.rho[i] + field.rho[i + 1]) * (field.x[i + 1] - field.x[i]);
    }
    let eta = -chi[0];
    Ok((chi, eta))
}

/// Samples `v = 1/rho` at cell centres and `u` at edges of the normalised grid.
pub fn lagrangian_init_from_eulerian(field: &EulerianField, n_cells: usize) -> Result<GridState> {
    if n_cells < 4 {
        return Err(Error::InvalidInput(format!(
            "n_cells must be at least 4, got {n_cells}"
        )));
    }
    let (chi, eta) = mass_coordinate_of(field)?;
    if chi.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "mass coordinate is not strictly increasing".into(),
        ));
    }
    let x_of_z = |z: f64| {
        if z <= 0.0 {
            field.b
        } else if z >= 1.0 {
            0.0
        } else {
            interp_clamped(&chi, &field.x, -eta * z)
        }
    };
    let h = 1.0 / n_cells as f64;
    let v = (0..n_cells)
        .map(|j| 1.0 / interp_clamped(&field.x, &field.rho, x_of_z((j as f64 + 0.5) * h)))
        .collect();
    let u = (0..=n_cells)
        .map(|i| interp_clamped(&field.x, &field.u, x_of_z(i as f64 * h)))
        .collect();
    GridState::new(v, u, eta)
}

/// Result of mapping a grid state back to physical space.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// Samples at the cell edges, ordered by increasing `x`.
    pub field: EulerianField,
    /// `piston.b - sum v_j dy`.
    pub b_mismatch: f64,
}

/// Places edges by accumulating `v dy` from the piston end; `rho = 1/v`.
pub fn reconstruct_eulerian(state: &GridState, piston: &PistonState) -> Result<Reconstruction> {
    state.validate()?;
    let n = state.n_cells();
    let dy = state.dy();
    let length = state.column_length();
    // edge i sits at distance sum_{j<i} v_j dy from the piston
    let mut x_edge = vec![0.0; n + 1];
    let mut acc = 0.0;
    x_edge[0] = length;
    for i in 1..=n {
        acc += state.v[i - 1] * dy;
        x_edge[i] = if i == n { 0.0 } else { length - acc };
    }
    let v_edge = |i: usize| -> f64 {
        if i == 0 || i == n {
            let (a, b) = if i == 0 {
                (state.v[0], state.v.get(1).copied())
            } else {
                (state.v[n - 1], n.checked_sub(2).map(|k| state.v[k]))
            };
            match b {
                Some(b) if 1.5 * a - 0.5 * b > 0.0 => 1.5 * a - 0.5 * b,
                _ => a,
            }
        } else {
            0.5 * (state.v[i - 1] + state.v[i])
        }
    };
    let mut x = Vec::with_capacity(n + 1);
    let mut rho = Vec::with_capacity(n + 1);
    let mut u = Vec::with_capacity(n + 1);
    for i in (0..=n).rev() {
        x.push(x_edge[i]);
        rho.push(1.0 / v_edge(i));
        u.push(state.u[i]);
    }
    let field = EulerianField {
        x,
        rho,
        u,
        b: length,
    };
    Ok(Reconstruction {
        field,
        b_mismatch: piston.b - length,
    })
}

/// Coefficients at explicit sample points.
pub fn coefficients_alpha_beta(eta: f64, eta_dot: f64, z_samples: &[f64]) -> Result<CoeffPair> {
    if !(eta > 0.0) {
        return Err(Error::DomainCollapse { eta });
    }
    let rate = eta_dot / eta;
    Ok(CoeffPair {
        alpha: -1.0 / eta,
        beta: z_samples.iter().map(|z| -z * rate).collect(),
    })
}
