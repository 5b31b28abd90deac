//! Grid, profile state and the correspondence between the integrated
//! profiles (ρ, κ) and the signed dislocation densities θ±.
//!
//! ρ and κ live on the `n_cells + 1` nodes of a uniform mesh of [-1, 1];
//! θ± are per-cell quantities, so
//!
//! ```text
//! θ±_i = (Δκ_i ± Δρ_i) / (2 dx),   Δκ_i = κ_{i+1} - κ_i
//! ```
//!
//! and the inverse is a cumulative sum anchored at x = -1. The two maps are
//! exact discrete inverses of each other.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on θ± positivity checks.
pub const POSITIVITY_TOL: f64 = 1e-12;

/// Tolerance on the right-wall anchors κ(1) = 1, ρ(1) = 0 after reconstruction.
pub const MASS_TOL: f64 = 1e-8;

/// Uniform mesh of the channel [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n_cells: usize,
    dx: f64,
    nodes: Vec<f64>,
}

impl Grid {
    pub const MIN_CELLS: usize = 4;

    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells < Self::MIN_CELLS {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least {} cells, got {n_cells}",
                Self::MIN_CELLS
            )));
        }
        let dx = 2.0 / n_cells as f64;
        let nodes = (0..=n_cells)
            .map(|i| {
                if i == n_cells {
                    1.0
                } else {
                    -1.0 + i as f64 * dx
                }
            })
            .collect();
        Ok(Self { n_cells, dx, nodes })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Midpoint of cell `i`.
    pub fn center(&self, i: usize) -> f64 {
        0.5 * (self.nodes[i] + self.nodes[i + 1])
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.center(i)).collect()
    }
}

/// Convenience wrapper for [`Grid::new`].
pub fn build_grid(n_cells: usize) -> Result<Grid> {
    Grid::new(n_cells)
}

/// Nodal profiles ρ (resolved plastic strain) and κ at one time instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelState {
    pub grid: Grid,
    pub rho: Vec<f64>,
    pub kappa: Vec<f64>,
    pub time: f64,
}

impl ChannelState {
    /// Builds a state, checking only array lengths. Use
    /// [`ChannelState::check_invariants`] for the boundary and positivity
    /// conditions.
    pub fn new(grid: Grid, rho: Vec<f64>, kappa: Vec<f64>, time: f64) -> Result<Self> {
        let n = grid.n_nodes();
        if rho.len() != n {
            return Err(Error::LengthMismatch {
                what: "rho",
                expected: n,
                got: rho.len(),
            });
        }
        if kappa.len() != n {
            return Err(Error::LengthMismatch {
                what: "kappa",
                expected: n,
                got: kappa.len(),
            });
        }
        Ok(Self {
            grid,
            rho,
            kappa,
            time,
        })
    }

    /// Samples closed-form profiles at the grid nodes.
    pub fn from_fn(
        grid: Grid,
        rho: impl Fn(f64) -> f64,
        kappa: impl Fn(f64) -> f64,
        time: f64,
    ) -> Self {
        let r = grid.nodes().iter().map(|&x| rho(x)).collect();
        let k = grid.nodes().iter().map(|&x| kappa(x)).collect();
        Self {
            grid,
            rho: r,
            kappa: k,
            time,
        }
    }

    /// ρ(±1) = 0, κ(±1) = ±1 within `tol`, and Δκ ≥ |Δρ| - tol on every cell.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let last = self.grid.n_cells();
        let checks = [
            ("rho(-1)", self.rho[0], 0.0),
            ("rho(1)", self.rho[last], 0.0),
            ("kappa(-1)", self.kappa[0], -1.0),
            ("kappa(1)", self.kappa[last], 1.0),
        ];
        for (name, got, want) in checks {
            if (got - want).abs() > tol {
                return Err(Error::Boundary(format!("{name} = {got}, expected {want}")));
            }
        }
        let margin = self.positivity_margin();
        if margin < -tol {
            return Err(Error::NegativeDensity {
                field: "kappa_x - |rho_x|",
                cell: margin_cell(self),
                value: margin,
            });
        }
        Ok(())
    }

    /// min over cells of κₓ − |ρₓ| from forward differences.
    pub fn positivity_margin(&self) -> f64 {
        let dx = self.grid.dx();
        (0..self.grid.n_cells())
            .map(|i| {
                let dk = self.kappa[i + 1] - self.kappa[i];
                let dr = self.rho[i + 1] - self.rho[i];
                (dk - dr.abs()) / dx
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn margin_cell(state: &ChannelState) -> usize {
    let dx = state.grid.dx();
    (0..state.grid.n_cells())
        .map(|i| {
            let dk = state.kappa[i + 1] - state.kappa[i];
            let dr = state.rho[i + 1] - state.rho[i];
            (i, (dk - dr.abs()) / dx)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Cell densities θ⁺ and θ⁻ (the unknowns evolved by the solver).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityPair {
    pub grid: Grid,
    pub theta_plus: Vec<f64>,
    pub theta_minus: Vec<f64>,
    pub time: f64,
}

impl DensityPair {
    pub fn new(grid: Grid, theta_plus: Vec<f64>, theta_minus: Vec<f64>, time: f64) -> Result<Self> {
        let n = grid.n_cells();
        for (what, v) in [("theta_plus", &theta_plus), ("theta_minus", &theta_minus)] {
            if v.len() != n {
                return Err(Error::LengthMismatch {
                    what,
                    expected: n,
                    got: v.len(),
                });
            }
        }
        Ok(Self {
            grid,
            theta_plus,
            theta_minus,
            time,
        })
    }

    /// Constant densities on every cell.
    pub fn uniform(grid: Grid, plus: f64, minus: f64) -> Self {
        let n = grid.n_cells();
        Self {
            grid,
            theta_plus: vec![plus; n],
            theta_minus: vec![minus; n],
            time: 0.0,
        }
    }

    /// Midpoint integrals (∫θ⁺, ∫θ⁻).
    pub fn masses(&self) -> (f64, f64) {
        let dx = self.grid.dx();
        (
            self.theta_plus.iter().sum::<f64>() * dx,
            self.theta_minus.iter().sum::<f64>() * dx,
        )
    }

    /// Signals the first cell where either density drops below `-tol`.
    pub fn check_nonnegative(&self, tol: f64) -> Result<()> {
        for (field, v) in [("theta_plus", &self.theta_plus), ("theta_minus", &self.theta_minus)] {
            if let Some((cell, &value)) = v.iter().enumerate().find(|(_, &t)| !(t >= -tol)) {
                return Err(Error::NegativeDensity { field, cell, value });
            }
        }
        Ok(())
    }

    /// κₓ = θ⁺ + θ⁻ per cell.
    pub fn total(&self) -> Vec<f64> {
        self.theta_plus
            .iter()
            .zip(&self.theta_minus)
            .map(|(p, m)| p + m)
            .collect()
    }

    /// ρₓ = θ⁺ − θ⁻ per cell.
    pub fn net(&self) -> Vec<f64> {
        self.theta_plus
            .iter()
            .zip(&self.theta_minus)
            .map(|(p, m)| p - m)
            .collect()
    }
}

/// θ± = (Δκ ± Δρ) / (2 dx) on every cell.
pub fn derive_densities(state: &ChannelState) -> Result<DensityPair> {
    let n = state.grid.n_cells();
    let dx = state.grid.dx();
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for i in 0..n {
        let dk = state.kappa[i + 1] - state.kappa[i];
        let dr = state.rho[i + 1] - state.rho[i];
        plus.push((dk + dr) / (2.0 * dx));
        minus.push((dk - dr) / (2.0 * dx));
    }
    let pair = DensityPair {
        grid: state.grid.clone(),
        theta_plus: plus,
        theta_minus: minus,
        time: state.time,
    };
    pair.check_nonnegative(POSITIVITY_TOL)?;
    Ok(pair)
}

/// Integrates κₓ = θ⁺ + θ⁻ and ρₓ = θ⁺ − θ⁻ from the anchors ρ(-1) = 0,
/// κ(-1) = -1 and checks that the right-wall values come out as ρ(1) = 0,
/// κ(1) = 1.
pub fn reconstruct_profiles(densities: &DensityPair) -> Result<ChannelState> {
    let state = reconstruct_unchecked(densities);
    let last = state.grid.n_cells();
    let k_end = state.kappa[last];
    if (k_end - 1.0).abs() > MASS_TOL {
        return Err(Error::MassDrift(format!("kappa(1) = {k_end}, expected 1")));
    }
    let r_end = state.rho[last];
    if r_end.abs() > MASS_TOL {
        return Err(Error::Boundary(format!("rho(1) = {r_end}, expected 0")));
    }
    Ok(state)
}

/// Cumulative integration without the right-wall checks.
pub fn reconstruct_unchecked(densities: &DensityPair) -> ChannelState {
    let grid = densities.grid.clone();
    let dx = grid.dx();
    let n = grid.n_cells();
    let mut rho = Vec::with_capacity(n + 1);
    let mut kappa = Vec::with_capacity(n + 1);
    let (mut r, mut k) = (0.0, -1.0);
    rho.push(r);
    kappa.push(k);
    for (p, m) in densities.theta_plus.iter().zip(&densities.theta_minus) {
        r += (p - m) * dx;
        k += (p + m) * dx;
        rho.push(r);
        kappa.push(k);
    }
    ChannelState {
        grid,
        rho,
        kappa,
        time: densities.time,
    }
}
