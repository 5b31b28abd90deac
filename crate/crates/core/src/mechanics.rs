//! Antiplane shear of a slab driven by the resolved plastic strain ρ.
//!
//! With u₁ ≡ 0 the displacement reduces to
//! `u₂(x₁) = (τ/μ) x₁ + ∫₀^{x₁} ρ(x) dx`. Long-time profiles of the
//! regularized system are available in closed form, with `a = τ/(1+ε)` and
//! `B = 1/sinh a`:
//!
//! ```text
//! ρ∞(x) = B (cosh(a x) − cosh a),    κ∞(x) = B sinh(a x)
//! ```
//!
//! Note: the closed form for κ∞ is sometimes quoted without the factor x
//! inside the sinh. That version is constant in x and cannot meet both wall
//! conditions κ(±1) = ±1; the x-dependent version above satisfies them and
//! the stationary equations, and is cross-checked against [`shooting`].

pub mod shooting;

use crate::error::{Error, Result};
use crate::state::{ChannelState, Grid};

/// Elastic constants and applied stress.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicsConfig {
    /// Shear modulus μ > 0.
    pub mu: f64,
    /// First Lamé parameter; it drops out of the antiplane reduction.
    pub lambda: f64,
    pub tau: f64,
}

impl MechanicsConfig {
    pub fn new(mu: f64, lambda: f64, tau: f64) -> Result<Self> {
        let c = Self { mu, lambda, tau };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidArgument(format!("mu must be > 0, got {}", self.mu)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        if !self.tau.is_finite() {
            return Err(Error::InvalidArgument(format!("tau must be finite, got {}", self.tau)));
        }
        Ok(())
    }
}

/// ε^p = ρ ε⁰ with ε⁰ᵢⱼ = (1 − δᵢⱼ)/2.
pub fn plastic_strain(rho: f64) -> [[f64; 2]; 2] {
    [[0.0, rho / 2.0], [rho / 2.0, 0.0]]
}

/// u₂ on the grid nodes from nodal ρ, anchored at u₂(0) = 0.
///
/// When 0 is not a node, the trapezoid containing it is split at 0 using
/// the linear interpolant of ρ.
pub fn displacement_profile(rho: &[f64], grid: &Grid, config: &MechanicsConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let x = grid.nodes();
    if rho.len() != x.len() {
        return Err(Error::LengthMismatch {
            what: "rho samples",
            expected: x.len(),
            got: rho.len(),
        });
    }
    let mut cum = vec![0.0; x.len()];
    for i in 1..x.len() {
        cum[i] = cum[i - 1] + 0.5 * (x[i] - x[i - 1]) * (rho[i] + rho[i - 1]);
    }
    let k = x.partition_point(|&xi| xi <= 0.0).saturating_sub(1).min(x.len() - 2);
    let w = (0.0 - x[k]) / (x[k + 1] - x[k]);
    let rho0 = rho[k] + w * (rho[k + 1] - rho[k]);
    let at_zero = cum[k] + 0.5 * (0.0 - x[k]) * (rho[k] + rho0);
    let slope = config.tau / config.mu;
    Ok(x.iter().zip(&cum).map(|(&xi, &c)| slope * xi + c - at_zero).collect())
}

fn check_tau(tau: f64) -> Result<()> {
    if tau == 0.0 || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "closed-form stationary profile needs finite tau != 0 (got {tau}); \
             for tau = 0 the stationary state is rho = 0, kappa = x (see trivial_stationary_profile)"
        )));
    }
    Ok(())
}

/// ρ∞(x) for stress τ ≠ 0 and regularization ε ≥ 0.
pub fn stationary_rho(x: f64, tau: f64, epsilon: f64) -> f64 {
    let a = tau / (1.0 + epsilon);
    ((a * x).cosh() - a.cosh()) / a.sinh()
}

/// κ∞(x) for stress τ ≠ 0 and regularization ε ≥ 0.
pub fn stationary_kappa(x: f64, tau: f64, epsilon: f64) -> f64 {
    let a = tau / (1.0 + epsilon);
    (a * x).sinh() / a.sinh()
}

/// Long-time profiles on the grid nodes.
///
/// # Errors
/// Rejects τ = 0; use [`trivial_stationary_profile`] there.
pub fn stationary_profile(tau: f64, epsilon: f64, grid: &Grid) -> Result<ChannelState> {
    check_tau(tau)?;
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let mut s = ChannelState::from_fn(
        grid.clone(),
        |x| stationary_rho(x, tau, epsilon),
        |x| stationary_kappa(x, tau, epsilon),
        f64::INFINITY,
    );
    // Pin the walls exactly; the closed forms are exact there up to rounding.
    let n = s.rho.len();
    s.rho[0] = 0.0;
    s.rho[n - 1] = 0.0;
    s.kappa[0] = -1.0;
    s.kappa[n - 1] = 1.0;
    Ok(s)
}

/// The τ = 0 steady state ρ ≡ 0, κ(x) = x.
pub fn trivial_stationary_profile(grid: &Grid) -> ChannelState {
    ChannelState::from_fn(grid.clone(), |_| 0.0, |x| x, f64::INFINITY)
}

/// u₂(x₁) of the ε → 0 long-time state:
/// `(τ/μ − coth τ) x₁ + sinh(τx₁) / (τ sinh τ)`.
pub fn longtime_displacement(x1: f64, config: &MechanicsConfig) -> Result<f64> {
    config.validate()?;
    let tau = config.tau;
    check_tau(tau)?;
    Ok((tau / config.mu - 1.0 / tau.tanh()) * x1 + (tau * x1).sinh() / (tau * tau.sinh()))
}

/// Reference lattice over [-1, 1] × [0, height] and its displaced image.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformedMesh {
    pub rows: usize,
    pub cols: usize,
    /// Row-major, `rows × cols` points `(x₁, x₂)`.
    pub reference: Vec<(f64, f64)>,
    pub displaced: Vec<(f64, f64)>,
}

impl DeformedMesh {
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    /// Displaced points along one lattice row (fixed x₂).
    pub fn row(&self, r: usize) -> &[(f64, f64)] {
        &self.displaced[r * self.cols..(r + 1) * self.cols]
    }

    /// Displaced points along one lattice column (fixed x₁).
    pub fn column(&self, c: usize) -> Vec<(f64, f64)> {
        (0..self.rows).map(|r| self.displaced[self.index(r, c)]).collect()
    }
}

/// Displaces a `rows × cols` lattice by (0, u₂(x₁)).
pub fn deformed_mesh(
    rho: &[f64],
    grid: &Grid,
    config: &MechanicsConfig,
    rows: usize,
    cols: usize,
    height: f64,
) -> Result<DeformedMesh> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidArgument(format!(
            "mesh needs at least 2 rows and columns, got {rows} x {cols}"
        )));
    }
    if !(height > 0.0) {
        return Err(Error::InvalidArgument(format!("height must be > 0, got {height}")));
    }
    let u2 = displacement_profile(rho, grid, config)?;
    let nodes = grid.nodes();
    let interp = |x: f64| {
        let k = nodes.partition_point(|&xi| xi <= x).saturating_sub(1).min(nodes.len() - 2);
        let w = (x - nodes[k]) / (nodes[k + 1] - nodes[k]);
        u2[k] + w * (u2[k + 1] - u2[k])
    };
    let mut reference = Vec::with_capacity(rows * cols);
    let mut displaced = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let x2 = height * r as f64 / (rows - 1) as f64;
        for c in 0..cols {
            let x1 = if c + 1 == cols { 1.0 } else { -1.0 + 2.0 * c as f64 / (cols - 1) as f64 };
            reference.push((x1, x2));
            displaced.push((x1, x2 + interp(x1)));
        }
    }
    Ok(DeformedMesh {
        rows,
        cols,
        reference,
        displaced,
    })
}
