//! Shooting solver for the stationary regularized system
//!
//! ```text
//! 0 = (1+ε) ρₓₓ − τ κₓ
//! 0 = ε κₓₓ + ρₓ ρₓₓ / κₓ − τ ρₓ
//! ρ(±1) = 0,  κ(±1) = ±1
//! ```
//!
//! The system is integrated from x = −1 as a first-order system in
//! (ρ, ρₓ, κ, κₓ) with classical RK4; the two unknown slopes at −1 are found
//! by damped Newton iteration with a finite-difference Jacobian. It does not
//! use the closed-form profiles and serves as an independent check of them.

use crate::error::{Error, Result};
use crate::state::{ChannelState, Grid};

/// Largest RK4 step used between grid nodes.
pub const MAX_STEP: f64 = 1e-3;

const NEWTON_TOL: f64 = 1e-12;
const MAX_ITER: usize = 50;

/// Solution of the boundary value problem sampled at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ShootingSolution {
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
    pub rho_x: Vec<f64>,
    pub kappa: Vec<f64>,
    pub kappa_x: Vec<f64>,
    pub iterations: usize,
    /// Euclidean norm of (ρ(1), κ(1) − 1) at the accepted slopes.
    pub miss: f64,
}

impl ShootingSolution {
    pub fn to_state(&self, grid: &Grid) -> Result<ChannelState> {
        ChannelState::new(grid.clone(), self.rho.clone(), self.kappa.clone(), f64::INFINITY)
    }
}

type Y = [f64; 4];

fn rhs(y: &Y, tau: f64, eps: f64) -> Result<Y> {
    let [_, rx, _, kx] = *y;
    if !(kx > 0.0) {
        return Err(Error::ShootingFailed {
            iterations: 0,
            miss: f64::NAN,
        });
    }
    let rxx = tau * kx / (1.0 + eps);
    let kxx = (tau * rx - rx * rxx / kx) / eps;
    Ok([rx, rxx, kx, kxx])
}

fn rk4(y: &Y, h: f64, tau: f64, eps: f64) -> Result<Y> {
    let add = |a: &Y, b: &Y, s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2], a[3] + s * b[3]];
    let k1 = rhs(y, tau, eps)?;
    let k2 = rhs(&add(y, &k1, h / 2.0), tau, eps)?;
    let k3 = rhs(&add(y, &k2, h / 2.0), tau, eps)?;
    let k4 = rhs(&add(y, &k3, h), tau, eps)?;
    Ok(std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])))
}

/// Integrates across the grid; returns the nodal states.
fn integrate(slopes: [f64; 2], grid: &Grid, tau: f64, eps: f64) -> Result<Vec<Y>> {
    let nodes = grid.nodes();
    let sub = (grid.dx() / MAX_STEP).ceil().max(1.0) as usize;
    let mut y = [0.0, slopes[0], -1.0, slopes[1]];
    let mut out = Vec::with_capacity(nodes.len());
    out.push(y);
    for w in nodes.windows(2) {
        let h = (w[1] - w[0]) / sub as f64;
        for _ in 0..sub {
            y = rk4(&y, h, tau, eps)?;
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::ShootingFailed {
                iterations: 0,
                miss: f64::INFINITY,
            });
        }
        out.push(y);
    }
    Ok(out)
}

fn miss(slopes: [f64; 2], grid: &Grid, tau: f64, eps: f64) -> Result<[f64; 2]> {
    let ys = integrate(slopes, grid, tau, eps)?;
    let end = ys[ys.len() - 1];
    Ok([end[0], end[2] - 1.0])
}

/// Solves the stationary problem for ε > 0, starting Newton from the
/// uniform state (ρₓ, κₓ) = (0, 1) at x = −1.
pub fn solve_stationary(tau: f64, epsilon: f64, grid: &Grid) -> Result<ShootingSolution> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "shooting needs epsilon > 0 (the stationary system degenerates at 0), got {epsilon}"
        )));
    }
    if !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("tau = {tau}")));
    }
    let norm = |m: [f64; 2]| m[0].hypot(m[1]);
    let mut s = [0.0, 1.0];
    let mut m = miss(s, grid, tau, epsilon)?;
    let mut iterations = 0;
    while norm(m) > NEWTON_TOL {
        if iterations == MAX_ITER {
            return Err(Error::ShootingFailed {
                iterations,
                miss: norm(m),
            });
        }
        iterations += 1;
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let h = 1e-7 * s[j].abs().max(1.0);
            let mut sp = s;
            sp[j] += h;
            let mp = miss(sp, grid, tau, epsilon)?;
            jac[0][j] = (mp[0] - m[0]) / h;
            jac[1][j] = (mp[1] - m[1]) / h;
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::ShootingFailed {
                iterations,
                miss: norm(m),
            });
        }
        let d = [
            (jac[1][1] * m[0] - jac[0][1] * m[1]) / det,
            (-jac[1][0] * m[0] + jac[0][0] * m[1]) / det,
        ];
        // Halve the update until the miss decreases and κₓ stays positive.
        let mut lambda = 1.0;
        loop {
            let trial = [s[0] - lambda * d[0], s[1] - lambda * d[1]];
            if let Ok(mt) = miss(trial, grid, tau, epsilon) {
                if norm(mt) < norm(m) {
                    s = trial;
                    m = mt;
                    break;
                }
            }
            lambda /= 2.0;
            if lambda < 1e-10 {
                // Newton can no longer make progress; accept if already tiny.
                if norm(m) < 1e-10 {
                    break;
                }
                return Err(Error::ShootingFailed {
                    iterations,
                    miss: norm(m),
                });
            }
        }
        if lambda < 1e-10 {
            break;
        }
    }
    let ys = integrate(s, grid, tau, epsilon)?;
    Ok(ShootingSolution {
        x: grid.nodes().to_vec(),
        rho: ys.iter().map(|y| y[0]).collect(),
        rho_x: ys.iter().map(|y| y[1]).collect(),
        kappa: ys.iter().map(|y| y[2]).collect(),
        kappa_x: ys.iter().map(|y| y[3]).collect(),
        iterations,
        miss: norm(m),
    })
}
