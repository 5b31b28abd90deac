//! Monitored quantities along trajectories: entropy and its growth bound,
//! κₓ log κₓ control, positivity margin, back stress and the A-field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::Trajectory;
use crate::state::{reconstruct_unchecked, ChannelState, DensityPair};

/// s log s with 0 log 0 = 0 (non-positive input counts as 0).
#[inline]
pub fn xlogx(s: f64) -> f64 {
    if s > 0.0 {
        s * s.ln()
    } else {
        0.0
    }
}

/// S = ∫ θ⁺ log θ⁺ + θ⁻ log θ⁻, midpoint rule on cells.
pub fn entropy(densities: &DensityPair) -> f64 {
    let dx = densities.grid.dx();
    densities
        .theta_plus
        .iter()
        .zip(&densities.theta_minus)
        .map(|(&p, &m)| xlogx(p) + xlogx(m))
        .sum::<f64>()
        * dx
}

/// S(0) + τ² t / 2.
pub fn entropy_bound(s0: f64, tau: f64, t: f64) -> f64 {
    s0 + tau * tau * t / 2.0
}

/// ∫ κₓ log κₓ with κₓ = θ⁺ + θ⁻.
pub fn kx_log_control(densities: &DensityPair) -> f64 {
    let dx = densities.grid.dx();
    densities
        .theta_plus
        .iter()
        .zip(&densities.theta_minus)
        .map(|(&p, &m)| xlogx(p + m))
        .sum::<f64>()
        * dx
}

/// min over cells of κₓ − |ρₓ| = 2 min(θ⁺, θ⁻).
pub fn positivity_margin(densities: &DensityPair) -> f64 {
    densities
        .theta_plus
        .iter()
        .zip(&densities.theta_minus)
        .map(|(&p, &m)| 2.0 * p.min(m))
        .fold(f64::INFINITY, f64::min)
}

/// Whether (x+y) log(x+y) ≤ x log x + y log y + x log 2 + y.
///
/// Returns false for inputs that are not finite and positive.
pub fn log_sum_inequality_check(x: f64, y: f64) -> bool {
    if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
        return false;
    }
    (x + y) * (x + y).ln() <= x * x.ln() + y * y.ln() + x * std::f64::consts::LN_2 + y
}

/// Back stress (θ⁺ − θ⁻)ₓ / (θ⁺ + θ⁻) at the interior faces, with the
/// total density averaged across the face.
pub fn back_stress(densities: &DensityPair, floor: f64) -> Result<Vec<f64>> {
    let (tp, tm) = (&densities.theta_plus, &densities.theta_minus);
    let dx = densities.grid.dx();
    (0..tp.len() - 1)
        .map(|i| {
            let t = 0.5 * (tp[i] + tm[i] + tp[i + 1] + tm[i + 1]);
            if !(t >= floor) {
                return Err(Error::DegenerateDensity {
                    face: i + 1,
                    value: t,
                    floor,
                });
            }
            Ok(((tp[i + 1] - tm[i + 1]) - (tp[i] - tm[i])) / (dx * t))
        })
        .collect()
}

/// Nodal derivative: centered inside, second-order one-sided at the ends.
fn nodal_derivative(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    for j in 1..n - 1 {
        d[j] = (f[j + 1] - f[j - 1]) / (2.0 * dx);
    }
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
    d
}

/// A = ρₓ − τκ on the nodes.
pub fn a_field(state: &ChannelState, tau: f64) -> Vec<f64> {
    nodal_derivative(&state.rho, state.grid.dx())
        .iter()
        .zip(&state.kappa)
        .map(|(rx, k)| rx - tau * k)
        .collect()
}

/// Residual of Aₜ = (1+ε)Aₓₓ − (τρₓ/κₓ)Aₓ, see [`a_residual_states`].
pub fn a_residual(traj: &Trajectory, tau: f64, epsilon: f64) -> Result<f64> {
    let states: Vec<ChannelState> = traj.snapshots.iter().map(reconstruct_unchecked).collect();
    a_residual_states(&states, tau, epsilon, 1e-12)
}

/// Sup-norm of Aₜ − (1+ε)Aₓₓ + (τρₓ/κₓ)Aₓ over nodes at least two cells
/// from each wall and over all snapshots except the first and last.
///
/// Aₜ uses the three-point central difference for non-uniform time levels.
pub fn a_residual_states(states: &[ChannelState], tau: f64, epsilon: f64, floor: f64) -> Result<f64> {
    if states.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 snapshots, got {}",
            states.len()
        )));
    }
    let grid = &states[0].grid;
    let n = grid.n_cells();
    if states.iter().any(|s| s.grid.n_cells() != n) {
        return Err(Error::InvalidArgument("snapshots live on different grids".into()));
    }
    if n < 5 {
        return Err(Error::InvalidArgument("grid too coarse for interior residual".into()));
    }
    let dx = grid.dx();
    let fields: Vec<Vec<f64>> = states.iter().map(|s| a_field(s, tau)).collect();
    let mut worst: f64 = 0.0;
    for k in 1..states.len() - 1 {
        let hm = states[k].time - states[k - 1].time;
        let hp = states[k + 1].time - states[k].time;
        if !(hm > 0.0 && hp > 0.0) {
            return Err(Error::InvalidArgument("snapshot times must increase".into()));
        }
        let (a0, a1, a2) = (&fields[k - 1], &fields[k], &fields[k + 1]);
        let s = &states[k];
        for j in 2..=n - 2 {
            let at = ((a2[j] - a1[j]) * hm / hp + (a1[j] - a0[j]) * hp / hm) / (hm + hp);
            let axx = (a1[j + 1] - 2.0 * a1[j] + a1[j - 1]) / (dx * dx);
            let ax = (a1[j + 1] - a1[j - 1]) / (2.0 * dx);
            let rx = (s.rho[j + 1] - s.rho[j - 1]) / (2.0 * dx);
            let kx = (s.kappa[j + 1] - s.kappa[j - 1]) / (2.0 * dx);
            if !(kx >= floor) {
                return Err(Error::DegenerateDensity {
                    face: j,
                    value: kx,
                    floor,
                });
            }
            let r = at - (1.0 + epsilon) * axx + tau * rx / kx * ax;
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

/// One row of the entropy time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyRecord {
    pub time: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub bound: f64,
    pub mass_plus: f64,
    pub mass_minus: f64,
    pub positivity_margin: f64,
    pub kxlogkx: f64,
    pub kxlogkx_bound: f64,
}

impl EntropyRecord {
    /// Column names, in serialization order.
    pub const FIELDS: [&'static str; 8] = [
        "time",
        "S",
        "bound",
        "mass_plus",
        "mass_minus",
        "positivity_margin",
        "kxlogkx",
        "kxlogkx_bound",
    ];

    /// Record for `densities`, measuring growth from `t0` where S = `s0`.
    pub fn new(densities: &DensityPair, s0: f64, t0: f64, tau: f64) -> Self {
        let (mass_plus, mass_minus) = densities.masses();
        let bound = entropy_bound(s0, tau, densities.time - t0);
        Self {
            time: densities.time,
            s: entropy(densities),
            bound,
            mass_plus,
            mass_minus,
            positivity_margin: positivity_margin(densities),
            kxlogkx: kx_log_control(densities),
            kxlogkx_bound: bound + 2.0,
        }
    }

    pub fn values(&self) -> [f64; 8] {
        [
            self.time,
            self.s,
            self.bound,
            self.mass_plus,
            self.mass_minus,
            self.positivity_margin,
            self.kxlogkx,
            self.kxlogkx_bound,
        ]
    }
}

/// Entropy records for every snapshot, measured from the first one.
pub fn entropy_records(traj: &Trajectory, tau: f64) -> Vec<EntropyRecord> {
    let Some(first) = traj.snapshots.first() else {
        return Vec::new();
    };
    let s0 = entropy(first);
    traj.snapshots
        .iter()
        .map(|d| EntropyRecord::new(d, s0, first.time, tau))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Grid;

    fn pair(n: usize, p: f64, m: f64) -> DensityPair {
        DensityPair::uniform(Grid::new(n).unwrap(), p, m)
    }

    #[test]
    fn entropy_of_constants() {
        assert!((entropy(&pair(50, 0.5, 0.5)) - 2.0 * 0.5f64.ln()).abs() < 1e-14);
        assert!((entropy(&pair(50, 0.5, 0.5)) + 1.386294).abs() < 1e-6);
        assert_eq!(entropy(&pair(50, 1.0, 0.0)), 0.0);
    }

    #[test]
    fn bound_values() {
        assert_eq!(entropy_bound(-0.7, 0.0, 12.0), -0.7);
        assert!((entropy_bound(-1.386294, 2.0, 1.0) - 0.613706).abs() < 1e-12);
        assert_eq!(entropy_bound(0.3, 5.0, 0.0), 0.3);
    }

    #[test]
    fn kx_log_of_unit_total() {
        assert!(kx_log_control(&pair(20, 0.5, 0.5)).abs() < 1e-15);
        assert_eq!(kx_log_control(&pair(20, 1.0, 0.0)), 0.0);
    }

    #[test]
    fn log_sum_examples() {
        assert!(log_sum_inequality_check(1.0, 1.0));
        assert!(log_sum_inequality_check(1e-9, 1.0));
        assert!(!log_sum_inequality_check(0.0, 1.0));
        assert!(!log_sum_inequality_check(1.0, f64::NAN));
    }

    #[test]
    fn back_stress_constant_and_linear() {
        assert!(back_stress(&pair(10, 0.3, 0.7), 1e-12).unwrap().iter().all(|&b| b == 0.0));
        // κₓ ≡ 1 and ρₓ = x/2 at cell centers: τ_b = ρₓₓ = 1/2.
        let g = Grid::new(16).unwrap();
        let c = g.centers();
        let tp: Vec<f64> = c.iter().map(|x| 0.5 + x / 4.0).collect();
        let tm: Vec<f64> = c.iter().map(|x| 0.5 - x / 4.0).collect();
        let d = DensityPair::new(g, tp, tm, 0.0).unwrap();
        for b in back_stress(&d, 1e-12).unwrap() {
            assert!((b - 0.5).abs() < 1e-13);
        }
        let mut z = pair(10, 0.5, 0.5);
        z.theta_plus[4] = 0.0;
        z.theta_minus[4] = 0.0;
        z.theta_plus[5] = 0.0;
        z.theta_minus[5] = 0.0;
        assert!(back_stress(&z, 1e-12).is_err());
    }

    #[test]
    fn a_field_examples() {
        let g = Grid::new(20).unwrap();
        let s = ChannelState::from_fn(g, |_| 0.0, |x| x, 0.0);
        for (a, x) in a_field(&s, 1.0).iter().zip(s.grid.nodes()) {
            assert!((a + x).abs() < 1e-15);
        }
        let s2 = ChannelState::from_fn(Grid::new(20).unwrap(), |x| 1.0 - x * x, |x| x, 0.0);
        let a = a_field(&s2, 0.0);
        for (ai, x) in a.iter().zip(s2.grid.nodes()) {
            assert!((ai + 2.0 * x).abs() < 1e-12);
        }
    }

    #[test]
    fn a_residual_needs_three_snapshots() {
        let g = Grid::new(20).unwrap();
        let s = ChannelState::from_fn(g, |_| 0.0, |x| x, 0.0);
        assert!(a_residual_states(&[s.clone(), s], 1.0, 0.1, 1e-12).is_err());
    }

    #[test]
    fn record_fields_line_up() {
        let r = EntropyRecord::new(&pair(10, 0.5, 0.5), -1.0, 0.0, 1.0);
        assert_eq!(r.values().len(), EntropyRecord::FIELDS.len());
        assert_eq!(r.kxlogkx_bound, r.bound + 2.0);
        assert!((r.positivity_margin - 1.0).abs() < 1e-15);
    }
}
