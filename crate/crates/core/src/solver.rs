//! Explicit conservative upwind integration of the regularized system
//!
//! ```text
//! θ⁺ₜ = [ v θ⁺ + ε θ⁺ₓ ]ₓ,    θ⁻ₜ = [ −v θ⁻ + ε θ⁻ₓ ]ₓ,    v = (θ⁺ − θ⁻)ₓ / (θ⁺ + θ⁻) − τ
//! ```
//!
//! with zero flux through the walls.
//!
//! At an interior face the velocity uses the centered difference ΔD of
//! D = θ⁺ − θ⁻ and an upwinded total density. For v > 0 the upwind cells
//! are i+1 for θ⁺ and i for θ⁻, so the candidate is
//! `v_R = ΔD / (dx (θ⁺ᵢ₊₁ + θ⁻ᵢ)) − τ`; for v < 0 they swap and the
//! candidate is `v_L = ΔD / (dx (θ⁺ᵢ + θ⁻ᵢ₊₁)) − τ`. The two denominators
//! differ by exactly −ΔD, so at most one candidate is consistent with its
//! own sign; when neither is, the transport flux vanishes.
//!
//! This makes the ρ-flux `(1+ε) ΔD/dx − τ (θ⁺ + θ⁻)_upwind`, which at τ = 0
//! is the standard three-point heat operator, and keeps θ± ≥ 0 whenever
//! `2(1+ε) dt/dx² + 2|τ| dt/dx ≤ 1`.

use crate::error::{Error, Result};
use crate::state::{DensityPair, POSITIVITY_TOL};

/// Parameters of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Applied stress τ.
    pub tau: f64,
    /// Regularization ε ≥ 0.
    pub epsilon: f64,
    /// Safety factor in (0, 1].
    pub cfl: f64,
    /// Smallest admissible total density at a face or cell.
    pub kappa_x_floor: f64,
    /// Final time for `run_until`.
    pub t_end: f64,
    /// Threshold on max |Δθ|/dt for `run_to_steady`.
    pub steady_tol: f64,
    /// `run_to_steady` gives up past this time.
    pub max_time: f64,
}

impl SolverConfig {
    pub fn new(tau: f64, epsilon: f64, t_end: f64) -> Self {
        Self {
            tau,
            epsilon,
            cfl: 0.9,
            kappa_x_floor: 1e-12,
            t_end,
            steady_tol: 1e-7,
            max_time: 1e3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !self.tau.is_finite() {
            return bad(format!("tau must be finite, got {}", self.tau));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be >= 0, got {}", self.epsilon));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.kappa_x_floor > 0.0) {
            return bad(format!("kappa_x_floor must be > 0, got {}", self.kappa_x_floor));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be finite and >= 0, got {}", self.t_end));
        }
        if !(self.steady_tol > 0.0) {
            return bad(format!("steady_tol must be > 0, got {}", self.steady_tol));
        }
        if !(self.max_time > 0.0) {
            return bad(format!("max_time must be > 0, got {}", self.max_time));
        }
        Ok(())
    }
}

/// Snapshots at the requested output times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<DensityPair>,
    /// Number of time steps taken.
    pub steps: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    pub fn last(&self) -> Option<&DensityPair> {
        self.snapshots.last()
    }
}

/// Selected velocity at each interior face, `n_cells − 1` entries.
/// Returns max |v|.
fn face_velocities(tp: &[f64], tm: &[f64], tau: f64, floor: f64, dx: f64, v: &mut [f64]) -> Result<f64> {
    let mut vmax: f64 = 0.0;
    for i in 0..v.len() {
        let d_jump = (tp[i + 1] - tm[i + 1]) - (tp[i] - tm[i]);
        let t_r = tp[i + 1] + tm[i];
        let t_l = tp[i] + tm[i + 1];
        let t_min = t_r.min(t_l);
        if !(t_min >= floor) {
            if !t_min.is_finite() {
                return Err(Error::NonFinite { cell: i });
            }
            return Err(Error::DegenerateDensity {
                face: i + 1,
                value: t_min,
                floor,
            });
        }
        let v_r = d_jump / (dx * t_r) - tau;
        let v_l = d_jump / (dx * t_l) - tau;
        let vi = if v_r > 0.0 {
            v_r
        } else if v_l < 0.0 {
            v_l
        } else {
            0.0
        };
        v[i] = vi;
        vmax = vmax.max(vi.abs());
    }
    Ok(vmax)
}

fn check_cells(tp: &[f64], tm: &[f64], floor: f64) -> Result<()> {
    for (i, (p, m)) in tp.iter().zip(tm).enumerate() {
        let t = p + m;
        if !t.is_finite() {
            return Err(Error::NonFinite { cell: i });
        }
        if t < floor {
            return Err(Error::DegenerateDensity {
                face: i,
                value: t,
                floor,
            });
        }
    }
    Ok(())
}

fn dt_from(vmax: f64, dx: f64, cfg: &SolverConfig) -> f64 {
    let diffusive = dx * dx / (2.0 * (1.0 + cfg.epsilon));
    let advective = if vmax > 0.0 { dx / vmax } else { f64::INFINITY };
    cfg.cfl * diffusive.min(advective)
}

/// Total face fluxes (F⁺, F⁻) at interior faces given velocities.
#[inline]
fn face_flux(tp: &[f64], tm: &[f64], v: f64, eps: f64, dx: f64, i: usize) -> (f64, f64) {
    let (up_p, up_m) = if v > 0.0 {
        (tp[i + 1], tm[i])
    } else {
        (tp[i], tm[i + 1])
    };
    (
        v * up_p + eps * (tp[i + 1] - tp[i]) / dx,
        -v * up_m + eps * (tm[i + 1] - tm[i]) / dx,
    )
}

/// Writes the updated densities into `out_p`, `out_m`.
fn apply_update(
    tp: &[f64],
    tm: &[f64],
    v: &[f64],
    eps: f64,
    dx: f64,
    dt: f64,
    out_p: &mut [f64],
    out_m: &mut [f64],
) -> Result<()> {
    let n = tp.len();
    let r = dt / dx;
    let (mut left_p, mut left_m) = (0.0, 0.0);
    for i in 0..n {
        let (right_p, right_m) = if i + 1 < n {
            face_flux(tp, tm, v[i], eps, dx, i)
        } else {
            (0.0, 0.0)
        };
        let p = tp[i] + r * (right_p - left_p);
        let m = tm[i] + r * (right_m - left_m);
        if !(p.is_finite() && m.is_finite()) {
            return Err(Error::NonFinite { cell: i });
        }
        if p < -POSITIVITY_TOL {
            return Err(Error::NegativeDensity {
                field: "theta_plus",
                cell: i,
                value: p,
            });
        }
        if m < -POSITIVITY_TOL {
            return Err(Error::NegativeDensity {
                field: "theta_minus",
                cell: i,
                value: m,
            });
        }
        out_p[i] = p;
        out_m[i] = m;
        left_p = right_p;
        left_m = right_m;
    }
    Ok(())
}

/// Largest stable step: `cfl · min(dx²/(2(1+ε)), dx / max|v|)`.
///
/// # Errors
/// `DegenerateDensity` when a total density falls below `kappa_x_floor`.
pub fn cfl_dt(densities: &DensityPair, config: &SolverConfig) -> Result<f64> {
    config.validate()?;
    let (tp, tm) = (&densities.theta_plus, &densities.theta_minus);
    check_cells(tp, tm, config.kappa_x_floor)?;
    let dx = densities.grid.dx();
    let mut v = vec![0.0; tp.len() - 1];
    let vmax = face_velocities(tp, tm, config.tau, config.kappa_x_floor, dx, &mut v)?;
    Ok(dt_from(vmax, dx, config))
}

/// Selected transport velocity at the interior faces.
pub fn face_velocity(densities: &DensityPair, config: &SolverConfig) -> Result<Vec<f64>> {
    let (tp, tm) = (&densities.theta_plus, &densities.theta_minus);
    let mut v = vec![0.0; tp.len() - 1];
    face_velocities(tp, tm, config.tau, config.kappa_x_floor, densities.grid.dx(), &mut v)?;
    Ok(v)
}

/// Total fluxes (F⁺, F⁻) at the interior faces.
pub fn face_fluxes(densities: &DensityPair, config: &SolverConfig) -> Result<Vec<(f64, f64)>> {
    let v = face_velocity(densities, config)?;
    let dx = densities.grid.dx();
    let (tp, tm) = (&densities.theta_plus, &densities.theta_minus);
    Ok((0..v.len())
        .map(|i| face_flux(tp, tm, v[i], config.epsilon, dx, i))
        .collect())
}

/// One explicit step of size `dt`.
///
/// The step size is not clamped; a `dt` above [`cfl_dt`] may produce a
/// `NegativeDensity` error.
pub fn step(densities: &DensityPair, config: &SolverConfig, dt: f64) -> Result<DensityPair> {
    config.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let mut out = densities.clone();
    let mut stepper = Stepper::new(densities.theta_plus.len());
    stepper.advance(&mut out, config, Some(dt))?;
    Ok(out)
}

/// Reusable buffers for repeated stepping.
struct Stepper {
    v: Vec<f64>,
    next_p: Vec<f64>,
    next_m: Vec<f64>,
}

impl Stepper {
    fn new(n: usize) -> Self {
        Self {
            v: vec![0.0; n - 1],
            next_p: vec![0.0; n],
            next_m: vec![0.0; n],
        }
    }

    /// Largest stable dt for the current state; fills the face velocities.
    fn prepare(&mut self, d: &DensityPair, cfg: &SolverConfig) -> Result<f64> {
        check_cells(&d.theta_plus, &d.theta_minus, cfg.kappa_x_floor)?;
        let dx = d.grid.dx();
        let vmax = face_velocities(
            &d.theta_plus,
            &d.theta_minus,
            cfg.tau,
            cfg.kappa_x_floor,
            dx,
            &mut self.v,
        )?;
        Ok(dt_from(vmax, dx, cfg))
    }

    /// Advances `d` in place by `dt` (or the stable step when `None`);
    /// returns (dt used, max |Δθ|).
    fn advance(&mut self, d: &mut DensityPair, cfg: &SolverConfig, dt: Option<f64>) -> Result<(f64, f64)> {
        let stable = self.prepare(d, cfg)?;
        let dt = dt.unwrap_or(stable);
        self.advance_prepared(d, cfg, dt)
    }

    fn advance_prepared(&mut self, d: &mut DensityPair, cfg: &SolverConfig, dt: f64) -> Result<(f64, f64)> {
        apply_update(
            &d.theta_plus,
            &d.theta_minus,
            &self.v,
            cfg.epsilon,
            d.grid.dx(),
            dt,
            &mut self.next_p,
            &mut self.next_m,
        )?;
        let change = d
            .theta_plus
            .iter()
            .zip(&self.next_p)
            .chain(d.theta_minus.iter().zip(&self.next_m))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut d.theta_plus, &mut self.next_p);
        std::mem::swap(&mut d.theta_minus, &mut self.next_m);
        d.time += dt;
        Ok((dt, change))
    }
}

/// Advances to each output time, recording a snapshot there.
pub fn run_until(densities: &DensityPair, config: &SolverConfig, output_times: &[f64]) -> Result<Trajectory> {
    run_until_with(densities, config, output_times, |_, _| {})
}

/// As [`run_until`], calling `observer(state, dt)` after every step.
///
/// # Errors
/// Step failures are wrapped in `StepFailed` carrying the time at which
/// the failing step started.
pub fn run_until_with<F>(
    densities: &DensityPair,
    config: &SolverConfig,
    output_times: &[f64],
    mut observer: F,
) -> Result<Trajectory>
where
    F: FnMut(&DensityPair, f64),
{
    config.validate()?;
    let t0 = densities.time;
    let mut prev = f64::NEG_INFINITY;
    for &t in output_times {
        if !(t > prev) {
            return Err(Error::InvalidArgument(
                "output times must be strictly increasing".into(),
            ));
        }
        if t < t0 || t > config.t_end * (1.0 + 1e-14) + 1e-300 {
            return Err(Error::InvalidArgument(format!(
                "output time {t} outside [{t0}, {}]",
                config.t_end
            )));
        }
        prev = t;
    }
    let mut state = densities.clone();
    let mut stepper = Stepper::new(state.theta_plus.len());
    let mut snapshots = Vec::with_capacity(output_times.len());
    let mut steps = 0;
    for &target in output_times {
        while state.time < target {
            let wrap = |e, time| Error::StepFailed {
                time,
                source: Box::new(e),
            };
            let t_now = state.time;
            let stable = stepper.prepare(&state, config).map_err(|e| wrap(e, t_now))?;
            let remaining = target - state.time;
            // Avoid leaving a sliver step behind because of rounding.
            let (dt, last) = if stable >= remaining * (1.0 - 1e-12) {
                (remaining, true)
            } else {
                (stable, false)
            };
            stepper
                .advance_prepared(&mut state, config, dt)
                .map_err(|e| wrap(e, t_now))?;
            if last {
                state.time = target;
            }
            steps += 1;
            observer(&state, dt);
        }
        snapshots.push(state.clone());
    }
    Ok(Trajectory { snapshots, steps })
}

/// Result of a steady-state drive.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyRun {
    pub state: DensityPair,
    /// max |θ(next) − θ(now)| / dt at the final step.
    pub residual: f64,
    pub steps: usize,
}

/// Steps until max |θ(next) − θ(now)|/dt < `steady_tol`; returns the final
/// state and the time reached.
pub fn run_to_steady(densities: &DensityPair, config: &SolverConfig) -> Result<(DensityPair, f64)> {
    let run = run_to_steady_detailed(densities, config)?;
    let t = run.state.time;
    Ok((run.state, t))
}

/// As [`run_to_steady`], also reporting the residual and step count.
pub fn run_to_steady_detailed(densities: &DensityPair, config: &SolverConfig) -> Result<SteadyRun> {
    config.validate()?;
    let mut state = densities.clone();
    let mut stepper = Stepper::new(state.theta_plus.len());
    let mut steps = 0;
    loop {
        let t_now = state.time;
        let (dt, change) = stepper
            .advance(&mut state, config, None)
            .map_err(|e| Error::StepFailed {
                time: t_now,
                source: Box::new(e),
            })?;
        steps += 1;
        let residual = change / dt;
        if residual < config.steady_tol {
            return Ok(SteadyRun {
                state,
                residual,
                steps,
            });
        }
        if state.time > config.max_time {
            return Err(Error::NotConverged {
                max_time: config.max_time,
                residual,
            });
        }
    }
}

/// Fluxes (F⁺, F⁻) extrapolated to each wall from the two nearest interior
/// faces, as `((left⁺, left⁻), (right⁺, right⁻))`.
///
/// The scheme imposes zero flux at the walls; these values measure how
/// close the interior solution is to satisfying that condition.
pub fn wall_flux(densities: &DensityPair, config: &SolverConfig) -> Result<((f64, f64), (f64, f64))> {
    let f = face_fluxes(densities, config)?;
    let m = f.len();
    let extrap = |a: (f64, f64), b: (f64, f64)| (2.0 * a.0 - b.0, 2.0 * a.1 - b.1);
    Ok((extrap(f[0], f[1]), extrap(f[m - 1], f[m - 2])))
}
