//! Python bindings: grids, density pairs, the solver and the analysis
//! helpers. Profiles cross the boundary as plain lists of floats.

use std::cell::RefCell;

use ddchannel::diagnostics;
use ddchannel::mechanics::{self, shooting, MechanicsConfig};
use ddchannel::orlicz::{self, SampledFn, YoungFunction};
use ddchannel::state::reconstruct_unchecked;
use ddchannel::{meanvalue, solver, Error};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

/// Bad inputs become `ValueError`; everything else is a `RuntimeError`.
fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_)
        | Error::LengthMismatch { .. }
        | Error::Parse(_)
        | Error::Boundary(_)
        | Error::OutsideBall { .. }
        | Error::NotInOrliczClass { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

#[pyclass(name = "Grid", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyGrid(ddchannel::Grid);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(n_cells: usize) -> PyResult<Self> {
        ddchannel::Grid::new(n_cells).map(Self).map_err(to_py)
    }

    #[getter]
    fn n_cells(&self) -> usize {
        self.0.n_cells()
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.0.dx()
    }

    fn nodes(&self) -> Vec<f64> {
        self.0.nodes().to_vec()
    }

    fn centers(&self) -> Vec<f64> {
        self.0.centers()
    }

    fn __repr__(&self) -> String {
        format!("Grid(n_cells={})", self.0.n_cells())
    }
}

/// Cell averages of θ⁺ and θ⁻ at one time.
#[pyclass(name = "DensityPair", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyDensityPair(ddchannel::DensityPair);

#[pymethods]
impl PyDensityPair {
    #[new]
    #[pyo3(signature = (theta_plus, theta_minus, time = 0.0))]
    fn new(theta_plus: Vec<f64>, theta_minus: Vec<f64>, time: f64) -> PyResult<Self> {
        let grid = ddchannel::Grid::new(theta_plus.len()).map_err(to_py)?;
        ddchannel::DensityPair::new(grid, theta_plus, theta_minus, time)
            .map(Self)
            .map_err(to_py)
    }

    /// Regularized default data ρ⁰ = c(1 − x²)³, κ⁰ = (15x − 10x³ + 3x⁵)/8.
    #[staticmethod]
    #[pyo3(signature = (n_cells, amplitude = 0.1, epsilon = 0.1, tau = 1.0))]
    fn default_initial(n_cells: usize, amplitude: f64, epsilon: f64, tau: f64) -> PyResult<Self> {
        let grid = ddchannel::Grid::new(n_cells).map_err(to_py)?;
        let p = ddchannel::default_profiles(amplitude).map_err(to_py)?;
        let reg = ddchannel::regularize_initial(&p, epsilon, tau).map_err(to_py)?;
        reg.densities(&grid).map(Self).map_err(to_py)
    }

    /// Densities from nodal ρ and κ on a uniform grid.
    #[staticmethod]
    fn from_profiles(rho: Vec<f64>, kappa: Vec<f64>) -> PyResult<Self> {
        let grid = ddchannel::Grid::new(rho.len().saturating_sub(1)).map_err(to_py)?;
        let state = ddchannel::ChannelState::new(grid, rho, kappa, 0.0).map_err(to_py)?;
        ddchannel::derive_densities(&state).map(Self).map_err(to_py)
    }

    #[getter]
    fn theta_plus(&self) -> Vec<f64> {
        self.0.theta_plus.clone()
    }

    #[getter]
    fn theta_minus(&self) -> Vec<f64> {
        self.0.theta_minus.clone()
    }

    #[getter]
    fn time(&self) -> f64 {
        self.0.time
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(self.0.grid.clone())
    }

    fn masses(&self) -> (f64, f64) {
        self.0.masses()
    }

    /// Nodal (x, ρ, κ).
    fn profiles(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let s = reconstruct_unchecked(&self.0);
        (self.0.grid.nodes().to_vec(), s.rho, s.kappa)
    }

    fn entropy(&self) -> f64 {
        diagnostics::entropy(&self.0)
    }

    fn kx_log_control(&self) -> f64 {
        diagnostics::kx_log_control(&self.0)
    }

    fn positivity_margin(&self) -> f64 {
        diagnostics::positivity_margin(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("DensityPair(n_cells={}, time={})", self.0.theta_plus.len(), self.0.time)
    }
}

#[pyclass(name = "SolverConfig", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PySolverConfig(solver::SolverConfig);

#[pymethods]
impl PySolverConfig {
    #[new]
    #[pyo3(signature = (tau, epsilon, t_end, cfl = 0.9, steady_tol = 1e-7, max_time = 1e3))]
    fn new(tau: f64, epsilon: f64, t_end: f64, cfl: f64, steady_tol: f64, max_time: f64) -> PyResult<Self> {
        let mut c = solver::SolverConfig::new(tau, epsilon, t_end);
        c.cfl = cfl;
        c.steady_tol = steady_tol;
        c.max_time = max_time;
        c.validate().map_err(to_py)?;
        Ok(Self(c))
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.0.tau
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.epsilon
    }

    #[getter]
    fn t_end(&self) -> f64 {
        self.0.t_end
    }

    #[getter]
    fn cfl(&self) -> f64 {
        self.0.cfl
    }

    fn __repr__(&self) -> String {
        format!(
            "SolverConfig(tau={}, epsilon={}, t_end={}, cfl={})",
            self.0.tau, self.0.epsilon, self.0.t_end, self.0.cfl
        )
    }
}

#[pyfunction]
fn cfl_dt(d: PyRef<'_, PyDensityPair>, config: PyRef<'_, PySolverConfig>) -> PyResult<f64> {
    solver::cfl_dt(&d.0, &config.0).map_err(to_py)
}

#[pyfunction]
fn step(d: PyRef<'_, PyDensityPair>, config: PyRef<'_, PySolverConfig>, dt: f64) -> PyResult<PyDensityPair> {
    solver::step(&d.0, &config.0, dt).map(PyDensityPair).map_err(to_py)
}

/// Snapshots at each requested time.
#[pyfunction]
fn run_until(
    py: Python<'_>,
    d: PyRef<'_, PyDensityPair>,
    config: PyRef<'_, PySolverConfig>,
    times: Vec<f64>,
) -> PyResult<Vec<PyDensityPair>> {
    let (d, c) = (d.0.clone(), config.0.clone());
    let traj = py.detach(|| solver::run_until(&d, &c, &times)).map_err(to_py)?;
    Ok(traj.snapshots.into_iter().map(PyDensityPair).collect())
}

/// (state, time) once max |Δθ|/dt drops below the steady tolerance.
#[pyfunction]
fn run_to_steady(
    py: Python<'_>,
    d: PyRef<'_, PyDensityPair>,
    config: PyRef<'_, PySolverConfig>,
) -> PyResult<(PyDensityPair, f64)> {
    let (d, c) = (d.0.clone(), config.0.clone());
    let (s, t) = py.detach(|| solver::run_to_steady(&d, &c)).map_err(to_py)?;
    Ok((PyDensityPair(s), t))
}

#[pyfunction]
fn entropy_bound(s0: f64, tau: f64, t: f64) -> f64 {
    diagnostics::entropy_bound(s0, tau, t)
}

/// Closed-form long-time (x, ρ, κ) on `n_cells` cells.
#[pyfunction]
fn stationary_profile(tau: f64, epsilon: f64, n_cells: usize) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let g = ddchannel::Grid::new(n_cells).map_err(to_py)?;
    let s = mechanics::stationary_profile(tau, epsilon, &g).map_err(to_py)?;
    Ok((g.nodes().to_vec(), s.rho, s.kappa))
}

/// Long-time (x, ρ, κ) from the shooting solve of the stationary problem.
#[pyfunction]
fn solve_stationary(tau: f64, epsilon: f64, n_cells: usize) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let g = ddchannel::Grid::new(n_cells).map_err(to_py)?;
    let s = shooting::solve_stationary(tau, epsilon, &g).map_err(to_py)?;
    Ok((s.x, s.rho, s.kappa))
}

/// u₂ at the nodes from nodal ρ.
#[pyfunction]
#[pyo3(signature = (rho, tau, mu = 1.0, lam = 1.0))]
fn displacement_profile(rho: Vec<f64>, tau: f64, mu: f64, lam: f64) -> PyResult<Vec<f64>> {
    let g = ddchannel::Grid::new(rho.len().saturating_sub(1)).map_err(to_py)?;
    let c = MechanicsConfig::new(mu, lam, tau).map_err(to_py)?;
    mechanics::displacement_profile(&rho, &g, &c).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (x1, tau, mu = 1.0))]
fn longtime_displacement(x1: f64, tau: f64, mu: f64) -> PyResult<f64> {
    let c = MechanicsConfig::new(mu, 0.0, tau).map_err(to_py)?;
    mechanics::longtime_displacement(x1, &c).map_err(to_py)
}

/// Luxemburg norm of midpoint samples on (a, b); `young` is "psi" or "phi_star".
#[pyfunction]
#[pyo3(signature = (values, a, b, young = "psi"))]
fn luxemburg_norm(values: Vec<f64>, a: f64, b: f64, young: &str) -> PyResult<f64> {
    let f = match young {
        "psi" => YoungFunction::Psi,
        "phi_star" => YoungFunction::PhiStar,
        other => return Err(PyValueError::new_err(format!("unknown Young function '{other}'"))),
    };
    let u = SampledFn::new(a, b, values).map_err(to_py)?;
    orlicz::luxemburg_norm(&u, &f).map_err(to_py)
}

#[pyfunction]
fn ball_measure(r: f64) -> PyResult<f64> {
    meanvalue::ball_measure(r).map_err(to_py)
}

#[pyfunction]
fn kernel_e(x: f64, t: f64) -> PyResult<f64> {
    meanvalue::kernel_e(x, t).map_err(to_py)
}

/// Mean of the Python callable `u(x, t)` over the parabolic ball.
#[pyfunction]
fn mean_value(u: Bound<'_, PyAny>, x0: f64, t0: f64, r: f64) -> PyResult<f64> {
    // The quadrature wants a plain closure; the first Python error is kept
    // and re-raised afterwards.
    let failure: RefCell<Option<PyErr>> = RefCell::new(None);
    let f = |x: f64, t: f64| match u.call1((x, t)).and_then(|v| v.extract::<f64>()) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let result = meanvalue::mean_value(f, x0, t0, r);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    result.map_err(to_py)
}

#[pymodule]
pub fn ddchannel_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyDensityPair>()?;
    m.add_class::<PySolverConfig>()?;
    m.add_function(wrap_pyfunction!(cfl_dt, m)?)?;
    m.add_function(wrap_pyfunction!(step, m)?)?;
    m.add_function(wrap_pyfunction!(run_until, m)?)?;
    m.add_function(wrap_pyfunction!(run_to_steady, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_bound, m)?)?;
    m.add_function(wrap_pyfunction!(stationary_profile, m)?)?;
    m.add_function(wrap_pyfunction!(solve_stationary, m)?)?;
    m.add_function(wrap_pyfunction!(displacement_profile, m)?)?;
    m.add_function(wrap_pyfunction!(longtime_displacement, m)?)?;
    m.add_function(wrap_pyfunction!(luxemburg_norm, m)?)?;
    m.add_function(wrap_pyfunction!(ball_measure, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_e, m)?)?;
    m.add_function(wrap_pyfunction!(mean_value, m)?)?;
    Ok(())
}
