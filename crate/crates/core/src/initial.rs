//! Admissible initial data and its ε-regularization.
//!
//! The regularized data used to start the ε-system is
//!
//! ```text
//! ρ^{0,ε} = (ρ⁰ + ετφ) / (1+ε)²,    κ^{0,ε} = (κ⁰ + εx) / (1+ε)
//! φ(x)    = [1 − cos τ(x² − 1)] / (4τ²)   (φ ≡ 0 when τ = 0)
//! ```
//!
//! Profiles carry closed-form first and second derivatives whenever they
//! are known; sampled profiles without derivative data fall back to
//! fourth-order finite differences and the reports say so.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{derive_densities, ChannelState, DensityPair, Grid};

/// Largest amplitude for which the built-in family keeps κ⁰ₓ ≥ |ρ⁰ₓ|.
pub const MAX_DEFAULT_AMPLITUDE: f64 = 5.0 / 16.0;

/// Residual tolerance used by the compatibility checks.
pub const COMPAT_TOL: f64 = 1e-8;

/// Looser tolerance for checks that rely on finite-difference derivatives.
pub const FD_COMPAT_TOL: f64 = 1e-5;

/// φ(x) for applied stress τ.
pub fn phi(x: f64, tau: f64) -> f64 {
    if tau == 0.0 {
        return 0.0;
    }
    (1.0 - (tau * (x * x - 1.0)).cos()) / (4.0 * tau * tau)
}

/// φ′(x) = x sin(τ(x²−1)) / (2τ).
pub fn phi_d1(x: f64, tau: f64) -> f64 {
    if tau == 0.0 {
        return 0.0;
    }
    x * (tau * (x * x - 1.0)).sin() / (2.0 * tau)
}

/// φ″(x) = sin(τ(x²−1)) / (2τ) + x² cos(τ(x²−1)).
pub fn phi_d2(x: f64, tau: f64) -> f64 {
    if tau == 0.0 {
        return 0.0;
    }
    let arg = tau * (x * x - 1.0);
    arg.sin() / (2.0 * tau) + x * x * arg.cos()
}

/// A scalar profile on [-1, 1] with value and first two derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    /// Σ cᵢ xⁱ.
    Polynomial(Vec<f64>),
    Sampled(SampledField),
    /// (base + ετφ) / (1+ε)².
    RegularizedRho {
        base: Box<Field>,
        epsilon: f64,
        tau: f64,
    },
    /// (base + εx) / (1+ε).
    RegularizedKappa { base: Box<Field>, epsilon: f64 },
}

impl Field {
    /// (f, f′, f″) at `x`.
    pub fn eval(&self, x: f64) -> [f64; 3] {
        match self {
            Field::Polynomial(c) => eval_poly(c, x),
            Field::Sampled(s) => s.eval(x),
            Field::RegularizedRho { base, epsilon, tau } => {
                let [f, f1, f2] = base.eval(x);
                let s = 1.0 / ((1.0 + epsilon) * (1.0 + epsilon));
                let et = epsilon * tau;
                [
                    (f + et * phi(x, *tau)) * s,
                    (f1 + et * phi_d1(x, *tau)) * s,
                    (f2 + et * phi_d2(x, *tau)) * s,
                ]
            }
            Field::RegularizedKappa { base, epsilon } => {
                let [f, f1, f2] = base.eval(x);
                let s = 1.0 / (1.0 + epsilon);
                [(f + epsilon * x) * s, (f1 + epsilon) * s, f2 * s]
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x)[0]
    }

    pub fn d1(&self, x: f64) -> f64 {
        self.eval(x)[1]
    }

    pub fn d2(&self, x: f64) -> f64 {
        self.eval(x)[2]
    }

    /// False when some derivative comes from finite differences.
    pub fn exact_derivatives(&self) -> bool {
        match self {
            Field::Polynomial(_) => true,
            Field::Sampled(s) => s.exact_derivatives,
            Field::RegularizedRho { base, .. } | Field::RegularizedKappa { base, .. } => {
                base.exact_derivatives()
            }
        }
    }
}

fn eval_poly(c: &[f64], x: f64) -> [f64; 3] {
    let horner = |k: usize| {
        c.iter().enumerate().skip(k).rev().fold(0.0, |acc, (i, &ci)| {
            let falling = (i + 1 - k..=i).product::<usize>() as f64;
            acc * x + ci * falling
        })
    };
    [horner(0), horner(1), horner(2)]
}

/// A profile given by samples, with optional derivative samples.
///
/// Values (and derivatives) are linearly interpolated between samples.
/// Missing derivatives are computed once with fourth-order stencils
/// (one-sided near the ends), which requires uniform spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    x: Vec<f64>,
    values: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    exact_derivatives: bool,
}

impl SampledField {
    pub fn new(
        x: Vec<f64>,
        values: Vec<f64>,
        d1: Option<Vec<f64>>,
        d2: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = x.len();
        if n < 6 {
            return Err(Error::InvalidArgument(format!(
                "sampled profile needs at least 6 points, got {n}"
            )));
        }
        if values.len() != n {
            return Err(Error::LengthMismatch {
                what: "profile values",
                expected: n,
                got: values.len(),
            });
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "sample abscissae must be strictly increasing".into(),
            ));
        }
        if (x[0] + 1.0).abs() > 1e-12 || (x[n - 1] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "samples must span [-1, 1], got [{}, {}]",
                x[0],
                x[n - 1]
            )));
        }
        let exact = d1.is_some() && d2.is_some();
        let need_fd = d1.is_none() || d2.is_none();
        let h = (x[n - 1] - x[0]) / (n - 1) as f64;
        if need_fd && x.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0)) {
            return Err(Error::InvalidArgument(
                "derivative samples are required for non-uniform abscissae".into(),
            ));
        }
        let d1 = match d1 {
            Some(d) if d.len() == n => d,
            Some(d) => {
                return Err(Error::LengthMismatch {
                    what: "first derivative samples",
                    expected: n,
                    got: d.len(),
                })
            }
            None => fd_first(&values, h),
        };
        let d2 = match d2 {
            Some(d) if d.len() == n => d,
            Some(d) => {
                return Err(Error::LengthMismatch {
                    what: "second derivative samples",
                    expected: n,
                    got: d.len(),
                })
            }
            None => fd_second(&values, h),
        };
        Ok(Self {
            x,
            values,
            d1,
            d2,
            exact_derivatives: exact,
        })
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn eval(&self, x: f64) -> [f64; 3] {
        let n = self.x.len();
        let k = match self.x.partition_point(|&xi| xi <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let w = (x - self.x[k]) / (self.x[k + 1] - self.x[k]);
        let lerp = |v: &[f64]| v[k] + w * (v[k + 1] - v[k]);
        [lerp(&self.values), lerp(&self.d1), lerp(&self.d2)]
    }
}

fn fd_first(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
    }
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h);
    let m = n - 1;
    d[m] = (25.0 * f[m] - 48.0 * f[m - 1] + 36.0 * f[m - 2] - 16.0 * f[m - 3] + 3.0 * f[m - 4])
        / (12.0 * h);
    d[m - 1] = (3.0 * f[m] + 10.0 * f[m - 1] - 18.0 * f[m - 2] + 6.0 * f[m - 3] - f[m - 4])
        / (12.0 * h);
    d
}

fn fd_second(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let h2 = 12.0 * h * h;
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) / h2;
    }
    let one_sided = |g: [f64; 6]| {
        (
            (45.0 * g[0] - 154.0 * g[1] + 214.0 * g[2] - 156.0 * g[3] + 61.0 * g[4] - 10.0 * g[5])
                / h2,
            (10.0 * g[0] - 15.0 * g[1] - 4.0 * g[2] + 14.0 * g[3] - 6.0 * g[4] + g[5]) / h2,
        )
    };
    let (a, b) = one_sided([f[0], f[1], f[2], f[3], f[4], f[5]]);
    d[0] = a;
    d[1] = b;
    let m = n - 1;
    let (a, b) = one_sided([f[m], f[m - 1], f[m - 2], f[m - 3], f[m - 4], f[m - 5]]);
    d[m] = a;
    d[m - 1] = b;
    d
}

/// Free-form description of where a profile pair came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProfileMeta {
    pub label: String,
    pub amplitude: Option<f64>,
    pub epsilon: Option<f64>,
    pub tau: Option<f64>,
}

/// Initial pair (ρ⁰, κ⁰).
#[derive(Debug, Clone, PartialEq)]
pub struct InitialProfiles {
    pub rho: Field,
    pub kappa: Field,
    pub meta: ProfileMeta,
}

impl InitialProfiles {
    pub fn exact_derivatives(&self) -> bool {
        self.rho.exact_derivatives() && self.kappa.exact_derivatives()
    }

    fn tolerance(&self) -> f64 {
        if self.exact_derivatives() {
            COMPAT_TOL
        } else {
            FD_COMPAT_TOL
        }
    }

    /// Nodal state sampled on `grid` at t = 0.
    pub fn sample(&self, grid: &Grid) -> ChannelState {
        ChannelState::from_fn(
            grid.clone(),
            |x| self.rho.value(x),
            |x| self.kappa.value(x),
            0.0,
        )
    }

    /// Cell densities whose reconstruction matches the profiles at the nodes.
    pub fn densities(&self, grid: &Grid) -> Result<DensityPair> {
        derive_densities(&self.sample(grid))
    }

    /// Checks κ⁰(±1) = ±1, ρ⁰(±1) = 0, vanishing first and second
    /// derivatives at ±1 and κ⁰ₓ ≥ |ρ⁰ₓ| on `n_samples` points.
    pub fn check_invariants(&self, n_samples: usize) -> Result<()> {
        let tol = self.tolerance();
        for s in [-1.0, 1.0] {
            let [r, r1, r2] = self.rho.eval(s);
            let [k, k1, k2] = self.kappa.eval(s);
            if r.abs() > tol || (k - s).abs() > tol {
                return Err(Error::Boundary(format!(
                    "rho0({s}) = {r}, kappa0({s}) = {k}"
                )));
            }
            for (name, v) in [("rho0'", r1), ("rho0''", r2), ("kappa0'", k1), ("kappa0''", k2)] {
                if v.abs() > tol {
                    return Err(Error::Boundary(format!("{name}({s}) = {v}, expected 0")));
                }
            }
        }
        let (x, margin) = min_gap(self, n_samples, |_| 0.0);
        if margin < -tol {
            return Err(Error::NegativeDensity {
                field: "kappa0_x - |rho0_x|",
                cell: ((x + 1.0) / 2.0 * (n_samples - 1) as f64).round() as usize,
                value: margin,
            });
        }
        Ok(())
    }
}

/// κ⁰(x) = (15x − 10x³ + 3x⁵)/8 and ρ⁰(x) = c(1 − x²)³.
pub fn default_profiles(c: f64) -> Result<InitialProfiles> {
    if !(c.abs() <= MAX_DEFAULT_AMPLITUDE) {
        return Err(Error::InvalidArgument(format!(
            "amplitude |c| = {} exceeds 5/16",
            c.abs()
        )));
    }
    Ok(InitialProfiles {
        rho: Field::Polynomial(vec![c, 0.0, -3.0 * c, 0.0, 3.0 * c, 0.0, -c]),
        kappa: Field::Polynomial(vec![0.0, 15.0 / 8.0, 0.0, -10.0 / 8.0, 0.0, 3.0 / 8.0]),
        meta: ProfileMeta {
            label: "default".into(),
            amplitude: Some(c),
            ..Default::default()
        },
    })
}

/// Builds (ρ^{0,ε}, κ^{0,ε}) from admissible (ρ⁰, κ⁰).
pub fn regularize_initial(
    profiles: &InitialProfiles,
    epsilon: f64,
    tau: f64,
) -> Result<InitialProfiles> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "regularization needs epsilon in (0, 1), got {epsilon}"
        )));
    }
    if !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("tau = {tau}")));
    }
    profiles.check_invariants(2001)?;
    Ok(InitialProfiles {
        rho: Field::RegularizedRho {
            base: Box::new(profiles.rho.clone()),
            epsilon,
            tau,
        },
        kappa: Field::RegularizedKappa {
            base: Box::new(profiles.kappa.clone()),
            epsilon,
        },
        meta: ProfileMeta {
            label: format!("{} (regularized)", profiles.meta.label),
            amplitude: profiles.meta.amplitude,
            epsilon: Some(epsilon),
            tau: Some(tau),
        },
    })
}

/// Outcome of a single property check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The property is trivially true or meaningless for the input.
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    /// Largest violation measured (or the margin, for strict inequalities).
    pub residual: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &str, ok: bool, residual: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            residual,
            detail,
        }
    }

    pub fn passed(&self) -> bool {
        self.status != CheckStatus::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
    /// False when derivatives came from finite differences.
    pub exact_derivatives: bool,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn samples(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if i + 1 == n { 1.0 } else { -1.0 + 2.0 * i as f64 / (n - 1) as f64 })
}

/// min over samples of κₓ − |ρₓ| − shift(x), with its location.
fn min_gap(p: &InitialProfiles, n: usize, shift: impl Fn(f64) -> f64) -> (f64, f64) {
    samples(n)
        .map(|x| (x, p.kappa.d1(x) - p.rho.d1(x).abs() - shift(x)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0.0, f64::NAN))
}

/// Properties of φ: vanishing value and slope at ±1, unit curvature at ±1,
/// and |φ′| < 1/|τ| on the samples.
pub fn phi_property_report(tau: f64, n_samples: usize) -> Result<Report> {
    if n_samples < 10 {
        return Err(Error::InvalidArgument(format!(
            "need at least 10 samples, got {n_samples}"
        )));
    }
    let p1 = [-1.0, 1.0]
        .iter()
        .map(|&s| phi(s, tau).abs().max(phi_d1(s, tau).abs()))
        .fold(0.0, f64::max);
    let mut checks = vec![Check::new(
        "P1",
        p1 <= COMPAT_TOL,
        p1,
        "phi and phi' at x = ±1".into(),
    )];
    if tau == 0.0 {
        for name in ["P2", "P3"] {
            checks.push(Check {
                name: name.into(),
                status: CheckStatus::Vacuous,
                residual: 0.0,
                detail: "phi is identically zero when tau = 0".into(),
            });
        }
    } else {
        let p2 = [-1.0, 1.0]
            .iter()
            .map(|&s| (phi_d2(s, tau) - 1.0).abs())
            .fold(0.0, f64::max);
        checks.push(Check::new(
            "P2",
            p2 <= COMPAT_TOL,
            p2,
            "phi'' - 1 at x = ±1".into(),
        ));
        let (xm, worst) = samples(n_samples)
            .map(|x| (x, phi_d1(x, tau).abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let bound = 1.0 / tau.abs();
        checks.push(Check::new(
            "P3",
            worst < bound,
            worst - bound,
            format!("max |phi'| = {worst} at x = {xm}, bound 1/|tau| = {bound}"),
        ));
    }
    Ok(Report {
        checks,
        exact_derivatives: true,
    })
}

/// (P4) boundary values, (P5) corner compatibility at ±1 and the strict gap
/// (P6) κₓ ≥ |ρₓ| + ε(1 − |τ||φ′|)/(1+ε) for regularized data.
pub fn regularized_property_report(
    profiles: &InitialProfiles,
    epsilon: f64,
    tau: f64,
    n_samples: usize,
) -> Report {
    let tol = profiles.tolerance();
    let mut checks = vec![boundary_check("P4", profiles, tol)];
    checks.push(corner_check("P5", profiles, epsilon, tau, tol));
    let gap = |x: f64| epsilon * (1.0 - tau.abs() * phi_d1(x, tau).abs()) / (1.0 + epsilon);
    let (xm, margin) = min_gap(profiles, n_samples, gap);
    let strict = samples(n_samples).all(|x| gap(x) > 0.0);
    checks.push(Check::new(
        "P6",
        margin >= -tol && strict,
        margin,
        format!("min of kappa_x - |rho_x| - eps(1 - |tau||phi'|)/(1+eps) = {margin:e} at x = {xm}"),
    ));
    Report {
        checks,
        exact_derivatives: profiles.exact_derivatives(),
    }
}

fn boundary_check(name: &str, p: &InitialProfiles, tol: f64) -> Check {
    let res = [-1.0f64, 1.0]
        .iter()
        .map(|&s| p.rho.value(s).abs().max((p.kappa.value(s) - s).abs()))
        .fold(0.0, f64::max);
    Check::new(
        name,
        res <= tol,
        res,
        format!(
            "kappa(±1) = ({}, {}), rho(±1) = ({}, {})",
            p.kappa.value(-1.0),
            p.kappa.value(1.0),
            p.rho.value(-1.0),
            p.rho.value(1.0)
        ),
    )
}

fn corner_check(name: &str, p: &InitialProfiles, epsilon: f64, tau: f64, tol: f64) -> Check {
    let mut worst: f64 = 0.0;
    for s in [-1.0, 1.0] {
        let [_, r1, r2] = p.rho.eval(s);
        let [_, k1, k2] = p.kappa.eval(s);
        worst = worst
            .max(((1.0 + epsilon) * r2 - tau * k1).abs())
            .max(((1.0 + epsilon) * k2 - tau * r1).abs());
    }
    Check::new(
        name,
        worst <= tol,
        worst,
        "(1+eps) rho_xx = tau kappa_x and (1+eps) kappa_xx = tau rho_x at x = ±1".into(),
    )
}

/// Hypotheses of the regularized existence theory: (MT1) boundary values,
/// (MT2) corner compatibility at ±1, (MT3) strict positivity of κₓ − |ρₓ|.
pub fn compatibility_report(profiles: &InitialProfiles, epsilon: f64, tau: f64) -> Report {
    let tol = profiles.tolerance();
    let mut checks = vec![boundary_check("MT1", profiles, tol)];
    checks.push(corner_check("MT2", profiles, epsilon, tau, tol));
    let (xm, margin) = min_gap(profiles, 2001, |_| 0.0);
    checks.push(Check::new(
        "MT3",
        margin > 0.0,
        margin,
        format!("min of kappa_x - |rho_x| = {margin:e} at x = {xm}"),
    ));
    Report {
        checks,
        exact_derivatives: profiles.exact_derivatives(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_vanishes_at_walls() {
        for tau in [-3.0, -0.5, 0.3, 1.0, 7.0] {
            assert!(phi(1.0, tau).abs() < 1e-16);
            assert!(phi(-1.0, tau).abs() < 1e-16);
        }
        assert_eq!(phi(0.3, 0.0), 0.0);
    }

    #[test]
    fn phi_center_value() {
        let expected = (1.0 - 1f64.cos()) / 4.0;
        assert!((phi(0.0, 1.0) - expected).abs() < 1e-15);
        assert!((phi(0.0, 1.0) - 0.114924).abs() < 1e-6);
    }

    #[test]
    fn phi_derivatives_match_finite_differences() {
        let h = 1e-5;
        for tau in [0.7, 2.0, -1.5] {
            for x in [-0.9, -0.2, 0.0, 0.45, 0.8] {
                let fd1 = (phi(x + h, tau) - phi(x - h, tau)) / (2.0 * h);
                let fd2 = (phi(x + h, tau) - 2.0 * phi(x, tau) + phi(x - h, tau)) / (h * h);
                assert!((phi_d1(x, tau) - fd1).abs() < 1e-8);
                assert!((phi_d2(x, tau) - fd2).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn phi_properties_hold() {
        for tau in [1.0, 5.0] {
            let r = phi_property_report(tau, 1000).unwrap();
            assert!(r.all_passed(), "{r:?}");
            assert!(r.checks.iter().all(|c| c.status == CheckStatus::Pass));
        }
        let r = phi_property_report(0.0, 1000).unwrap();
        assert_eq!(r.get("P1").unwrap().status, CheckStatus::Pass);
        assert_eq!(r.get("P2").unwrap().status, CheckStatus::Vacuous);
        assert_eq!(r.get("P3").unwrap().status, CheckStatus::Vacuous);
        assert!(phi_property_report(1.0, 5).is_err());
    }

    #[test]
    fn polynomial_derivatives() {
        let f = Field::Polynomial(vec![1.0, -2.0, 3.0, 0.5]);
        for x in [-1.0, -0.3, 0.0, 0.7] {
            let [v, d1, d2] = f.eval(x);
            assert!((v - (1.0 - 2.0 * x + 3.0 * x * x + 0.5 * x * x * x)).abs() < 1e-14);
            assert!((d1 - (-2.0 + 6.0 * x + 1.5 * x * x)).abs() < 1e-13);
            assert!((d2 - (6.0 + 3.0 * x)).abs() < 1e-13);
        }
    }

    #[test]
    fn default_profile_values() {
        let p = default_profiles(0.0).unwrap();
        assert!((p.kappa.value(1.0) - 1.0).abs() < 1e-15);
        assert!((p.kappa.value(-1.0) + 1.0).abs() < 1e-15);
        assert!(p.rho.value(0.4).abs() < 1e-16);
        assert!(default_profiles(0.32).is_err());
        assert!(default_profiles(-0.3125).is_ok());
    }

    #[test]
    fn default_profiles_flat_at_walls() {
        for c in [-0.3125, -0.1, 0.0, 0.2, 0.3125] {
            let p = default_profiles(c).unwrap();
            for s in [-1.0, 1.0] {
                let [_, r1, r2] = p.rho.eval(s);
                let [_, k1, k2] = p.kappa.eval(s);
                for v in [r1, r2, k1, k2] {
                    assert!(v.abs() < 1e-13, "c = {c}, x = {s}: {v}");
                }
            }
            p.check_invariants(2001).unwrap();
        }
    }

    #[test]
    fn extreme_amplitude_gap_factorizes() {
        // κ⁰ₓ − |ρ⁰ₓ| = (1−x²)²(15/8)(1 − |x|) at c = 5/16.
        let p = default_profiles(5.0 / 16.0).unwrap();
        for i in 0..=4000 {
            let x = -1.0 + i as f64 / 2000.0;
            let gap = p.kappa.d1(x) - p.rho.d1(x).abs();
            let closed = (1.0 - x * x).powi(2) * 15.0 / 8.0 * (1.0 - x.abs());
            assert!((gap - closed).abs() < 1e-13);
            assert!(gap >= -1e-15);
        }
    }

    #[test]
    fn regularization_fixes_linear_kappa() {
        let base = InitialProfiles {
            rho: Field::Polynomial(vec![0.0]),
            kappa: Field::Polynomial(vec![0.0, 1.0]),
            meta: ProfileMeta::default(),
        };
        // κ⁰ = x has κ⁰ₓ ≠ 0 at the walls, so bypass the invariant check.
        let k = Field::RegularizedKappa {
            base: Box::new(base.kappa.clone()),
            epsilon: 0.37,
        };
        for x in [-1.0, -0.2, 0.6] {
            assert!((k.value(x) - x).abs() < 1e-15);
        }
        let r = Field::RegularizedRho {
            base: Box::new(base.rho),
            epsilon: 0.37,
            tau: 0.0,
        };
        assert_eq!(r.value(0.3), 0.0);
    }

    #[test]
    fn regularized_gap_lower_bound() {
        let (eps, tau) = (0.1, 1.0);
        let reg = regularize_initial(&default_profiles(0.1).unwrap(), eps, tau).unwrap();
        let max_phi1 = (0..=2000)
            .map(|i| phi_d1(-1.0 + i as f64 / 1000.0, tau).abs())
            .fold(0.0, f64::max);
        let bound = eps * (1.0 - tau.abs() * max_phi1) / (1.0 + eps);
        let grid = Grid::new(400).unwrap();
        let d = reg.densities(&grid).unwrap();
        let min_gap = d
            .theta_plus
            .iter()
            .zip(&d.theta_minus)
            .map(|(p, m)| 2.0 * p.min(*m))
            .fold(f64::INFINITY, f64::min);
        assert!(bound > 0.0);
        assert!(min_gap >= bound - 1e-12, "{min_gap} < {bound}");
    }

    #[test]
    fn regularize_rejects_bad_input() {
        let p = default_profiles(0.1).unwrap();
        assert!(regularize_initial(&p, 0.0, 1.0).is_err());
        assert!(regularize_initial(&p, 1.0, 1.0).is_err());
        let bad = InitialProfiles {
            kappa: Field::Polynomial(vec![0.0, 0.9]),
            ..p
        };
        assert!(regularize_initial(&bad, 0.1, 1.0).is_err());
    }

    #[test]
    fn compatibility_of_regularized_data() {
        let reg = regularize_initial(&default_profiles(0.1).unwrap(), 0.1, 1.0).unwrap();
        let r = compatibility_report(&reg, 0.1, 1.0);
        assert!(r.all_passed(), "{r:?}");
        assert!(r.exact_derivatives);
        let p = regularized_property_report(&reg, 0.1, 1.0, 2001);
        assert!(p.all_passed(), "{p:?}");
    }

    #[test]
    fn compatibility_of_raw_data() {
        // Corner conditions hold degenerately (both sides vanish); the strict gap fails at ±1.
        let raw = default_profiles(0.1).unwrap();
        let r = compatibility_report(&raw, 0.1, 1.0);
        assert!(r.get("MT1").unwrap().passed());
        let mt2 = r.get("MT2").unwrap();
        assert!(mt2.passed());
        assert!(mt2.residual < 1e-13);
        let mt3 = r.get("MT3").unwrap();
        assert_eq!(mt3.status, CheckStatus::Fail);
        assert!(mt3.residual.abs() < 1e-12);
    }

    #[test]
    fn compatibility_flags_boundary_mismatch() {
        let mut p = default_profiles(0.0).unwrap();
        p.kappa = Field::Polynomial(vec![0.0, 15.0 * 0.9 / 8.0, 0.0, -9.0 / 8.0, 0.0, 2.7 / 8.0]);
        assert!((p.kappa.value(1.0) - 0.9).abs() < 1e-14);
        let r = compatibility_report(&p, 0.1, 1.0);
        assert_eq!(r.get("MT1").unwrap().status, CheckStatus::Fail);
    }

    #[test]
    fn sampled_field_fd_derivatives() {
        let n = 401;
        let x: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
        let p = default_profiles(0.2).unwrap();
        let v: Vec<f64> = x.iter().map(|&t| p.rho.value(t)).collect();
        let s = SampledField::new(x.clone(), v, None, None).unwrap();
        let f = Field::Sampled(s);
        assert!(!f.exact_derivatives());
        for &t in &[-1.0, -0.995, 0.0, 0.5, 1.0] {
            let [_, d1, d2] = f.eval(t);
            assert!((d1 - p.rho.d1(t)).abs() < 1e-6, "d1 at {t}");
            assert!((d2 - p.rho.d2(t)).abs() < 1e-4, "d2 at {t}");
        }
    }

    #[test]
    fn sampled_field_validation() {
        let x = vec![-1.0, -0.5, 0.0, 0.5, 1.0];
        assert!(SampledField::new(x.clone(), vec![0.0; 5], None, None).is_err());
        let x: Vec<f64> = (0..7).map(|i| -1.0 + i as f64 / 3.0).collect();
        assert!(SampledField::new(x.clone(), vec![0.0; 6], None, None).is_err());
        let mut bent = x.clone();
        bent[3] += 0.05;
        assert!(SampledField::new(bent.clone(), vec![0.0; 7], None, None).is_err());
        assert!(SampledField::new(bent, vec![0.0; 7], Some(vec![0.0; 7]), Some(vec![0.0; 7])).is_ok());
    }
}
