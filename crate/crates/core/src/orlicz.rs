//! Orlicz-space tools on sampled functions.
//!
//! Young pair `Ψ(s) = (1+s) log(1+s) − s`, `Φ(s) = eˢ − s − 1` (convex
//! conjugates of each other) and the Luxemburg norm
//! `‖u‖ = inf { k > 0 : ∫ Ψ(|u|/k) ≤ 1 }`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower end of the bisection bracket for k.
pub const K_MIN: f64 = 1e-14;
/// Give up when the bracket would have to grow past this.
pub const K_CAP: f64 = 1e14;
/// Absolute bisection tolerance on k.
pub const K_TOL: f64 = 1e-10;

/// A Young function evaluated on s ≥ 0.
#[derive(Debug, Clone, Copy)]
pub enum YoungFunction {
    /// (1+s) log(1+s) − s.
    Psi,
    /// eˢ − s − 1.
    PhiStar,
    Custom(fn(f64) -> f64),
}

impl YoungFunction {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            YoungFunction::Psi => psi(s),
            YoungFunction::PhiStar => phi_star(s),
            YoungFunction::Custom(f) => f(s),
        }
    }
}

/// (1+s) log(1+s) − s, with a series near 0 to avoid cancellation.
pub fn psi(s: f64) -> f64 {
    if s.abs() < 1e-3 {
        // Σ_{k≥2} (−1)^k s^k / (k(k−1))
        let s2 = s * s;
        s2 * (0.5 - s / 6.0 + s2 / 12.0 - s2 * s / 20.0 + s2 * s2 / 30.0)
    } else {
        (1.0 + s) * s.ln_1p() - s
    }
}

/// eˢ − s − 1, with a series near 0 to avoid cancellation.
pub fn phi_star(s: f64) -> f64 {
    if s.abs() < 1e-3 {
        let s2 = s * s;
        s2 * (0.5 + s / 6.0 + s2 / 24.0 + s2 * s / 120.0 + s2 * s2 / 720.0)
    } else {
        s.exp_m1() - s
    }
}

/// The complementary pair (Ψ, Φ).
#[derive(Debug, Clone, Copy)]
pub struct YoungPair {
    pub psi: YoungFunction,
    pub phi_star: YoungFunction,
}

impl Default for YoungPair {
    fn default() -> Self {
        Self {
            psi: YoungFunction::Psi,
            phi_star: YoungFunction::PhiStar,
        }
    }
}

impl YoungPair {
    /// Checks that both functions vanish at 0 and are increasing and convex
    /// on `n` samples of [0, s_max].
    pub fn check_shape(&self, s_max: f64, n: usize) -> bool {
        [self.psi, self.phi_star].iter().all(|f| {
            let v: Vec<f64> = (0..=n).map(|i| f.eval(s_max * i as f64 / n as f64)).collect();
            f.eval(0.0) == 0.0
                && v.windows(2).all(|w| w[1] >= w[0])
                && v.windows(3).all(|w| w[2] - 2.0 * w[1] + w[0] >= -1e-12 * w[2].abs().max(1.0))
        })
    }
}

/// Values at the midpoints of `n` equal subintervals of (a, b).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFn {
    pub a: f64,
    pub b: f64,
    pub values: Vec<f64>,
}

impl SampledFn {
    pub fn new(a: f64, b: f64, values: Vec<f64>) -> Result<Self> {
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument(format!("degenerate interval ({a}, {b})")));
        }
        if values.is_empty() {
            return Err(Error::InvalidArgument("no samples".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { cell: i });
        }
        Ok(Self { a, b, values })
    }

    pub fn from_fn(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = (b - a) / n as f64;
        Self::new(a, b, (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).collect())
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.values.len() as f64
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.h()
    }

    /// ∫ F(|u|).
    pub fn modular(&self, f: &YoungFunction, scale: f64) -> f64 {
        self.values.iter().map(|v| f.eval(v.abs() / scale)).sum::<f64>() * self.h()
    }

    fn same_layout(&self, other: &SampledFn) -> Result<()> {
        if self.values.len() != other.values.len() {
            return Err(Error::LengthMismatch {
                what: "paired samples",
                expected: self.values.len(),
                got: other.values.len(),
            });
        }
        if self.a != other.a || self.b != other.b {
            return Err(Error::InvalidArgument("samples live on different intervals".into()));
        }
        Ok(())
    }
}

/// Luxemburg norm by bisection on k.
///
/// Returns the upper end of the final bracket, so the result never
/// underestimates the exact discrete norm by more than rounding.
///
/// # Errors
/// `NotInOrliczClass` when the modular stays above 1 up to [`K_CAP`].
pub fn luxemburg_norm(u: &SampledFn, young: &YoungFunction) -> Result<f64> {
    let umax = u.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if umax == 0.0 {
        return Ok(0.0);
    }
    let over = |k: f64| {
        let m = u.modular(young, k);
        m > 1.0 || m.is_nan()
    };
    if !over(K_MIN) {
        return Ok(K_MIN);
    }
    let mut hi = umax.clamp(K_MIN, K_CAP);
    while over(hi) {
        hi *= 2.0;
        if hi > K_CAP {
            return Err(Error::NotInOrliczClass {
                k: hi,
                integral: u.modular(young, hi),
            });
        }
    }
    let mut lo = (hi / 2.0).max(K_MIN);
    if !over(lo) {
        lo = K_MIN;
    }
    while hi - lo > K_TOL.max(4.0 * f64::EPSILON * hi) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if over(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormControl {
    pub norm: f64,
    pub bound: f64,
    pub ok: bool,
}

/// ‖u‖ ≤ 1 + ∫ F(|u|).
pub fn norm_control_check(u: &SampledFn, young: &YoungFunction) -> Result<NormControl> {
    let norm = luxemburg_norm(u, young)?;
    let bound = 1.0 + u.modular(young, 1.0);
    Ok(NormControl {
        norm,
        bound,
        ok: norm <= bound + 1e-9,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// |∫ uv| ≤ 2 ‖u‖_Ψ ‖v‖_Φ.
pub fn holder_check(u: &SampledFn, v: &SampledFn, pair: &YoungPair) -> Result<HolderCheck> {
    u.same_layout(v)?;
    let lhs = (u.values.iter().zip(&v.values).map(|(a, b)| a * b).sum::<f64>() * u.h()).abs();
    let rhs = 2.0 * luxemburg_norm(u, &pair.psi)? * luxemburg_norm(v, &pair.phi_star)?;
    Ok(HolderCheck {
        lhs,
        rhs,
        ok: lhs <= rhs + 1e-9,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogModulus {
    pub max_increment: f64,
    pub bound: f64,
    pub ok: bool,
}

/// ∫ uₓ log uₓ for the piecewise-linear interpolant of nodal data.
pub fn slope_entropy(x: &[f64], u: &[f64]) -> f64 {
    x.windows(2)
        .zip(u.windows(2))
        .map(|(xw, uw)| {
            let dx = xw[1] - xw[0];
            dx * crate::diagnostics::xlogx((uw[1] - uw[0]) / dx)
        })
        .sum()
}

/// Largest |u(x+h) − u(x)| over nodes x with x + h in range (piecewise
/// linear interpolation of u) against `2(c₁ + 1 + log 2)/|log h|`.
///
/// # Errors
/// Rejects h outside (0, 1) and h longer than the sampled interval.
pub fn log_modulus_bound(x: &[f64], u: &[f64], c1: f64, h: f64) -> Result<LogModulus> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidArgument(format!("h must lie in (0, 1), got {h}")));
    }
    if x.len() != u.len() {
        return Err(Error::LengthMismatch {
            what: "profile values",
            expected: x.len(),
            got: u.len(),
        });
    }
    if x.len() < 2 || x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("abscissae must be strictly increasing".into()));
    }
    let last = x[x.len() - 1];
    if x[0] + h > last {
        return Err(Error::InvalidArgument(format!(
            "h = {h} exceeds the interval length {}",
            last - x[0]
        )));
    }
    let interp = |t: f64| {
        let k = x.partition_point(|&xi| xi <= t).saturating_sub(1).min(x.len() - 2);
        let w = (t - x[k]) / (x[k + 1] - x[k]);
        u[k] + w * (u[k + 1] - u[k])
    };
    let max_increment = x
        .iter()
        .zip(u)
        .take_while(|(&xi, _)| xi + h <= last)
        .map(|(&xi, &ui)| (interp(xi + h) - ui).abs())
        .fold(0.0, f64::max);
    let bound = 2.0 * (c1 + 1.0 + std::f64::consts::LN_2) / h.ln().abs();
    Ok(LogModulus {
        max_increment,
        bound,
        ok: max_increment <= bound,
    })
}
