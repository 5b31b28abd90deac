//! Mean-value representation of caloric functions over modified parabolic
//! balls
//!
//! ```text
//! Ω′_r(x0, t0) = { t0 − r² < t < t0,  (x − x0)² < 8 (t0 − t) log(r² / (t0 − t)) }
//! u(x0, t0)    = c̄ / |Ω′_r| ∫_{Ω′_r} u(x, t) E((x − x0)/r, (t − t0)/r²) dx dt
//! E(x, t)      = ω₃/(16π²) R^{3/2} [x²/(4t²) + 3R/(20t²)],   R = 8t log(−t) − x²
//! ```
//!
//! with `|Ω′_r| = c̄ r³`. The constant c̄ is computed by quadrature.
//!
//! Quadrature: the slice at depth s = (t0 − t)/r² has half-width
//! `W(s) = √(8 s log(1/s))`; substituting `x = W sin φ` turns each slice
//! into a smooth integral over φ, handled by Gauss–Legendre. In s, geometric
//! panels resolve the apex s → 0 and `s = 1 − w²` removes the square-root
//! behaviour of W at the base s → 1.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};

/// Gauss–Legendre orders compared for the error estimate.
const ORDERS: (usize, usize) = (20, 28);
/// Number of geometric panels covering s ∈ (2⁻⁶¹, 1/2].
const PANELS: usize = 60;
/// Relative agreement required between the two orders.
const QUAD_TOL: f64 = 1e-9;

/// The modified parabolic ball Ω′_r(x0, t0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolicBall {
    pub x0: f64,
    pub t0: f64,
    pub r: f64,
}

impl ParabolicBall {
    pub fn new(x0: f64, t0: f64, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) || !x0.is_finite() || !t0.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "ball needs finite center and r > 0, got ({x0}, {t0}), r = {r}"
            )));
        }
        Ok(Self { x0, t0, r })
    }

    pub fn contains(&self, x: f64, t: f64) -> bool {
        let d = self.t0 - t;
        d > 0.0 && d < self.r * self.r && (x - self.x0).powi(2) < 8.0 * d * (self.r * self.r / d).ln()
    }

    pub fn measure(&self) -> Result<f64> {
        ball_measure(self.r)
    }
}

fn rule(order: usize) -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(order).expect("nonzero order"))
}

/// ∫₀^{top} g(σ) dσ where g may have an integrable singularity at 0 and a
/// square-root endpoint at `top`.
fn depth_integral(gl: &GaussLegendre, top: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
    let mut total = 0.0;
    // Base: σ = top (1 − w²), w ∈ [0, 1/√2], dσ = 2 top w dw.
    total += gl.integrate(0.0, std::f64::consts::FRAC_1_SQRT_2, |w| {
        2.0 * top * w * g(top * (1.0 - w * w))
    });
    let mut hi = 0.5 * top;
    for _ in 0..PANELS {
        let lo = 0.5 * hi;
        total += gl.integrate(lo, hi, &mut g);
        hi = lo;
    }
    total
}

fn two_orders(mut f: impl FnMut(&GaussLegendre) -> f64) -> Result<f64> {
    let coarse = f(&rule(ORDERS.0));
    let fine = f(&rule(ORDERS.1));
    let err = (fine - coarse).abs();
    if !(err <= QUAD_TOL * fine.abs().max(1.0)) {
        return Err(Error::Quadrature {
            estimate: fine,
            error_bound: err,
        });
    }
    Ok(fine)
}

/// |Ω′_r|, integrating slice widths `2√(8σ log(r²/σ))` over depth σ = t0 − t.
pub fn ball_measure(r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be > 0, got {r}")));
    }
    let r2 = r * r;
    two_orders(|gl| {
        depth_integral(gl, r2, |sigma| {
            let l = (r2 / sigma).ln();
            if l > 0.0 {
                2.0 * (8.0 * sigma * l).sqrt()
            } else {
                0.0
            }
        })
    })
}

/// ω₃ / (16π²) with ω₃ = 4π/3.
fn kernel_prefactor() -> f64 {
    (4.0 * PI / 3.0) / (16.0 * PI * PI)
}

/// E from x² and the radicand R = 8t log(−t) − x² (both ≥ 0).
#[inline]
fn kernel_parts(x2: f64, rad: f64, t: f64) -> f64 {
    let t2 = t * t;
    kernel_prefactor() * rad * rad.sqrt() * (x2 / (4.0 * t2) + 3.0 * rad / (20.0 * t2))
}

/// The kernel E(x, t) on the closed unit ball Ω′₁(0, 0).
///
/// # Errors
/// `OutsideBall` when t ∉ [−1, 0) or the radicand is negative.
pub fn kernel_e(x: f64, t: f64) -> Result<f64> {
    if !(-1.0..0.0).contains(&t) || !x.is_finite() {
        return Err(Error::OutsideBall { x, t });
    }
    let rad = 8.0 * t * (-t).ln() - x * x;
    if rad < 0.0 {
        return Err(Error::OutsideBall { x, t });
    }
    Ok(kernel_parts(x * x, rad, t))
}

/// ∫_{Ω′₁(0,0)} g(ξ, s) E(ξ, −s) dξ ds with s the depth below the apex.
fn weighted_unit_integral(gl: &GaussLegendre, g: &impl Fn(f64, f64) -> f64) -> f64 {
    depth_integral(gl, 1.0, |s| {
        let l = -s.ln();
        if !(l > 0.0) {
            return 0.0;
        }
        let w = (8.0 * s * l).sqrt();
        gl.integrate(-PI / 2.0, PI / 2.0, |phi| {
            let (sn, cs) = phi.sin_cos();
            let xi = w * sn;
            let rad = (w * cs).powi(2);
            g(xi, s) * kernel_parts(xi * xi, rad, -s) * w * cs
        })
    })
}

/// Right-hand side of the mean-value formula for `u` on Ω′_r(x0, t0).
///
/// # Errors
/// `Quadrature` when two rule orders disagree beyond a relative 1e-9.
pub fn mean_value(u: impl Fn(f64, f64) -> f64, x0: f64, t0: f64, r: f64) -> Result<f64> {
    let ball = ParabolicBall::new(x0, t0, r)?;
    let c_bar = ball_measure(1.0)?;
    let measure = ball.measure()?;
    // Change of variables x = x0 + rξ, t = t0 − r²s contributes r³.
    let g = |xi: f64, s: f64| u(x0 + r * xi, t0 - r * r * s);
    let integral = two_orders(|gl| weighted_unit_integral(gl, &g))?;
    Ok(c_bar / measure * r.powi(3) * integral)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_measure_matches_gamma_closed_form() {
        // ∫₀¹ 2√(8 s log(1/s)) ds = 2√8 Γ(3/2) (2/3)^{3/2}
        let closed = 2.0 * 8f64.sqrt() * (PI.sqrt() / 2.0) * (2.0f64 / 3.0).powf(1.5);
        assert!((ball_measure(1.0).unwrap() - closed).abs() < 1e-12);
        assert!((closed - 2.7288712211906363).abs() < 1e-14);
    }

    #[test]
    fn measure_scales_cubically() {
        for r in [0.25, 0.5, 1.0, 2.0] {
            let ratio = ball_measure(2.0 * r).unwrap() / ball_measure(r).unwrap();
            assert!((ratio - 8.0).abs() < 1e-6);
        }
        assert!(ball_measure(0.0).is_err());
    }

    #[test]
    fn membership() {
        let b = ParabolicBall::new(0.3, 1.0, 0.5).unwrap();
        assert!(b.contains(0.3, 0.9));
        assert!(!b.contains(0.3, 1.0));
        assert!(!b.contains(0.3, 0.7));
        assert!(!b.contains(5.0, 0.9));
    }

    #[test]
    fn kernel_values() {
        let t = -1.0 / std::f64::consts::E;
        let rad = 8.0 / std::f64::consts::E;
        let expected = kernel_prefactor() * rad.powf(1.5) * 3.0 * rad / (20.0 * t * t);
        assert!((kernel_e(0.0, t).unwrap() - expected).abs() < 1e-14);
        let edge = (8.0 * t * (-t).ln()).sqrt();
        assert!(kernel_e(edge * (1.0 - 1e-9), t).unwrap() < 1e-10);
        assert!(kernel_e(0.0, 0.1).is_err());
        assert!(kernel_e(3.0, -0.5).is_err());
    }

    #[test]
    fn kernel_supremum_on_sample() {
        // On a slice E decreases in x², and on x = 0 it peaks at t = −e⁻⁵.
        let exact = kernel_prefactor() * 0.15 * 8f64.powf(2.5) * (5.0 / std::f64::consts::E).powf(2.5);
        assert!((kernel_e(0.0, -(-5f64).exp()).unwrap() - exact).abs() < 1e-12);
        let n = 1000;
        let mut sup: f64 = 0.0;
        for i in 0..n {
            let s = (i as f64 + 0.5) / n as f64;
            let w = (8.0 * s * -s.ln()).sqrt();
            for j in 0..n {
                let phi = -PI / 2.0 + PI * (j as f64 + 0.5) / n as f64;
                sup = sup.max(kernel_e(w * phi.sin(), -s).unwrap());
            }
        }
        assert!((sup - 3.304799267578845).abs() < 1e-9, "{sup}");
        assert!(sup <= exact);
    }

    #[test]
    fn constant_is_reproduced() {
        let v = mean_value(|_, _| 1.0, 0.0, 0.0, 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn linear_and_quadratic_examples() {
        let v = mean_value(|x, _| x, 0.3, 1.0, 0.5).unwrap();
        assert!((v - 0.3).abs() < 1e-10);
        let v = mean_value(|x, t| x * x + 2.0 * t, 0.5, 1.0, 0.4).unwrap();
        assert!((v - 2.25).abs() < 1e-10);
    }

    #[test]
    fn non_caloric_function_is_not_reproduced() {
        let v = mean_value(|x, _| x * x, 0.0, 1.0, 0.5).unwrap();
        assert!(v > 0.01);
    }
}
