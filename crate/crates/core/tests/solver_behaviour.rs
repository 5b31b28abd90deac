use std::num::NonZeroUsize;

use ddchannel::diagnostics::{
    a_field, a_residual, a_residual_states, back_stress, entropy, entropy_records, kx_log_control,
};
use ddchannel::initial::{default_profiles, regularize_initial, InitialProfiles};
use ddchannel::mechanics::{self, stationary_profile, MechanicsConfig};
use ddchannel::solver::{self, face_velocity, run_to_steady_detailed, run_until_with};
use ddchannel::{cfl_dt, derive_densities, reconstruct_profiles, run_until, step, wall_flux};
use ddchannel::{ChannelState, DensityPair, Grid, SolverConfig};
use gauss_quad::legendre::GaussLegendre;

fn regularized(c: f64, eps: f64, tau: f64) -> InitialProfiles {
    regularize_initial(&default_profiles(c).unwrap(), eps, tau).unwrap()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn extreme_amplitude_densities_are_nonnegative() {
    let g = Grid::new(400).unwrap();
    let d = default_profiles(5.0 / 16.0).unwrap().densities(&g).unwrap();
    let m = d.theta_plus.iter().chain(&d.theta_minus).fold(f64::INFINITY, |a, &b| a.min(b));
    assert!(m >= 0.0, "{m}");
}

#[test]
fn round_trip_on_default_data() {
    let g = Grid::new(400).unwrap();
    let s = default_profiles(0.2).unwrap().sample(&g);
    let back = reconstruct_profiles(&derive_densities(&s).unwrap()).unwrap();
    let dx = g.dx();
    let slope = |f: &[f64]| f.windows(2).map(|w| (w[1] - w[0]) / dx).collect::<Vec<_>>();
    assert!(sup_diff(&slope(&s.rho), &slope(&back.rho)) < 1e-13);
    assert!(sup_diff(&slope(&s.kappa), &slope(&back.kappa)) < 1e-13);
}

#[test]
fn masses_conserved_over_thousand_steps() {
    let g = Grid::new(200).unwrap();
    let c = SolverConfig::new(1.0, 0.1, 1.0);
    let mut d = regularized(0.1, 0.1, 1.0).densities(&g).unwrap();
    for _ in 0..1000 {
        let dt = cfl_dt(&d, &c).unwrap();
        d = step(&d, &c, dt).unwrap();
    }
    let (p, m) = d.masses();
    assert!((p - 1.0).abs() < 1e-10 && (m - 1.0).abs() < 1e-10, "{p} {m}");
}

#[test]
fn zero_stress_flat_data_stays_put() {
    let g = Grid::new(50).unwrap();
    let d = default_profiles(0.0).unwrap().densities(&g).unwrap();
    let c = SolverConfig::new(0.0, 0.1, 0.5);
    let t = run_until(&DensityPair::uniform(g.clone(), 0.5, 0.5), &c, &[0.1, 0.5]).unwrap();
    for s in &t.snapshots {
        let st = reconstruct_profiles(s).unwrap();
        assert!(sup_diff(&st.kappa, g.nodes()) < 1e-14);
    }
    // Non-uniform κ⁰ relaxes but ρ stays identically zero.
    let t = run_until(&d, &c, &[0.5]).unwrap();
    let st = reconstruct_profiles(t.last().unwrap()).unwrap();
    assert!(st.rho.iter().all(|r| r.abs() < 1e-14));
}

#[test]
fn zero_stress_decouples_populations() {
    let g = Grid::new(64).unwrap();
    let tp: Vec<f64> = g.centers().iter().map(|x| 1.0 + 0.5 * (3.0 * x).sin()).collect();
    let d = DensityPair::new(g, tp, vec![0.0; 64], 0.0).unwrap();
    let t = run_until(&d, &SolverConfig::new(0.0, 0.2, 0.3), &[0.3]).unwrap();
    assert!(t.last().unwrap().theta_minus.iter().all(|&m| m == 0.0));
}

#[test]
fn entropy_bound_after_unit_time() {
    let g = Grid::new(200).unwrap();
    let d = regularized(0.1, 0.1, 1.0).densities(&g).unwrap();
    let s0 = entropy(&d);
    let t = run_until(&d, &SolverConfig::new(1.0, 0.1, 1.0), &[1.0]).unwrap();
    assert!(entropy(t.last().unwrap()) <= s0 + 0.5 + 1e-6);
}

fn entropy_oracle(p: &InitialProfiles) -> f64 {
    // ∫ Σ θ± log θ± with θ± = (κₓ ± ρₓ)/2 from the closed-form derivatives.
    let gl = GaussLegendre::new(NonZeroUsize::new(30).unwrap());
    let f = |x: f64| {
        let (k, r) = (p.kappa.d1(x), p.rho.d1(x));
        ddchannel::diagnostics::xlogx((k + r) / 2.0) + ddchannel::diagnostics::xlogx((k - r) / 2.0)
    };
    let panels = 400;
    (0..panels)
        .map(|i| {
            let a = -1.0 + 2.0 * i as f64 / panels as f64;
            gl.integrate(a, a + 2.0 / panels as f64, f)
        })
        .sum()
}

#[test]
fn entropy_matches_fine_quadrature() {
    let p = regularized(0.1, 0.1, 1.0);
    let oracle = entropy_oracle(&p);
    let g = Grid::new(400).unwrap();
    let centers = g.centers();
    let sample = |sign: f64| -> Vec<f64> {
        centers.iter().map(|&x| (p.kappa.d1(x) + sign * p.rho.d1(x)) / 2.0).collect()
    };
    let midpoint = DensityPair::new(g, sample(1.0), sample(-1.0), 0.0).unwrap();
    let s = entropy(&midpoint);
    assert!((s - oracle).abs() < 1e-6, "{s} vs {oracle}");
}

#[test]
fn entropy_of_cell_averages_converges_at_second_order() {
    let p = regularized(0.1, 0.1, 1.0);
    let oracle = entropy_oracle(&p);
    let err = |n: usize| (entropy(&p.densities(&Grid::new(n).unwrap()).unwrap()) - oracle).abs();
    let (e1, e2) = (err(200), err(400));
    assert!(e2 < 2e-5 && e1 / e2 > 3.5, "{e1} {e2}");
}

#[test]
fn kx_log_below_entropy_plus_two() {
    let g = Grid::new(100).unwrap();
    for c in [-0.3, 0.0, 0.1, 0.3125] {
        let d = regularized(c, 0.05, 2.0).densities(&g).unwrap();
        assert!(kx_log_control(&d) <= entropy(&d) + 2.0 + 1e-9);
    }
}

#[test]
fn wall_flux_transient_then_vanishing() {
    let g = Grid::new(200).unwrap();
    let c = SolverConfig::new(1.0, 0.1, 1.0);
    let d = regularized(0.1, 0.1, 1.0).densities(&g).unwrap();
    let ((lp, lm), (rp, rm)) = wall_flux(&d, &c).unwrap();
    assert!([lp, lm, rp, rm].iter().all(|v| v.is_finite()));
    assert!([lp, lm, rp, rm].iter().any(|v| v.abs() > 1e-6));
    let run = run_to_steady_detailed(&d, &c).unwrap();
    let ((lp, lm), (rp, rm)) = wall_flux(&run.state, &c).unwrap();
    assert!([lp, lm, rp, rm].iter().all(|v| v.abs() < 1e-5));
}

#[test]
fn steady_velocity_is_the_drift_of_the_stationary_profile() {
    // At steady state v = −ετ/(1+ε): nonzero for ε > 0 even though
    // the total wall fluxes vanish.
    let g = Grid::new(200).unwrap();
    let c = SolverConfig::new(1.0, 0.1, 1.0);
    let run = run_to_steady_detailed(&regularized(0.1, 0.1, 1.0).densities(&g).unwrap(), &c).unwrap();
    let v = face_velocity(&run.state, &c).unwrap();
    let expected = -0.1 / 1.1;
    assert!((v[0] - expected).abs() < 1e-2 && (v[v.len() - 1] - expected).abs() < 1e-2);
}

#[test]
fn stationary_profile_is_discretely_stationary() {
    let g = Grid::new(400).unwrap();
    let c = SolverConfig::new(1.0, 0.1, 1.0);
    let st = stationary_profile(1.0, 0.1, &g).unwrap();
    let d = derive_densities(&st).unwrap();
    let dt = cfl_dt(&d, &c).unwrap();
    let next = reconstruct_profiles(&step(&d, &c, dt).unwrap()).unwrap();
    let change = sup_diff(&next.rho, &st.rho).max(sup_diff(&next.kappa, &st.kappa));
    assert!(change < 5e-3 * dt, "{}", change / dt);
}

#[test]
fn steady_state_refines_at_first_order() {
    let c = SolverConfig::new(1.0, 0.1, 1.0);
    let errs: Vec<f64> = [50usize, 100]
        .iter()
        .map(|&n| {
            let g = Grid::new(n).unwrap();
            let (s, _) = ddchannel::run_to_steady(&regularized(0.1, 0.1, 1.0).densities(&g).unwrap(), &c).unwrap();
            let s = reconstruct_profiles(&s).unwrap();
            sup_diff(&s.kappa, &stationary_profile(1.0, 0.1, &g).unwrap().kappa)
        })
        .collect();
    assert!(errs[1] <= errs[0] / 2.0 * 1.05, "{errs:?}");
}

#[test]
fn back_stress_of_stationary_profile() {
    // Stationary: τ_b − τ = −ε τ/(1+ε) in the interior, tending to 0 with ε.
    let g = Grid::new(400).unwrap();
    for eps in [0.1, 0.01] {
        let d = derive_densities(&stationary_profile(1.0, eps, &g).unwrap()).unwrap();
        let b = back_stress(&d, 1e-12).unwrap();
        let dev = b[100..300].iter().map(|v| (v - 1.0 + eps / (1.0 + eps)).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-3, "eps {eps}: {dev}");
    }
}

#[test]
fn a_field_gradient_vanishes_for_limit_profile() {
    let g = Grid::new(400).unwrap();
    let a = a_field(&stationary_profile(1.0, 0.0, &g).unwrap(), 1.0);
    let dx = g.dx();
    let ax = a[1..a.len() - 2].windows(2).map(|w| ((w[1] - w[0]) / dx).abs()).fold(0.0, f64::max);
    assert!(ax < 5e-3, "{ax}");
}

#[test]
fn a_residual_of_stationary_snapshots() {
    let g = Grid::new(400).unwrap();
    let st = stationary_profile(1.0, 0.1, &g).unwrap();
    let snaps: Vec<ChannelState> = [0.0, 0.1, 0.2]
        .iter()
        .map(|&t| ChannelState { time: t, ..st.clone() })
        .collect();
    let r = a_residual_states(&snaps, 1.0, 0.1, 1e-12).unwrap();
    assert!(r < 5e-3, "{r}");
}

#[test]
fn a_residual_shrinks_under_refinement() {
    let res: Vec<f64> = [100usize, 200, 400]
        .iter()
        .map(|&n| {
            let g = Grid::new(n).unwrap();
            let d = regularized(0.1, 0.1, 1.0).densities(&g).unwrap();
            let times: Vec<f64> = (1..=3).map(|k| 0.2 + 0.01 * k as f64).collect();
            let t = run_until(&d, &SolverConfig::new(1.0, 0.1, 0.3), &times).unwrap();
            a_residual(&t, 1.0, 0.1).unwrap()
        })
        .collect();
    assert!(res[1] < res[0] && res[2] < res[1], "{res:?}");
}

#[test]
fn observer_sees_every_step() {
    let g = Grid::new(40).unwrap();
    let d = regularized(0.1, 0.1, 1.0).densities(&g).unwrap();
    let mut seen = 0;
    let mut total = 0.0;
    let t = run_until_with(&d, &SolverConfig::new(1.0, 0.1, 0.05), &[0.02, 0.05], |_, dt| {
        seen += 1;
        total += dt;
    })
    .unwrap();
    assert_eq!(seen, t.steps);
    assert!((total - 0.05).abs() < 1e-12);
    assert_eq!(entropy_records(&t, 1.0).len(), 2);
}

#[test]
fn displacement_matches_longtime_closed_form() {
    let g = Grid::new(400).unwrap();
    let cfg = MechanicsConfig::new(1.0, 0.0, 1.0).unwrap();
    let st = stationary_profile(1.0, 0.0, &g).unwrap();
    let u = mechanics::displacement_profile(&st.rho, &g, &cfg).unwrap();
    let err = g
        .nodes()
        .iter()
        .zip(&u)
        .map(|(&x, &v)| (v - mechanics::longtime_displacement(x, &cfg).unwrap()).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-4, "{err}");
}

#[test]
fn displacement_linear_in_compliance() {
    let g = Grid::new(64).unwrap();
    let rho = stationary_profile(1.5, 0.2, &g).unwrap().rho;
    let a = MechanicsConfig::new(2.0, 0.0, 1.5).unwrap();
    let b = MechanicsConfig::new(0.7, 3.0, 1.5).unwrap();
    let ua = mechanics::displacement_profile(&rho, &g, &a).unwrap();
    let ub = mechanics::displacement_profile(&rho, &g, &b).unwrap();
    for ((x, p), q) in g.nodes().iter().zip(&ua).zip(&ub) {
        assert!((p - q - 1.5 * x * (1.0 / 2.0 - 1.0 / 0.7)).abs() < 1e-14);
    }
}

#[test]
fn longtime_panel_bends_near_walls() {
    let g = Grid::new(400).unwrap();
    let cfg = MechanicsConfig::new(1.0, 0.0, 1.0).unwrap();
    let st = stationary_profile(1.0, 0.0, &g).unwrap();
    let u = mechanics::displacement_profile(&st.rho, &g, &cfg).unwrap();
    let dx = g.dx();
    let curv: Vec<f64> = u.windows(3).map(|w| ((w[2] - 2.0 * w[1] + w[0]) / (dx * dx)).abs()).collect();
    let (edge, mid) = (curv[0].max(curv[curv.len() - 1]), curv[curv.len() / 2]);
    assert!(edge > 5.0 * mid, "{edge} vs {mid}");
    let mesh = mechanics::deformed_mesh(&st.rho, &g, &cfg, 5, 41, 1.0).unwrap();
    assert!(mesh.reference.iter().zip(&mesh.displaced).all(|(r, d)| r.0 == d.0));
    let top = mesh.row(4);
    assert!((top[40].1 - 1.0 - (2.0 - 1.0 / 1f64.tanh())).abs() < 1e-4);
}

#[test]
fn regularization_converges_as_epsilon_shrinks() {
    let base = default_profiles(0.2).unwrap();
    let xs: Vec<f64> = (0..=400).map(|i| -1.0 + i as f64 / 200.0).collect();
    let dist = |eps: f64| {
        let r = regularize_initial(&base, eps, 1.5).unwrap();
        xs.iter()
            .map(|&x| (r.rho.value(x) - base.rho.value(x)).abs().max((r.kappa.value(x) - base.kappa.value(x)).abs()))
            .fold(0.0, f64::max)
    };
    let ratios: Vec<f64> = [0.1, 0.01, 0.001].iter().map(|&e| dist(e) / e).collect();
    assert!(ratios.iter().all(|&r| r < 2.0), "{ratios:?}");
}

#[test]
fn cfl_violation_surfaces_as_step_failure() {
    let g = Grid::new(100).unwrap();
    let d = regularized(0.3, 0.01, 1.0).densities(&g).unwrap();
    let c = SolverConfig::new(1.0, 0.01, 1.0);
    let dt = cfl_dt(&d, &c).unwrap();
    assert!(solver::step(&d, &c, 50.0 * dt).is_err());
}
