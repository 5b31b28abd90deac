use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use ddchannel::diagnostics::{entropy, kx_log_control, EntropyRecord};
use ddchannel::initial::{
    compatibility_report, default_profiles, phi_property_report, regularize_initial, regularized_property_report,
    Field, InitialProfiles, ProfileMeta, SampledField,
};
use ddchannel::io::{read_two_columns, write_entropy_records, write_mesh, write_snapshots, write_table, Delimiter};
use ddchannel::meanvalue::{ball_measure, mean_value};
use ddchannel::mechanics::{
    deformed_mesh, displacement_profile, longtime_displacement, stationary_profile, MechanicsConfig,
};
use ddchannel::orlicz::{holder_check, log_modulus_bound, luxemburg_norm, norm_control_check, SampledFn, YoungFunction, YoungPair};
use ddchannel::solver::{cfl_dt, run_to_steady_detailed, run_until};
use ddchannel::state::reconstruct_unchecked;
use ddchannel::{DensityPair, Grid, SolverConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{invalid, CliError, CliResult, Config};

/// Where and how a command writes.
struct Output {
    dir: PathBuf,
    delimiter: Delimiter,
}

impl Output {
    fn new(cfg: &Config) -> CliResult<Self> {
        let dir = cfg.output_dir()?;
        let delimiter = cfg.delimiter()?;
        fs::create_dir_all(&dir)
            .map_err(|e| CliError::Run(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir, delimiter })
    }

    fn create(&self, name: &str) -> CliResult<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = File::create(&path).map_err(|e| CliError::Run(format!("cannot write {}: {e}", path.display())))?;
        Ok(BufWriter::new(f))
    }

    fn manifest(&self, command: &str, cfg: &Config, derived: Value) -> CliResult<()> {
        let m = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg.to_json(),
            "resolved": resolved(cfg),
            "derived": derived,
        });
        let mut w = self.create("manifest.json")?;
        serde_json::to_writer_pretty(&mut w, &m).map_err(|e| CliError::Run(e.to_string()))?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

/// Effective values of the inputs shared by every command, defaults included.
fn resolved(cfg: &Config) -> Value {
    let d = SolverConfig::new(0.0, 0.1, 0.0);
    json!({
        "grid.n_cells": cfg.usize_or("grid.n_cells", 200).ok(),
        "solver.tau": cfg.f64("solver.tau").ok(),
        "solver.epsilon": cfg.f64_or("solver.epsilon", d.epsilon).ok(),
        "solver.cfl": cfg.f64_or("solver.cfl", d.cfl).ok(),
        "solver.kappa_x_floor": cfg.f64_or("solver.kappa_x_floor", d.kappa_x_floor).ok(),
        "solver.t_end": cfg.f64("solver.t_end").ok(),
        "solver.steady_tol": cfg.f64_or("solver.steady_tol", d.steady_tol).ok(),
        "solver.max_time": cfg.f64_or("solver.max_time", d.max_time).ok(),
        "mech.mu": cfg.f64_or("mech.mu", 1.0).ok(),
        "mech.lambda": cfg.f64_or("mech.lambda", 1.0).ok(),
        "initial.family": cfg.str_opt("initial.family").ok().flatten().unwrap_or("default"),
        "initial.amplitude": cfg.f64_or("initial.amplitude", 0.1).ok(),
        "initial.rho_file": cfg.str_opt("initial.rho_file").ok().flatten(),
        "initial.kappa_file": cfg.str_opt("initial.kappa_file").ok().flatten(),
        "output.delimiter": cfg.str_opt("output.delimiter").ok().flatten().unwrap_or("space"),
    })
}

fn grid(cfg: &Config) -> CliResult<Grid> {
    Grid::new(cfg.usize_or("grid.n_cells", 200)?).map_err(invalid)
}

fn solver_config(cfg: &Config, t_end: f64) -> CliResult<SolverConfig> {
    let mut s = SolverConfig::new(cfg.f64("solver.tau")?, cfg.f64_or("solver.epsilon", 0.1)?, t_end);
    s.cfl = cfg.f64_or("solver.cfl", s.cfl)?;
    s.kappa_x_floor = cfg.f64_or("solver.kappa_x_floor", s.kappa_x_floor)?;
    s.steady_tol = cfg.f64_or("solver.steady_tol", s.steady_tol)?;
    s.max_time = cfg.f64_or("solver.max_time", s.max_time)?;
    s.validate().map_err(invalid)?;
    Ok(s)
}

fn mechanics_config(cfg: &Config) -> CliResult<MechanicsConfig> {
    MechanicsConfig::new(
        cfg.f64_or("mech.mu", 1.0)?,
        cfg.f64_or("mech.lambda", 1.0)?,
        cfg.f64("solver.tau")?,
    )
    .map_err(invalid)
}

fn read_field(path: &str) -> CliResult<Field> {
    let f = File::open(path).map_err(|e| CliError::Config(format!("cannot open {path}: {e}")))?;
    let (x, v) = read_two_columns(BufReader::new(f)).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
    Ok(Field::Sampled(SampledField::new(x, v, None, None).map_err(|e| CliError::Config(format!("{path}: {e}")))?))
}

/// The configured (ρ⁰, κ⁰) before regularization.
fn base_profiles(cfg: &Config) -> CliResult<InitialProfiles> {
    match cfg.str_opt("initial.family")?.unwrap_or("default") {
        "default" => {}
        "uniform" => return Ok(uniform_profiles()),
        other => {
            return Err(CliError::Config(format!(
                "initial.family must be default or uniform, got '{other}'"
            )))
        }
    }
    let rho_file = cfg.str_opt("initial.rho_file")?;
    let kappa_file = cfg.str_opt("initial.kappa_file")?;
    if rho_file.is_none() && kappa_file.is_none() {
        return default_profiles(cfg.f64_or("initial.amplitude", 0.1)?).map_err(invalid);
    }
    let default = default_profiles(cfg.f64_or("initial.amplitude", 0.1)?).map_err(invalid)?;
    let rho = rho_file.map(read_field).transpose()?.unwrap_or(default.rho);
    let kappa = kappa_file.map(read_field).transpose()?.unwrap_or(default.kappa);
    Ok(InitialProfiles {
        rho,
        kappa,
        meta: ProfileMeta {
            label: "file".into(),
            ..Default::default()
        },
    })
}

/// ρ⁰ = 0, κ⁰ = x: constant densities θ± = 1/2, stationary when τ = 0.
fn uniform_profiles() -> InitialProfiles {
    InitialProfiles {
        rho: Field::Polynomial(vec![0.0]),
        kappa: Field::Polynomial(vec![0.0, 1.0]),
        meta: ProfileMeta {
            label: "uniform".into(),
            ..Default::default()
        },
    }
}

fn is_uniform(cfg: &Config) -> CliResult<bool> {
    Ok(cfg.str_opt("initial.family")? == Some("uniform"))
}

/// Initial densities for a run at (ε, τ): regularized for ε > 0, the
/// configured profiles themselves at ε = 0.
fn initial_densities(cfg: &Config, g: &Grid, epsilon: f64, tau: f64) -> CliResult<DensityPair> {
    let base = base_profiles(cfg)?;
    // The uniform state has κ⁰ₓ(±1) = 1, so it bypasses the corner conditions.
    let profiles = if is_uniform(cfg)? {
        base
    } else if epsilon > 0.0 {
        regularize_initial(&base, epsilon, tau).map_err(invalid)?
    } else {
        base.check_invariants(2001).map_err(invalid)?;
        base
    };
    profiles.densities(g).map_err(invalid)
}

fn output_times(cfg: &Config, t_end: f64) -> CliResult<Vec<f64>> {
    if let Some(times) = cfg.f64_list_opt("output.times")? {
        if times.is_empty() || times.windows(2).any(|w| !(w[1] > w[0])) || times[0] <= 0.0 || times[times.len() - 1] > t_end {
            return Err(CliError::Config(
                "output.times must be increasing, positive and at most solver.t_end".into(),
            ));
        }
        return Ok(times);
    }
    let every = cfg.f64_or("output.every", t_end / 50.0)?;
    if !(every > 0.0) {
        return Err(CliError::Config(format!("output.every must be > 0, got {every}")));
    }
    let count = ((t_end / every) - 1e-9).ceil().max(1.0) as usize;
    // When `every` divides t_end, split evenly so times like 0.7 come out exact.
    let even = (count as f64 * every - t_end).abs() <= 1e-9 * t_end;
    Ok((1..=count)
        .map(|k| match (k == count, even) {
            (true, _) => t_end,
            (false, true) => t_end * k as f64 / count as f64,
            (false, false) => k as f64 * every,
        })
        .collect())
}

fn t_end(cfg: &Config) -> CliResult<f64> {
    let t = cfg.f64("solver.t_end")?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(CliError::Config(format!("solver.t_end must be > 0, got {t}")));
    }
    Ok(t)
}

pub fn simulate(cfg: &Config) -> CliResult<()> {
    let t_end = t_end(cfg)?;
    let solver = solver_config(cfg, t_end)?;
    let g = grid(cfg)?;
    let times = output_times(cfg, t_end)?;
    let d0 = initial_densities(cfg, &g, solver.epsilon, solver.tau)?;
    let out = Output::new(cfg)?;
    let s0 = entropy(&d0);
    let dt0 = cfl_dt(&d0, &solver)?;
    out.manifest(
        "simulate",
        cfg,
        json!({ "dx": g.dx(), "n_nodes": g.n_nodes(), "S0": s0, "dt_initial": dt0, "output_times": times }),
    )?;
    let traj = run_until(&d0, &solver, &times)?;
    let mut snapshots = vec![d0.clone()];
    snapshots.extend(traj.snapshots.iter().cloned());
    let records: Vec<EntropyRecord> = snapshots.iter().map(|s| EntropyRecord::new(s, s0, 0.0, solver.tau)).collect();
    let mut w = out.create("snapshots.dat")?;
    write_snapshots(&mut w, &snapshots, out.delimiter)?;
    w.flush()?;
    let mut w = out.create("entropy.dat")?;
    write_entropy_records(&mut w, &records, out.delimiter)?;
    w.flush()?;
    let worst = records.iter().map(|r| r.s - r.bound).fold(f64::NEG_INFINITY, f64::max);
    out.manifest(
        "simulate",
        cfg,
        json!({
            "dx": g.dx(), "n_nodes": g.n_nodes(), "S0": s0, "dt_initial": dt0, "output_times": times,
            "steps": traj.steps, "max_entropy_excess": worst,
        }),
    )?;
    println!(
        "simulate: {} steps to t = {t_end}, max S - bound = {worst:e}, output in {}",
        traj.steps,
        out.dir.display()
    );
    Ok(())
}

pub fn steady(cfg: &Config) -> CliResult<()> {
    let solver = solver_config(cfg, cfg.f64_or("solver.max_time", 1e3)?)?;
    let g = grid(cfg)?;
    let exact = stationary_profile(solver.tau, solver.epsilon, &g).map_err(invalid)?;
    let d0 = initial_densities(cfg, &g, solver.epsilon, solver.tau)?;
    let out = Output::new(cfg)?;
    out.manifest("steady", cfg, json!({ "dx": g.dx(), "status": "running" }))?;
    let run = run_to_steady_detailed(&d0, &solver)?;
    let num = reconstruct_unchecked(&run.state);
    let rows: Vec<Vec<f64>> = g
        .nodes()
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let (r, k) = (num.rho[j], num.kappa[j]);
            let (re, ke) = (exact.rho[j], exact.kappa[j]);
            vec![x, r, re, (r - re).abs(), k, ke, (k - ke).abs(), (r - re).abs().max((k - ke).abs())]
        })
        .collect();
    let sup = rows.iter().map(|r| r[7]).fold(0.0, f64::max);
    let mut w = out.create("steady_profiles.dat")?;
    write_snapshots(&mut w, std::slice::from_ref(&run.state), out.delimiter)?;
    w.flush()?;
    let mut w = out.create("steady_comparison.dat")?;
    write_table(
        &mut w,
        &["x", "rho", "rho_exact", "rho_error", "kappa", "kappa_exact", "kappa_error", "error"],
        &rows,
        out.delimiter,
    )?;
    w.flush()?;
    out.manifest(
        "steady",
        cfg,
        json!({
            "dx": g.dx(), "status": "converged", "time_to_steady": run.state.time,
            "steps": run.steps, "residual": run.residual, "sup_error": sup,
        }),
    )?;
    println!(
        "steady: t = {} after {} steps, sup error vs closed form {sup:e}",
        run.state.time, run.steps
    );
    Ok(())
}

fn interior_distance(a: &[f64], b: &[f64], nodes: &[f64], window: f64) -> f64 {
    nodes
        .iter()
        .zip(a.iter().zip(b))
        .filter(|(x, _)| x.abs() <= window)
        .map(|(_, (p, q))| (p - q).abs())
        .fold(0.0, f64::max)
}

pub fn sweep_epsilon(cfg: &Config) -> CliResult<()> {
    let t_end = t_end(cfg)?;
    let tau = cfg.f64("solver.tau")?;
    let eps = cfg.f64_list_opt("sweep.epsilons")?.unwrap_or_else(|| vec![0.2, 0.1, 0.05, 0.025]);
    if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0)) || eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(CliError::Config(format!(
            "sweep.epsilons must be positive and strictly decreasing, got {eps:?}"
        )));
    }
    let window = cfg.f64_or("sweep.window", 0.8)?;
    if !(window > 0.0 && window < 1.0) {
        return Err(CliError::Config(format!("sweep.window must lie in (0, 1), got {window}")));
    }
    let g = grid(cfg)?;
    let times = output_times(cfg, t_end)?;
    let mut runs = Vec::with_capacity(eps.len());
    for &e in &eps {
        let mut c = cfg.clone();
        c.set("solver.epsilon", toml::Value::Float(e))?;
        runs.push((solver_config(&c, t_end)?, initial_densities(&c, &g, e, tau)?));
    }
    let out = Output::new(cfg)?;
    out.manifest("sweep-epsilon", cfg, json!({ "epsilons": eps, "dx": g.dx(), "window": window }))?;

    // Each run writes only its own file; results come back in input order.
    let results: Vec<CliResult<DensityPair>> = runs
        .par_iter()
        .map(|(solver, d0)| {
            let traj = run_until(d0, solver, &times)
                .map_err(|e| CliError::Run(format!("epsilon = {}: {e}", solver.epsilon)))?;
            let mut w = out.create(&format!("sweep_eps_{}.dat", solver.epsilon))?;
            write_snapshots(&mut w, &traj.snapshots, out.delimiter)?;
            w.flush()?;
            let mut w = out.create(&format!("sweep_logmod_eps_{}.dat", solver.epsilon))?;
            let mut rows = Vec::new();
            let window_nodes: Vec<usize> = (0..g.n_nodes()).filter(|&j| g.nodes()[j].abs() <= window).collect();
            let xs: Vec<f64> = window_nodes.iter().map(|&j| g.nodes()[j]).collect();
            for s in &traj.snapshots {
                let c1 = kx_log_control(s);
                let kappa = reconstruct_unchecked(s).kappa;
                let ks: Vec<f64> = window_nodes.iter().map(|&j| kappa[j]).collect();
                for h in [0.1, 0.01] {
                    let m = log_modulus_bound(&xs, &ks, c1, h)?;
                    rows.push(vec![s.time, h, c1, m.max_increment, m.bound, m.ok as u8 as f64]);
                }
            }
            write_table(&mut w, &["time", "h", "c1", "max_increment", "bound", "ok"], &rows, out.delimiter)?;
            w.flush()?;
            if let Some(r) = rows.iter().find(|r| r[5] == 0.0) {
                return Err(CliError::Run(format!(
                    "epsilon = {}: log-modulus bound violated at t = {}, h = {}",
                    solver.epsilon, r[0], r[1]
                )));
            }
            Ok(traj.snapshots.last().cloned().unwrap_or_else(|| d0.clone()))
        })
        .collect();
    let finals = results.into_iter().collect::<CliResult<Vec<_>>>()?;
    let profiles: Vec<_> = finals.iter().map(reconstruct_unchecked).collect();
    let rows: Vec<Vec<f64>> = profiles
        .windows(2)
        .zip(eps.windows(2))
        .map(|(p, e)| {
            let dr = interior_distance(&p[0].rho, &p[1].rho, g.nodes(), window);
            let dk = interior_distance(&p[0].kappa, &p[1].kappa, g.nodes(), window);
            vec![e[0], e[1], dr, dk, dr.max(dk)]
        })
        .collect();
    let mut w = out.create("sweep_distances.dat")?;
    write_table(&mut w, &["eps_a", "eps_b", "d_rho", "d_kappa", "d"], &rows, out.delimiter)?;
    w.flush()?;
    let d: Vec<f64> = rows.iter().map(|r| r[4]).collect();
    let decreasing = d.windows(2).all(|p| p[1] < p[0]);
    out.manifest(
        "sweep-epsilon",
        cfg,
        json!({ "epsilons": eps, "dx": g.dx(), "window": window, "distances": d, "strictly_decreasing": decreasing }),
    )?;
    println!("sweep-epsilon: distances {d:?}");
    if !decreasing {
        return Err(CliError::Run(format!("distances are not strictly decreasing: {d:?}")));
    }
    Ok(())
}

pub fn mech(cfg: &Config) -> CliResult<()> {
    let mc = mechanics_config(cfg)?;
    let g = grid(cfg)?;
    let rows = cfg.usize_or("mech.rows", 11)?;
    let cols = cfg.usize_or("mech.cols", 41)?;
    let height = cfg.f64_or("mech.height", 1.0)?;
    let eps = cfg.f64_or("mech.epsilon", 0.0)?;
    let zero = vec![0.0; g.n_nodes()];
    let unloaded = MechanicsConfig { tau: 0.0, ..mc };
    let long = match stationary_profile(mc.tau, eps, &g) {
        Ok(s) => s.rho,
        Err(_) => zero.clone(),
    };
    let panels = [("a", &zero, &unloaded), ("b", &zero, &mc), ("c", &long, &mc)];
    let out = Output::new(cfg)?;
    let mut u2 = Vec::new();
    for (name, rho, c) in panels {
        let mesh = deformed_mesh(rho, &g, c, rows, cols, height).map_err(invalid)?;
        let mut w = out.create(&format!("mesh_{name}.dat"))?;
        write_mesh(&mut w, &mesh, out.delimiter)?;
        w.flush()?;
        u2.push(displacement_profile(rho, &g, c)?);
    }
    let closed = |x: f64| if eps == 0.0 && mc.tau != 0.0 { longtime_displacement(x, &mc).ok() } else { None };
    let table: Vec<Vec<f64>> = g
        .nodes()
        .iter()
        .enumerate()
        .map(|(j, &x)| vec![x, u2[0][j], u2[1][j], u2[2][j], closed(x).unwrap_or(f64::NAN)])
        .collect();
    let mut w = out.create("u2_profile.dat")?;
    write_table(&mut w, &["x1", "u2_a", "u2_b", "u2_c", "u2_c_exact"], &table, out.delimiter)?;
    w.flush()?;
    let u2_c_at_1 = u2[2][g.n_nodes() - 1];
    out.manifest(
        "mech",
        cfg,
        json!({ "u2_c_at_1": u2_c_at_1, "u2_c_exact_at_1": closed(1.0), "rows": rows, "cols": cols }),
    )?;
    println!("mech: u2(1) = {u2_c_at_1} (long-time panel)");
    Ok(())
}

/// Caloric polynomials up to degree 4 with their names.
fn caloric() -> [(&'static str, fn(f64, f64) -> f64); 5] {
    [
        ("1", |_, _| 1.0),
        ("x", |x, _| x),
        ("x^2+2t", |x, t| x * x + 2.0 * t),
        ("x^3+6xt", |x, t| x.powi(3) + 6.0 * x * t),
        ("x^4+12x^2t+12t^2", |x, t| x.powi(4) + 12.0 * x * x * t + 12.0 * t * t),
    ]
}

pub fn meanvalue_demo(cfg: &Config) -> CliResult<()> {
    let x0 = cfg.f64_or("meanvalue.x0", 1.0)?;
    let t0 = cfg.f64_or("meanvalue.t0", 1.0)?;
    let r = cfg.f64_or("meanvalue.r", 0.5)?;
    ddchannel::meanvalue::ParabolicBall::new(x0, t0, r).map_err(invalid)?;
    let out = Output::new(cfg)?;
    let mut rows = Vec::new();
    println!("mean value over the parabolic ball at ({x0}, {t0}), r = {r}");
    for (deg, (name, u)) in caloric().iter().enumerate() {
        let v = mean_value(u, x0, t0, r)?;
        let exact = u(x0, t0);
        let rel = (v - exact).abs() / exact.abs().max(f64::MIN_POSITIVE);
        println!("  {name:<18} mean {v:<22} u(x0,t0) {exact:<22} rel.err {rel:.2e}");
        rows.push(vec![deg as f64, v, exact, rel]);
    }
    let not_caloric = mean_value(|x, _| x * x, x0, t0, r)?;
    println!("  x^2 (not caloric)  mean {not_caloric:<22} u(x0,t0) {}", x0 * x0);
    let c_bar = ball_measure(1.0)?;
    let mut w = out.create("meanvalue.dat")?;
    write_table(&mut w, &["degree", "mean", "exact", "rel_error"], &rows, out.delimiter)?;
    w.flush()?;
    out.manifest("meanvalue-demo", cfg, json!({ "c_bar": c_bar, "x0": x0, "t0": t0, "r": r }))?;
    println!("  |unit ball| = {c_bar}");
    Ok(())
}

fn check_json(name: &str, ok: bool, residual: f64, detail: String) -> Value {
    json!({ "name": name, "status": if ok { "pass" } else { "fail" }, "residual": residual, "detail": detail })
}

fn section(name: &str, checks: Vec<Value>) -> Value {
    let passed = checks.iter().all(|c| c["status"] != "fail");
    json!({ "name": name, "passed": passed, "checks": checks })
}

fn report_checks(r: &ddchannel::initial::Report) -> Vec<Value> {
    r.checks.iter().map(|c| serde_json::to_value(c).unwrap_or(Value::Null)).collect()
}

fn compatibility_section(cfg: &Config, eps: f64, tau: f64) -> CliResult<Value> {
    let base = base_profiles(cfg)?;
    let checks = match regularize_initial(&base, eps, tau) {
        Ok(reg) => {
            let mut c = report_checks(&regularized_property_report(&reg, eps, tau, 2001));
            c.extend(report_checks(&compatibility_report(&reg, eps, tau)));
            c
        }
        Err(e) => {
            let mut c = vec![check_json("regularize", false, f64::NAN, e.to_string())];
            c.extend(report_checks(&compatibility_report(&base, eps, tau)));
            c
        }
    };
    Ok(section("compatibility", checks))
}

fn orlicz_section(seed: u64, cases: usize) -> CliResult<Value> {
    let pair = YoungPair::default();
    let mut rng = StdRng::seed_from_u64(seed);
    let (mut p1, mut p2) = (0, 0);
    let (mut worst1, mut worst2) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for _ in 0..cases {
        let n = rng.random_range(10..200);
        let len = rng.random_range(0.01..3.0);
        let u = random_piecewise(&mut rng, n, len, 5.0)?;
        let v = random_piecewise(&mut rng, n, len, 3.0)?;
        let a = norm_control_check(&u, &pair.psi)?;
        let b = holder_check(&u, &v, &pair)?;
        p1 += a.ok as usize;
        p2 += b.ok as usize;
        worst1 = worst1.max(a.norm - a.bound);
        worst2 = worst2.max(b.lhs - b.rhs);
    }
    let mut checks = vec![
        check_json("norm_control", p1 == cases, worst1, format!("{p1}/{cases} cases")),
        check_json("holder", p2 == cases, worst2, format!("{p2}/{cases} cases")),
    ];
    for h in [0.1, 0.01, 0.001] {
        let k = luxemburg_norm(&SampledFn::new(0.0, h, vec![1.0; 50])?, &YoungFunction::PhiStar)?;
        let bound = -1.0 / f64::ln(h);
        checks.push(check_json(
            &format!("unit_norm_h{h}"),
            k <= bound,
            k - bound,
            format!("norm {k} vs -1/log h = {bound}"),
        ));
    }
    Ok(section("orlicz", checks))
}

fn random_piecewise(rng: &mut StdRng, n: usize, len: f64, amp: f64) -> ddchannel::Result<SampledFn> {
    let pieces = rng.random_range(1..=8);
    let levels: Vec<f64> = (0..pieces).map(|_| rng.random_range(-amp..amp)).collect();
    SampledFn::new(0.0, len, (0..n).map(|i| levels[i * pieces / n]).collect())
}

fn meanvalue_section() -> CliResult<Value> {
    let centers = [(0.5, 0.5, 0.1), (1.0, 1.0, 0.5), (2.0, 1.5, 1.0), (-0.7, 2.0, 0.3)];
    let mut checks = Vec::new();
    for (name, u) in caloric() {
        let mut worst: f64 = 0.0;
        for &(x0, t0, r) in &centers {
            let exact = u(x0, t0);
            worst = worst.max((mean_value(u, x0, t0, r)? - exact).abs() / exact.abs());
        }
        checks.push(check_json(&format!("caloric_{name}"), worst < 1e-3, worst, "max relative error".into()));
    }
    let ratio = ball_measure(1.0)? / ball_measure(0.5)?;
    checks.push(check_json("measure_scaling", (ratio - 8.0).abs() < 1e-6, ratio - 8.0, format!("ratio {ratio}")));
    Ok(section("meanvalue", checks))
}

pub fn validate(cfg: &Config) -> CliResult<()> {
    let tau = cfg.f64_or("solver.tau", 1.0)?;
    let eps = cfg.f64_or("solver.epsilon", 0.1)?;
    let seed = cfg.usize_or("validate.seed", 2024)? as u64;
    let cases = cfg.usize_or("validate.cases", 100)?;
    let out = Output::new(cfg)?;
    let phi = if tau == 0.0 {
        section("phi", vec![check_json("phi", true, 0.0, "tau = 0: phi is not used".into())])
    } else {
        section("phi", report_checks(&phi_property_report(tau, 1001).map_err(invalid)?))
    };
    let sections = vec![
        phi,
        compatibility_section(cfg, eps, tau)?,
        orlicz_section(seed, cases)?,
        meanvalue_section()?,
    ];
    let passed = sections.iter().all(|s| s["passed"] == true);
    let report = json!({ "passed": passed, "tau": tau, "epsilon": eps, "sections": sections });
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Run(e.to_string()))?;
    let mut w = out.create("validate.json")?;
    writeln!(w, "{text}")?;
    w.flush()?;
    out.manifest("validate", cfg, json!({ "passed": passed }))?;
    println!("{text}");
    if passed {
        Ok(())
    } else {
        let failed: Vec<&str> = sections
            .iter()
            .filter(|s| s["passed"] != true)
            .filter_map(|s| s["name"].as_str())
            .collect();
        Err(CliError::Run(format!("failing sections: {}", failed.join(", "))))
    }
}

