//! Signed dislocation densities θ± in the channel [-1, 1].
//!
//! The densities evolve by a conservative upwind scheme ([`solver`]); the
//! integrated profiles ρ (net, plastic strain) and κ (total) are recovered by
//! cumulative integration ([`state`]). Around that sit the admissible initial
//! data ([`initial`]), monitored inequalities ([`diagnostics`]), Orlicz-norm
//! tools ([`orlicz`]), the slab displacement ([`mechanics`]) and a mean-value
//! formula for the heat equation ([`meanvalue`]).
//!
//! ```
//! use ddchannel::{initial, solver, state};
//!
//! let grid = state::build_grid(100)?;
//! let data = initial::regularize_initial(&initial::default_profiles(0.1)?, 0.1, 1.0)?;
//! let config = solver::SolverConfig::new(1.0, 0.1, 0.1);
//! let traj = solver::run_until(&data.densities(&grid)?, &config, &[0.05, 0.1])?;
//! let (plus, minus) = traj.last().unwrap().masses();
//! assert!((plus - 1.0).abs() < 1e-8 && (minus - 1.0).abs() < 1e-8);
//! # Ok::<(), ddchannel::Error>(())
//! ```

pub mod diagnostics;
pub mod error;
pub mod initial;
pub mod io;
pub mod meanvalue;
pub mod mechanics;
pub mod orlicz;
pub mod solver;
pub mod state;

pub use error::{Error, Result};
pub use initial::{default_profiles, regularize_initial, InitialProfiles};
pub use solver::{cfl_dt, run_to_steady, run_until, step, wall_flux, SolverConfig, Trajectory};
pub use state::{build_grid, derive_densities, reconstruct_profiles, ChannelState, DensityPair, Grid};
