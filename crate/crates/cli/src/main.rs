//! `ddchannel`: run, sweep and check the channel model from the command line.
//!
//! Exit status: 0 on success, 1 when a run or check fails, 2 for bad
//! configuration.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use toml::Value;

use config::{CliResult, Config, OUT_ENV};

#[derive(Parser)]
#[command(name = "ddchannel", version, about = "Signed dislocation densities in a channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate to solver.t_end, writing snapshots and entropy records.
    Simulate(Common),
    /// Drive to steady state and compare with the closed-form profile.
    Steady(Common),
    /// Run a decreasing list of epsilons and tabulate their distances.
    SweepEpsilon(Common),
    /// Deformed slab meshes before loading, on loading and in the long run.
    Mech(Common),
    /// Run the property suite and print a JSON report.
    Validate(Common),
    /// Mean values of caloric polynomials over a parabolic ball.
    MeanvalueDemo(Common),
}

#[derive(Args)]
struct Common {
    /// TOML file with dotted keys (grid.n_cells, solver.tau, ...).
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override any key, e.g. `--set solver.tau=1`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Shorthand for --set solver.tau=...
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<f64>,
    /// Shorthand for --set solver.epsilon=...
    #[arg(long)]
    epsilon: Option<f64>,
    /// Shorthand for --set solver.t_end=...
    #[arg(long)]
    t_end: Option<f64>,
    /// Shorthand for --set grid.n_cells=...
    #[arg(long)]
    n_cells: Option<i64>,
    /// Output directory; overrides the file and the environment.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// `space` or `comma`.
    #[arg(long)]
    delimiter: Option<String>,
}

impl Common {
    fn resolve(&self) -> CliResult<Config> {
        let mut cfg = match &self.config {
            Some(p) => Config::from_file(p)?,
            None => Config::default(),
        };
        if let Ok(dir) = std::env::var(OUT_ENV) {
            cfg.set("output.dir", Value::String(dir))?;
        }
        for (key, v) in [
            ("solver.tau", self.tau.map(Value::Float)),
            ("solver.epsilon", self.epsilon.map(Value::Float)),
            ("solver.t_end", self.t_end.map(Value::Float)),
            ("grid.n_cells", self.n_cells.map(Value::Integer)),
            ("output.dir", self.out.as_ref().map(|p| Value::String(p.display().to_string()))),
            ("output.delimiter", self.delimiter.clone().map(Value::String)),
        ] {
            if let Some(v) = v {
                cfg.set(key, v)?;
            }
        }
        for s in &self.set {
            cfg.set_assignment(s)?;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let (common, f): (&Common, fn(&Config) -> CliResult<()>) = match &cli.command {
        Command::Simulate(c) => (c, commands::simulate),
        Command::Steady(c) => (c, commands::steady),
        Command::SweepEpsilon(c) => (c, commands::sweep_epsilon),
        Command::Mech(c) => (c, commands::mech),
        Command::Validate(c) => (c, commands::validate),
        Command::MeanvalueDemo(c) => (c, commands::meanvalue_demo),
    };
    f(&common.resolve()?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ddchannel: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
