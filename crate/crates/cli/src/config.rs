//! Flat run configuration: dotted keys from a TOML file, then the
//! `DDCHANNEL_OUT` environment variable, then command-line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use ddchannel::io::Delimiter;
use toml::Value;

/// Environment variable that overrides `output.dir`.
pub const OUT_ENV: &str = "DDCHANNEL_OUT";

/// Every key the tool understands.
pub const KNOWN_KEYS: &[&str] = &[
    "grid.n_cells",
    "solver.tau",
    "solver.epsilon",
    "solver.cfl",
    "solver.kappa_x_floor",
    "solver.t_end",
    "solver.steady_tol",
    "solver.max_time",
    "mech.mu",
    "mech.lambda",
    "mech.epsilon",
    "mech.rows",
    "mech.cols",
    "mech.height",
    "initial.family",
    "initial.amplitude",
    "initial.rho_file",
    "initial.kappa_file",
    "output.dir",
    "output.every",
    "output.times",
    "output.delimiter",
    "sweep.epsilons",
    "sweep.window",
    "meanvalue.x0",
    "meanvalue.t0",
    "meanvalue.r",
    "validate.seed",
    "validate.cases",
];

#[derive(Debug)]
pub enum CliError {
    /// Bad or missing configuration; exit status 2.
    Config(String),
    /// Anything that failed after the configuration was accepted; exit status 1.
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Run(m) => write!(f, "run failed: {m}"),
        }
    }
}

impl From<ddchannel::Error> for CliError {
    fn from(e: ddchannel::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(format!("i/o: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Turns a core error raised while checking inputs into a config error.
pub fn invalid(e: ddchannel::Error) -> CliError {
    CliError::Config(e.to_string())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, Value>,
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

/// Parses the right-hand side of `--set key=value` as a TOML value, falling
/// back to a bare string.
fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

impl Config {
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        let table: toml::Table = text.parse().map_err(|e| CliError::Config(format!("{e}")))?;
        let mut values = BTreeMap::new();
        flatten("", &table, &mut values);
        let c = Self { values };
        c.check_keys()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    fn check_keys(&self) -> CliResult<()> {
        match self.values.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            Some(k) => Err(CliError::Config(format!("unknown key '{k}'"))),
            None => Ok(()),
        }
    }

    pub fn set(&mut self, key: &str, value: Value) -> CliResult<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::Config(format!("unknown key '{key}'")));
        }
        self.values.insert(key.to_string(), value);
        Ok(())
    }

    /// Applies one `key=value` override.
    pub fn set_assignment(&mut self, assignment: &str) -> CliResult<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override '{assignment}' is not key=value")))?;
        self.set(k.trim(), parse_value(v.trim()))
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn missing(key: &str) -> CliError {
        CliError::Config(format!("missing required key '{key}'"))
    }

    fn wrong_type(key: &str, want: &str, v: &Value) -> CliError {
        CliError::Config(format!("key '{key}' must be {want}, got {v}"))
    }

    fn as_f64(key: &str, v: &Value) -> CliResult<f64> {
        match v {
            Value::Float(f) => Ok(*f),
            Value::Integer(i) => Ok(*i as f64),
            other => Err(Self::wrong_type(key, "a number", other)),
        }
    }

    pub fn f64(&self, key: &str) -> CliResult<f64> {
        let v = self.values.get(key).ok_or_else(|| Self::missing(key))?;
        Self::as_f64(key, v)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> CliResult<f64> {
        if self.contains(key) {
            self.f64(key)
        } else {
            Ok(default)
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> CliResult<usize> {
        match self.values.get(key) {
            None => Ok(default),
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            Some(other) => Err(Self::wrong_type(key, "a non-negative integer", other)),
        }
    }

    pub fn str_opt(&self, key: &str) -> CliResult<Option<&str>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(other) => Err(Self::wrong_type(key, "a string", other)),
        }
    }

    pub fn f64_list_opt(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Array(a)) => a.iter().map(|v| Self::as_f64(key, v)).collect::<CliResult<_>>().map(Some),
            Some(other) => Err(Self::wrong_type(key, "an array of numbers", other)),
        }
    }

    pub fn output_dir(&self) -> CliResult<PathBuf> {
        Ok(PathBuf::from(self.str_opt("output.dir")?.unwrap_or("ddchannel-out")))
    }

    pub fn delimiter(&self) -> CliResult<Delimiter> {
        self.str_opt("output.delimiter")?
            .unwrap_or("space")
            .parse()
            .map_err(invalid)
    }

    /// Resolved values as JSON, for the run manifest.
    pub fn to_json(&self) -> serde_json::Value {
        let map = self
            .values
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::to_value(v).unwrap_or(serde_json::Value::Null)))
            .collect();
        serde_json::Value::Object(map)
    }
}
