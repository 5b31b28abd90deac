use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, got {got} ({what})")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("negative density {value:e} in cell {cell} ({field})")]
    NegativeDensity {
        field: &'static str,
        cell: usize,
        value: f64,
    },

    #[error("boundary condition violated: {0}")]
    Boundary(String),

    #[error("mass drift: {0}")]
    MassDrift(String),

    #[error("total density {value:e} below floor {floor:e} at face {face}")]
    DegenerateDensity { face: usize, value: f64, floor: f64 },

    #[error("non-finite value produced in cell {cell}")]
    NonFinite { cell: usize },

    #[error("step failed at t = {time}: {source}")]
    StepFailed {
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("no steady state reached before t = {max_time} (residual {residual:e})")]
    NotConverged { max_time: f64, residual: f64 },

    #[error("function is not in the Orlicz class numerically (integral {integral:e} at k = {k:e})")]
    NotInOrliczClass { k: f64, integral: f64 },

    #[error("shooting did not converge after {iterations} iterations (miss {miss:e})")]
    ShootingFailed { iterations: usize, miss: f64 },

    #[error("quadrature did not converge: estimate {estimate}, error bound {error_bound:e}")]
    Quadrature { estimate: f64, error_bound: f64 },

    #[error("point ({x}, {t}) lies outside the unit parabolic ball")]
    OutsideBall { x: f64, t: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}
