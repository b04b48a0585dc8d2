use thiserror::Error;

use crate::scan::config::ConfigError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator is not Hermitian (anti-Hermitian part {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("operator is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    NotPsd { eigenvalue: f64 },

    #[error("rotation axis must be a unit vector, got norm {norm}")]
    BadAxis { norm: f64 },

    #[error("invalid effect: |x| + |m| = {total} exceeds 1 (x = {x}, |m| = {eta})")]
    InvalidEffect { x: f64, eta: f64, total: f64 },

    #[error("requested times {requested} are not a subset of measured times {measured}")]
    BadSubset { requested: String, measured: String },

    #[error("schedule must measure at least one time")]
    EmptySchedule,

    #[error("joint distribution sums to {sum} (deviation above 1e-10)")]
    Normalization { sum: f64 },

    #[error("numerical invariant violated: {0}")]
    Invariant(String),

    #[error("no sign change of the violation margin on [{lo}, {hi}] (f(lo) = {f_lo:.3e}, f(hi) = {f_hi:.3e})")]
    NoBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("violation margin changes sign {crossings} times on the eta bracket")]
    NotMonotone { crossings: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
