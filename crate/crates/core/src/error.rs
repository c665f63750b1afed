use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: cannot parse {text:?} as an event time")]
    Parse { line: usize, text: String },

    #[error("line {line}: event time {value} is not positive")]
    NonPositiveTime { line: usize, value: f64 },

    #[error("line {line}: event time {value} does not strictly increase on the previous one ({previous})")]
    NonMonotone { line: usize, value: f64, previous: f64 },

    #[error("horizon {horizon} precedes the last event time {last}")]
    HorizonTooShort { horizon: f64, last: f64 },

    #[error("time {t} outside the observation window [0, {horizon}]")]
    OutOfWindow { t: f64, horizon: f64 },

    #[error("model spec: {0}")]
    ModelSpec(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("need at least {required} {what}, got {got}")]
    TooFew { what: &'static str, required: usize, got: usize },

    #[error("quadrature on [{from}, {to}] did not reach the requested tolerance within {budget} evaluations")]
    Quadrature { from: f64, to: f64, budget: usize },

    #[error("thinning bound violated at t = {t}: intensity {rate} exceeds bound {bound}")]
    BoundViolation { t: f64, rate: f64, bound: f64 },

    #[error("intensity vanishes at event time {t}")]
    ZeroIntensity { t: f64 },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("optimizer did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("bisection bracket [{low}, {high}] does not contain the target")]
    Bracket { low: f64, high: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
