use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge after {refinements} refinements (last estimates {previous} and {last})")]
    NonConvergence {
        refinements: usize,
        previous: f64,
        last: f64,
    },

    #[error("taylor coefficient {requested} is beyond reliable precision (estimated error {achieved:e})")]
    CoefficientPrecision { requested: usize, achieved: f64 },

    #[error("coefficient tail not summable below {target:e} with {terms} terms (tail estimate {tail:e})")]
    TailNotSummable { terms: usize, tail: f64, target: f64 },

    #[error("functional integral diverges: {0}")]
    Divergent(String),

    #[error("zero function cannot be normalized")]
    ZeroFunction,

    #[error("degenerate level curve at t = {t}: try a nearby level (e.g. {suggestion})")]
    DegenerateContour { t: f64, suggestion: f64 },

    #[error("line average did not settle over the T schedule: {trend:?}")]
    LineAverageNonConvergence { trend: Vec<(f64, f64)> },

    #[error("Bohr lift needs {primes} prime variables, at most {cap} are supported")]
    DimensionCap { primes: usize, cap: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
