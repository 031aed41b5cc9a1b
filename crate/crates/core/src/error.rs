use thiserror::Error;

use crate::expr::{EvalError, ParseError};

#[derive(Debug, Error)]
pub enum Error {
    #[error("in `{slot}`: {source}")]
    Parse {
        slot: &'static str,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("boundary slope violates |gamma'| < a at t = {t}: gamma'(t) = {slope}, a = {a}")]
    SlopeViolation { t: f64, slope: f64, a: f64 },
    #[error("boundary curve reaches x = l at t = {t} (gamma(t) = {gamma}, l = {l})")]
    Intersection { t: f64, gamma: f64, l: f64 },
    #[error("boundary must start at the origin, got gamma(0) = {0}")]
    BoundaryOrigin(f64),
    #[error("characteristic inverse: {0}")]
    Precondition(String),
    #[error("no bracket for the characteristic inverse of {alpha} below t = {limit}")]
    NoBracket { alpha: f64, limit: f64 },
    #[error("root finding stopped with residual {residual:e} at t = {t}")]
    RootTolerance { t: f64, residual: f64 },
    #[error("partition stalled at break {index}: {detail}")]
    PartitionStall { index: usize, detail: String },
    #[error("quadrature did not reach {tol:e} on [{a}, {b}] (error estimate {estimate:e})")]
    Quadrature {
        a: f64,
        b: f64,
        estimate: f64,
        tol: f64,
    },
    #[error("ODE integration failed at z = {z}: {detail}")]
    Ode { z: f64, detail: String },
    #[error("point (t = {t}, x = {x}) lies outside the closed domain")]
    OutOfDomain { t: f64, x: f64 },
    #[error("time {t} exceeds the horizon {horizon}")]
    HorizonExceeded { t: f64, horizon: f64 },
    #[error("argument {z} outside the domain [{lo}, {hi}] of segment {index}")]
    SegmentDomain {
        index: usize,
        z: f64,
        lo: f64,
        hi: f64,
    },
    #[error("matching conditions fail (max |residual| = {max_residual:e}); the smooth part has no C2 solution")]
    MatchingFailed { max_residual: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
