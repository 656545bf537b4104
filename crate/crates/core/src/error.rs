use thiserror::Error;

use crate::params::CaseId;

/// Errors raised by the peakon laboratory. Scalar payloads are widened to
/// `f64` so the type does not depend on the working precision.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a = 0: the nonuniqueness construction requires a != 0")]
    ZeroA,

    #[error("b = 2 is the degenerate case with frozen momenta; no initial profile is constructed")]
    DegenerateB,

    #[error("c = {c} is inadmissible for a = {a}: log argument {ratio} outside (0, 1)")]
    MuDomain { a: f64, c: f64, ratio: f64 },

    #[error("no admissible separation constant for a = {a}")]
    NoAdmissibleMu { a: f64 },

    #[error("{case:?} is inconsistent with (a, b) = ({a}, {b})")]
    InconsistentCase { case: CaseId, a: f64, b: f64 },

    #[error("invalid case specification: {0}")]
    InvalidSpec(String),

    #[error("orientation violated: q2 = {q2} < q1 = {q1}")]
    Orientation { q1: f64, q2: f64 },

    #[error("reduced state inconsistent: |p1 p2 - z| = {defect}")]
    ReducedInconsistent { defect: f64 },

    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("invalid integration config: {0}")]
    InvalidConfig(String),

    #[error("step size underflow at t = {t} (h = {h}); last good state (p1, p2, q1, q2) = {last:?}")]
    StepSizeUnderflow { t: f64, h: f64, last: [f64; 4] },

    #[error("step budget of {max_steps} exhausted at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("time {t} outside trajectory range [{start}, {end}]")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },

    #[error("quadrature did not converge: value {value}, error estimate {error}")]
    QuadratureNotConverged { value: f64, error: f64 },

    #[error("Sobolev index s = {s} >= 3/2: peakon profiles are not in H^s; use the divergence probe")]
    SobolevIndexTooLarge { s: f64 },

    #[error("trajectory ended at the horizon without collision or vanishing momentum")]
    NoCollision,

    #[error("x = {x} lies within {distance} of a peak (exclusion radius {radius})")]
    InsideExclusion { x: f64, distance: f64, radius: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
