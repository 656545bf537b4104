//! `H^s` distances between a 2-peakon profile and the collision function,
//! evaluated on the Fourier side.
//!
//! Norm convention: `||u||^2 = (1/2pi) int (1+xi^2)^s |u^(xi)|^2 dxi`, so a
//! combination `sum P_j e^{-|x-Q_j|}` has
//!
//! ```text
//! ||u||^2 = (4/pi) int_0^inf (1+xi^2)^{s-2} |sum_j P_j e^{-i xi Q_j}|^2 dxi
//! ```
//!
//! and `||c e^{-|x|}||^2_{H^1} = 2 c^2`. The integral converges iff `s < 3/2`.
//!
//! The modulus squared is `sum P_i^2 + sum_{i<j} 2 P_i P_j cos(d_ij xi)`.
//! Each cross term is integrated numerically up to `X_ij = max(200/|d_ij|, 20)`
//! and by an asymptotic integration-by-parts series beyond; the diagonal
//! part is integrated numerically up to `max(10^3, X_ij)` and by a binomial
//! series beyond.

use std::f64::consts::PI;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dynamics::PeakonState;
use crate::error::{Error, Result};
use crate::integrator::{EventKind, EventRecord, Trajectory};
use crate::quadrature::{integrate, Tolerance};
use crate::scalar::Real;

/// Absolute tolerance on a returned norm.
pub const NORM_TOL: f64 = 1e-10;
/// Start of the diagonal tail.
const DIAGONAL_TAIL_START: f64 = 1e3;
/// `|d| X` at which a cross term switches to its asymptotic tail.
const PAIR_TAIL_PRODUCT: f64 = 200.0;
const PAIR_TAIL_MIN: f64 = 20.0;
const MAX_SERIES_TERMS: usize = 80;

/// Single-peakon (or zero) profile `p* e^{-|x - q*|}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionFunction<T> {
    pub p_star: T,
    pub q_star: T,
}

impl<T: Real> CollisionFunction<T> {
    pub fn new(p_star: T, q_star: T) -> Self {
        Self { p_star, q_star }
    }

    /// `C = 0`; the position is irrelevant.
    pub fn zero(q_star: T) -> Self {
        Self { p_star: T::zero(), q_star }
    }

    pub fn is_zero(&self) -> bool {
        self.p_star == T::zero()
    }

    /// Reads `(p*, q*)` off a terminal event.
    ///
    /// * collision: `p* = p1 + p2`, `q* = q1`
    /// * `p_i -> 0`: `p* = p_j`, `q* = q_j`
    /// * both momenta `-> 0`: `C = 0` with `q* = q1`
    pub fn from_event(event: &EventRecord<T>) -> Result<Self> {
        let s = &event.state_at_event;
        let both = |other: EventKind| event.simultaneous.contains(&other);
        Ok(match event.kind {
            EventKind::Collision => Self::new(s.p1 + s.p2, s.q1),
            EventKind::MomentumZero1 if both(EventKind::MomentumZero2) => Self::zero(s.q1),
            EventKind::MomentumZero2 if both(EventKind::MomentumZero1) => Self::zero(s.q1),
            EventKind::MomentumZero1 => Self::new(s.p2, s.q2),
            EventKind::MomentumZero2 => Self::new(s.p1, s.q1),
            EventKind::Horizon => return Err(Error::NoCollision),
        })
    }

    pub fn evaluate(&self, x: T) -> T {
        self.p_star * (-(x - self.q_star).abs()).exp()
    }
}

/// The collision function of a trajectory that ended in a collision or a
/// vanishing momentum.
pub fn collision_function<T: Real>(traj: &Trajectory<T>) -> Result<CollisionFunction<T>> {
    CollisionFunction::from_event(traj.terminal_event())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevIndex<T> {
    pub s: T,
}

impl<T: Real> SobolevIndex<T> {
    pub fn new(s: T) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::InvalidConfig(format!("Sobolev index must be finite, got {s}")));
        }
        Ok(Self { s })
    }

    /// Whether peakon profiles have finite norm at this index.
    pub fn is_subcritical(&self) -> bool {
        self.s < T::lit(1.5)
    }
}

/// Amplitudes `P_j` at positions `Q_j` (shifted to a common reference),
/// with coincident positions merged and zero amplitudes dropped.
struct Spectrum<T> {
    amps: Vec<T>,
    pairs: Vec<(T, T)>,
    diag: T,
    total: T,
}

impl<T: Real> Spectrum<T> {
    fn new(state: &PeakonState<T>, c: &CollisionFunction<T>) -> Self {
        let reference = state.q1;
        let raw = [
            (state.p1, T::zero()),
            (state.p2, state.q2 - reference),
            (-c.p_star, c.q_star - reference),
        ];
        let mut amps: Vec<T> = Vec::new();
        let mut pos: Vec<T> = Vec::new();
        for (p, q) in raw {
            match pos.iter().position(|&x| x == q) {
                Some(i) => amps[i] = amps[i] + p,
                None => {
                    amps.push(p);
                    pos.push(q);
                }
            }
        }
        let keep: Vec<usize> = (0..amps.len()).filter(|&i| amps[i] != T::zero()).collect();
        let amps: Vec<T> = keep.iter().map(|&i| amps[i]).collect();
        let pos: Vec<T> = keep.iter().map(|&i| pos[i]).collect();
        let mut pairs = Vec::new();
        for i in 0..amps.len() {
            for j in i + 1..amps.len() {
                pairs.push((T::lit(2.0) * amps[i] * amps[j], (pos[i] - pos[j]).abs()));
            }
        }
        let diag = amps.iter().map(|&p| p * p).sum();
        let total = amps.iter().copied().sum();
        Self { amps, pairs, diag, total }
    }

    fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// `|A(xi)|^2` with every cross term present, written as
    /// `(sum P)^2 - sum 4 P_i P_j sin^2(d xi / 2)` so that near-cancelling
    /// configurations keep their relative accuracy.
    fn modulus_sq(&self, xi: T) -> T {
        let two = T::lit(2.0);
        let mut acc = self.total * self.total;
        for &(coef, d) in &self.pairs {
            let s = (T::lit(0.5) * d * xi).sin();
            acc = acc - two * coef * s * s;
        }
        acc
    }

    /// Diagonal plus the cross terms whose cutoff lies beyond `xi`.
    fn partial_modulus_sq(&self, xi: T, cutoffs: &[T]) -> T {
        let mut acc = self.diag;
        for (&(coef, d), &x) in self.pairs.iter().zip(cutoffs) {
            if xi < x {
                acc = acc + coef * (d * xi).cos();
            }
        }
        acc
    }
}

fn weight<T: Real>(s: T, xi: T) -> T {
    (s - T::lit(2.0)) * (xi * xi).ln_1p()
}

fn binomial<T: Real>(alpha: T, m: usize) -> T {
    let mut c = T::one();
    for l in 0..m {
        c = c * (alpha - T::from_count(l)) / T::from_count(l + 1);
    }
    c
}

/// `int_X^inf (1+xi^2)^{s-2} dxi` for `X >= 1`.
fn diagonal_tail<T: Real>(s: T, x: T) -> T {
    let beta = T::lit(2.0) * s - T::lit(4.0);
    let mut sum = T::zero();
    for m in 0..MAX_SERIES_TERMS {
        let e = beta - T::lit(2.0) * T::from_count(m) + T::one();
        let term = binomial(s - T::lit(2.0), m) * x.powf(e) / (-e);
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    sum
}

/// `Re int_X^inf xi^g e^{i d xi} dxi` for `g < 0`, `d X >> 1`, by repeated
/// integration by parts, truncated at the smallest term.
fn oscillatory_power_tail<T: Real>(g: T, d: T, x: T) -> T {
    let phase = Complex::new((d * x).cos(), (d * x).sin());
    let i = Complex::new(T::zero(), T::one());
    let mut factor = i;
    let mut poch = T::one();
    let mut sum = Complex::new(T::zero(), T::zero());
    let mut last_mag = T::infinity();
    for k in 0..MAX_SERIES_TERMS {
        let mag = poch.abs() * x.powf(g - T::from_count(k)) / d.powi(k as i32 + 1);
        if mag > last_mag {
            break;
        }
        let term = phase * factor * (poch * x.powf(g - T::from_count(k)) / d.powi(k as i32 + 1));
        sum = sum + term;
        if mag <= T::epsilon() * sum.norm() {
            break;
        }
        last_mag = mag;
        factor = factor * i;
        poch = poch * (g - T::from_count(k));
    }
    sum.re
}

/// `int_X^inf (1+xi^2)^{s-2} cos(d xi) dxi` for `X >= 20`.
fn pair_tail<T: Real>(s: T, d: T, x: T) -> T {
    let beta = T::lit(2.0) * s - T::lit(4.0);
    let mut sum = T::zero();
    for m in 0..MAX_SERIES_TERMS {
        let g = beta - T::lit(2.0) * T::from_count(m);
        let term = binomial(s - T::lit(2.0), m) * oscillatory_power_tail(g, d, x);
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs().max(x.powf(beta + T::one())) {
            break;
        }
    }
    sum
}

/// Breakpoints `0, 1, 10, 100, ...` up to and including `end`, plus `extra`.
fn breakpoints<T: Real>(end: T, extra: &[T]) -> Vec<T> {
    let mut pts = vec![T::zero()];
    let mut x = T::one();
    while x < end {
        pts.push(x);
        x = x * T::lit(10.0);
    }
    pts.push(end);
    pts.extend(extra.iter().copied().filter(|&v| v > T::zero() && v < end));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup();
    pts
}

/// `(value, error)` of `int` over consecutive breakpoints.
fn panels<T: Real, F: Fn(T) -> T>(f: F, pts: &[T], tol: Tolerance<T>) -> (T, T) {
    let mut value = T::zero();
    let mut error = T::zero();
    for w in pts.windows(2) {
        let r = integrate(&f, w[0], w[1], tol);
        value = value + r.value;
        error = error + r.error;
    }
    (value, error)
}

/// `||u - C||_{H^s}` for the 2-peakon `state`; requires `s < 3/2`.
pub fn hs_distance<T: Real>(state: &PeakonState<T>, c: &CollisionFunction<T>, s: SobolevIndex<T>) -> Result<T> {
    let s = s.s;
    if !(s < T::lit(1.5)) {
        return Err(Error::SobolevIndexTooLarge { s: s.to_f64().unwrap_or(f64::NAN) });
    }
    let spec = Spectrum::new(state, c);
    if spec.is_empty() {
        return Ok(T::zero());
    }
    let cutoffs: Vec<T> = spec
        .pairs
        .iter()
        .map(|&(_, d)| (T::lit(PAIR_TAIL_PRODUCT) / d).max(T::lit(PAIR_TAIL_MIN)))
        .collect();
    let xi_d = cutoffs.iter().copied().fold(T::lit(DIAGONAL_TAIL_START), T::max);
    let all_active = cutoffs.iter().copied().fold(T::infinity(), T::min);

    let integrand = |xi: T| {
        let m = if xi < all_active { spec.modulus_sq(xi) } else { spec.partial_modulus_sq(xi, &cutoffs) };
        m * weight(s, xi).exp()
    };
    let tol = Tolerance::new(T::lit(1e-22), T::lit(1e-11)).with_max_intervals(20_000);
    let (core, err) = panels(integrand, &breakpoints(xi_d, &cutoffs), tol);

    let mut tail = spec.diag * diagonal_tail(s, xi_d);
    for (&(coef, d), &x) in spec.pairs.iter().zip(&cutoffs) {
        tail = tail + coef * pair_tail(s, d, x);
    }
    let scale = T::lit(4.0 / PI);
    let sq = scale * (core + tail);
    let err = scale * err;
    let accept = T::lit(NORM_TOL * NORM_TOL).max(T::lit(2.0 * NORM_TOL) * sq.abs().sqrt());
    if !(err <= accept) || !sq.is_finite() {
        return Err(Error::QuadratureNotConverged {
            value: sq.to_f64().unwrap_or(f64::NAN),
            error: err.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(sq.max(T::zero()).sqrt())
}

/// `||u||_{H^s}`, the distance to `C = 0`.
pub fn hs_norm<T: Real>(state: &PeakonState<T>, s: SobolevIndex<T>) -> Result<T> {
    hs_distance(state, &CollisionFunction::zero(state.q1), s)
}

/// Truncated squared-norm integral `(2/pi) int_{|xi| <= cutoff}` of the
/// distance integrand. Accepts any `s`; for `s >= 3/2` it grows without
/// bound in the cutoff (like `cutoff^{2s-3}`, logarithmically at `3/2`).
pub fn divergence_probe<T: Real>(state: &PeakonState<T>, c: &CollisionFunction<T>, s: T, cutoff: T) -> Result<T> {
    if !(cutoff > T::zero()) {
        return Err(Error::InvalidConfig("cutoff must be positive".into()));
    }
    let spec = Spectrum::new(state, c);
    if spec.is_empty() {
        return Ok(T::zero());
    }
    let integrand = |xi: T| spec.modulus_sq(xi) * weight(s, xi).exp();
    let tol = Tolerance::new(T::lit(1e-22), T::lit(1e-11)).with_max_intervals(50_000);
    let (value, _) = panels(integrand, &breakpoints(cutoff, &[]), tol);
    Ok(T::lit(4.0 / PI) * value)
}
