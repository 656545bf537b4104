//! Adaptive Dormand-Prince 5(4) integration of the peakon systems with
//! dense output and terminal events.
//!
//! Three event functions are watched on every accepted step: the separation
//! `q = q2 - q1` (collision, `T^c`) and the two momenta (`T^p`). The first
//! crossing is bracketed on the dense output, bisected to `event_tol`, then
//! polished with Newton iterations on the exact one-step map so that the
//! terminal state itself satisfies `|g| <= event_tol`. Integration stops
//! there: what happens after `T = min(T^c, T^p)` is not unique, and
//! continuing is left to the caller.

use serde::{Deserialize, Serialize};

use crate::dynamics::{full_rhs, reduced_q1_rate, reduced_rhs, PeakonState, ReducedState};
use crate::error::{Error, Result};
use crate::params::{ABParams, CaseSpec};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    /// `(p1, p2, q1, q2)`
    Full,
    /// `(q, h, w, z)` plus `q1` to fix the absolute position.
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    /// Time-reversed field; trajectory times count elapsed reversed time.
    Reversed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    /// `q = 0`
    Collision,
    /// `p1 = 0`
    MomentumZero1,
    /// `p2 = 0`
    MomentumZero2,
    /// `max_time` reached without any other event.
    Horizon,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Collision => "collision",
            EventKind::MomentumZero1 => "momentum_zero_1",
            EventKind::MomentumZero2 => "momentum_zero_2",
            EventKind::Horizon => "horizon",
        }
    }

    fn from_index(i: usize) -> Self {
        match i {
            0 => EventKind::Collision,
            1 => EventKind::MomentumZero1,
            _ => EventKind::MomentumZero2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord<T> {
    pub kind: EventKind,
    pub time: T,
    pub state_at_event: PeakonState<T>,
    /// Other event functions within `event_tol` of zero at the same state.
    pub simultaneous: Vec<EventKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_time: T,
    pub event_tol: T,
    pub representation: Representation,
    pub max_steps: usize,
}

impl<T: Real> Default for IntegrationConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-10),
            abs_tol: T::lit(1e-12),
            max_time: T::lit(100.0),
            event_tol: T::lit(1e-12),
            representation: Representation::Full,
            max_steps: 1_000_000,
        }
    }
}

impl<T: Real> IntegrationConfig<T> {
    /// Default config with the horizon set to `10 mu / eps`.
    pub fn for_case(spec: &CaseSpec<T>, params: &ABParams<T>) -> Self {
        Self { max_time: T::lit(10.0) * spec.time_bound(params), ..Self::default() }
    }

    pub fn with_representation(mut self, representation: Representation) -> Self {
        self.representation = representation;
        self
    }

    pub fn with_tolerances(mut self, rel_tol: T, abs_tol: T) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_time(mut self, max_time: T) -> Self {
        self.max_time = max_time;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: T| v > T::zero() && v.is_finite();
        if !positive(self.rel_tol) || !positive(self.abs_tol) || !positive(self.event_tol) {
            return Err(Error::InvalidConfig("tolerances must be positive and finite".into()));
        }
        if !positive(self.max_time) {
            return Err(Error::InvalidConfig("max_time must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be positive".into()));
        }
        Ok(())
    }
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 0.2;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
/// Fifth minus fourth order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
/// Dense output weights.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

/// Interior samples used to catch a double crossing inside one step.
const INTERIOR_PROBES: [f64; 3] = [0.25, 0.5, 0.75];

/// Continuous extension of one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DenseStep<T, const N: usize> {
    pub t0: T,
    pub h: T,
    rc: [[T; N]; 5],
}

impl<T: Real, const N: usize> DenseStep<T, N> {
    pub fn eval(&self, theta: T) -> [T; N] {
        let one = T::one();
        let th1 = one - theta;
        std::array::from_fn(|i| {
            let r = &self.rc;
            r[0][i] + theta * (r[1][i] + th1 * (r[2][i] + theta * (r[3][i] + th1 * r[4][i])))
        })
    }

    /// Time derivative of the interpolant.
    pub fn derivative(&self, theta: T) -> [T; N] {
        let one = T::one();
        let th1 = one - theta;
        std::array::from_fn(|i| {
            let r = &self.rc;
            let a = r[3][i] + th1 * r[4][i];
            let da = -r[4][i];
            let b = r[2][i] + theta * a;
            let db = a + theta * da;
            let c = r[1][i] + th1 * b;
            let dc = -b + th1 * db;
            (c + theta * dc) / self.h
        })
    }

    pub fn t1(&self) -> T {
        self.t0 + self.h
    }
}

#[inline]
fn axpy<T: Real, const N: usize>(y: &[T; N], h: T, terms: &[(f64, &[T; N])]) -> [T; N] {
    std::array::from_fn(|i| {
        let mut acc = T::zero();
        for (c, k) in terms {
            if *c != 0.0 {
                acc = acc + T::lit(*c) * k[i];
            }
        }
        y[i] + h * acc
    })
}

struct StepResult<T, const N: usize> {
    y1: [T; N],
    k7: [T; N],
    err: T,
    dense: DenseStep<T, N>,
}

fn dopri_step<T: Real, const N: usize, F: Fn(&[T; N]) -> [T; N]>(
    f: &F,
    t0: T,
    y0: &[T; N],
    k1: &[T; N],
    h: T,
    rel_tol: T,
    abs_tol: T,
) -> StepResult<T, N> {
    let k2 = f(&axpy(y0, h, &[(A21, k1)]));
    let k3 = f(&axpy(y0, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(&axpy(y0, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(&axpy(y0, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(&axpy(y0, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y1 = axpy(y0, h, &[(B[0], k1), (B[2], &k3), (B[3], &k4), (B[4], &k5), (B[5], &k6)]);
    let k7 = f(&y1);
    let ks = [k1, &k2, &k3, &k4, &k5, &k6, &k7];

    let mut sum = T::zero();
    for i in 0..N {
        let mut e = T::zero();
        for (j, k) in ks.iter().enumerate() {
            e = e + T::lit(E[j]) * k[i];
        }
        let sk = abs_tol + rel_tol * y0[i].abs().max(y1[i].abs());
        let r = h * e / sk;
        sum = sum + r * r;
    }
    let err = (sum / T::from_count(N)).sqrt();

    let mut rc = [[T::zero(); N]; 5];
    for i in 0..N {
        let ydiff = y1[i] - y0[i];
        let bspl = h * k1[i] - ydiff;
        let mut d = T::zero();
        for (j, k) in ks.iter().enumerate() {
            d = d + T::lit(D[j]) * k[i];
        }
        rc[0][i] = y0[i];
        rc[1][i] = ydiff;
        rc[2][i] = bspl;
        rc[3][i] = ydiff - h * k7[i] - bspl;
        rc[4][i] = h * d;
    }
    StepResult { y1, k7, err, dense: DenseStep { t0, h, rc } }
}

fn scaled_norm<T: Real, const N: usize>(v: &[T; N], y: &[T; N], rel_tol: T, abs_tol: T) -> T {
    let mut sum = T::zero();
    for i in 0..N {
        let r = v[i] / (abs_tol + rel_tol * y[i].abs());
        sum = sum + r * r;
    }
    (sum / T::from_count(N)).sqrt()
}

fn initial_step<T: Real, const N: usize, F: Fn(&[T; N]) -> [T; N]>(
    f: &F,
    y0: &[T; N],
    f0: &[T; N],
    hmax: T,
    rel_tol: T,
    abs_tol: T,
) -> T {
    let d0 = scaled_norm(y0, y0, rel_tol, abs_tol);
    let d1 = scaled_norm(f0, y0, rel_tol, abs_tol);
    let small = T::lit(1e-5);
    let mut h0 = if d0 < small || d1 < small { T::lit(1e-6) } else { T::lit(0.01) * d0 / d1 };
    h0 = h0.min(hmax);
    let y1 = axpy(y0, h0, &[(1.0, f0)]);
    let f1 = f(&y1);
    let diff: [T; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = scaled_norm(&diff, y0, rel_tol, abs_tol) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / dmax).powf(T::lit(0.2))
    };
    (T::lit(100.0) * h0).min(h1).min(hmax)
}

/// Which event functions can fire and in which sense.
#[derive(Debug, Clone, Copy)]
struct EventGate {
    active: [bool; 3],
}

impl EventGate {
    /// Collision fires on a descent to `q <= 0`; a momentum fires on a sign
    /// change, and only if it starts nonzero (a vanished peak stays vanished).
    fn new<T: Real>(g0: &[T; 3]) -> Self {
        Self { active: [true, g0[1] != T::zero(), g0[2] != T::zero()] }
    }

    fn crossed<T: Real>(&self, i: usize, ga: T, gb: T) -> bool {
        if !self.active[i] {
            return false;
        }
        if i == 0 {
            ga > T::zero() && gb <= T::zero()
        } else {
            ga.sgn() != T::zero() && gb * ga.sgn() <= T::zero()
        }
    }
}

pub(crate) struct RawEvent<T, const N: usize> {
    pub kind: EventKind,
    pub t: T,
    pub y: [T; N],
    pub simultaneous: Vec<EventKind>,
}

pub(crate) struct RawRun<T, const N: usize> {
    pub times: Vec<T>,
    pub ys: Vec<[T; N]>,
    pub steps: Vec<DenseStep<T, N>>,
    pub event: RawEvent<T, N>,
}

/// Integrates the autonomous field `f` from `y0` at `t = 0` to the first
/// event. `g` must be linear in the state, so `g(f(y))` is its time
/// derivative.
fn run<T, const N: usize, F, G, P>(
    f: &F,
    g: &G,
    to_peakon: &P,
    y0: [T; N],
    cfg: &IntegrationConfig<T>,
) -> Result<RawRun<T, N>>
where
    T: Real,
    F: Fn(&[T; N]) -> [T; N],
    G: Fn(&[T; N]) -> [T; 3],
    P: Fn(&[T; N]) -> PeakonState<T>,
{
    let t_end = cfg.max_time;
    let mut times = vec![T::zero()];
    let mut ys = vec![y0];
    let mut steps: Vec<DenseStep<T, N>> = Vec::new();

    let g0 = g(&y0);
    if g0[0] <= T::zero() {
        let simultaneous = (1..3).filter(|&i| g0[i].abs() <= cfg.event_tol).map(EventKind::from_index).collect();
        return Ok(RawRun {
            times,
            ys,
            steps,
            event: RawEvent { kind: EventKind::Collision, t: T::zero(), y: y0, simultaneous },
        });
    }
    let gate = EventGate::new(&g0);

    let mut t = T::zero();
    let mut y = y0;
    let mut k1 = f(&y);
    let mut h = initial_step(f, &y, &k1, t_end, cfg.rel_tol, cfg.abs_tol);
    let mut err_old = T::lit(1e-4);
    let mut rejected_last = false;
    let mut n_steps = 0usize;
    let expo = T::lit(0.2 - BETA * 0.75);

    loop {
        if n_steps >= cfg.max_steps {
            return Err(Error::TooManySteps { t: t.to_f64().unwrap_or(f64::NAN), max_steps: cfg.max_steps });
        }
        n_steps += 1;
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        if h <= T::lit(16.0) * T::epsilon() * t.abs().max(T::one()) {
            return Err(Error::StepSizeUnderflow {
                t: t.to_f64().unwrap_or(f64::NAN),
                h: h.to_f64().unwrap_or(f64::NAN),
                last: to_peakon(&y).widen(),
            });
        }
        let step = dopri_step(f, t, &y, &k1, h, cfg.rel_tol, cfg.abs_tol);
        let finite = step.y1.iter().chain(step.k7.iter()).all(|v| v.is_finite());
        let err = if finite && step.err.is_finite() { step.err } else { T::lit(1e10) };

        if err > T::one() {
            let fac = err.powf(expo) / T::lit(SAFETY);
            let shrink = if finite { fac.min(T::one() / T::lit(FAC_MIN)) } else { T::lit(10.0) };
            h = h / shrink;
            rejected_last = true;
            continue;
        }

        // Accepted. Scan the step for event crossings.
        let gb = g(&step.y1);
        let ga = g(&y);
        if let Some(ev) = first_crossing(&gate, &step.dense, &ga, &gb, g, cfg) {
            let (kind, theta) = ev;
            let (t_ev, y_ev, dense) = polish(f, g, kind, t, &y, &k1, theta * h, h, cfg);
            let ge = g(&y_ev);
            let simultaneous = (0..3)
                .filter(|&i| EventKind::from_index(i) != kind && gate.active[i] && ge[i].abs() <= cfg.event_tol)
                .map(EventKind::from_index)
                .collect();
            if t_ev > t {
                times.push(t_ev);
                ys.push(y_ev);
                steps.push(dense);
            } else if let Some(last) = ys.last_mut() {
                *last = y_ev;
            }
            return Ok(RawRun { times, ys, steps, event: RawEvent { kind, t: t_ev, y: y_ev, simultaneous } });
        }

        t = if last { t_end } else { t + h };
        y = step.y1;
        k1 = step.k7;
        times.push(t);
        ys.push(y);
        steps.push(step.dense);
        if last {
            return Ok(RawRun {
                times,
                ys,
                steps,
                event: RawEvent { kind: EventKind::Horizon, t, y, simultaneous: Vec::new() },
            });
        }

        let fac11 = err.powf(expo);
        let mut fac = fac11 / err_old.powf(T::lit(BETA));
        fac = (fac / T::lit(SAFETY)).max(T::one() / T::lit(FAC_MAX)).min(T::one() / T::lit(FAC_MIN));
        let mut h_new = h / fac;
        if rejected_last {
            h_new = h_new.min(h);
        }
        err_old = err.max(T::lit(1e-4));
        rejected_last = false;
        h = h_new;
    }
}

/// Earliest crossing within the step as `(kind, theta)`.
fn first_crossing<T, const N: usize, G>(
    gate: &EventGate,
    dense: &DenseStep<T, N>,
    ga: &[T; 3],
    gb: &[T; 3],
    g: &G,
    cfg: &IntegrationConfig<T>,
) -> Option<(EventKind, T)>
where
    T: Real,
    G: Fn(&[T; N]) -> [T; 3],
{
    // Sample the step at the endpoints and a few interior points so a pair of
    // crossings inside one step is not missed.
    let mut thetas = vec![T::zero()];
    thetas.extend(INTERIOR_PROBES.iter().map(|&v| T::lit(v)));
    thetas.push(T::one());
    let mut samples: Vec<[T; 3]> = Vec::with_capacity(thetas.len());
    samples.push(*ga);
    for &th in &thetas[1..thetas.len() - 1] {
        samples.push(g(&dense.eval(th)));
    }
    samples.push(*gb);

    let mut best: Option<(EventKind, T)> = None;
    for i in 0..3 {
        let bracket = (0..thetas.len() - 1).find(|&j| gate.crossed(i, samples[j][i], samples[j + 1][i]));
        let Some(j) = bracket else { continue };
        let theta = bisect(|th| g(&dense.eval(th))[i], thetas[j], thetas[j + 1], samples[j][i], cfg.event_tol);
        if best.is_none_or(|(_, b)| theta < b) {
            best = Some((EventKind::from_index(i), theta));
        }
    }
    best
}

/// Bisection for a sign change of `g` on `[lo, hi]` given `g(lo) = g_lo`.
fn bisect<T: Real, G: Fn(T) -> T>(g: G, mut lo: T, mut hi: T, g_lo: T, tol: T) -> T {
    let s_lo = g_lo.sgn();
    for _ in 0..200 {
        let mid = T::lit(0.5) * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        let gm = g(mid);
        if gm.abs() <= tol {
            return mid;
        }
        if gm.sgn() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Refines the event time with Newton iterations on the exact step map
/// `tau -> y(t + tau)`, starting from the dense-output estimate.
#[allow(clippy::too_many_arguments)]
fn polish<T, const N: usize, F, G>(
    f: &F,
    g: &G,
    kind: EventKind,
    t: T,
    y: &[T; N],
    k1: &[T; N],
    tau0: T,
    h_max: T,
    cfg: &IntegrationConfig<T>,
) -> (T, [T; N], DenseStep<T, N>)
where
    T: Real,
    F: Fn(&[T; N]) -> [T; N],
    G: Fn(&[T; N]) -> [T; 3],
{
    let idx = match kind {
        EventKind::Collision => 0,
        EventKind::MomentumZero1 => 1,
        _ => 2,
    };
    let mut tau = tau0.max(T::zero()).min(h_max);
    let mut best: Option<(T, T, [T; N], DenseStep<T, N>)> = None;
    for _ in 0..12 {
        if tau <= T::zero() {
            break;
        }
        let step = dopri_step(f, t, y, k1, tau, cfg.rel_tol, cfg.abs_tol);
        let gv = g(&step.y1)[idx];
        let better = best.as_ref().is_none_or(|(_, gb, _, _)| gv.abs() < *gb);
        if better {
            best = Some((tau, gv.abs(), step.y1, step.dense.clone()));
        }
        if gv.abs() <= cfg.event_tol {
            break;
        }
        let slope = g(&step.k7)[idx];
        if slope == T::zero() || !slope.is_finite() {
            break;
        }
        let next = tau - gv / slope;
        if !(next > T::zero()) || next > h_max * T::lit(1.5) {
            break;
        }
        tau = next;
    }
    match best {
        Some((tau, _, y1, dense)) => (t + tau, y1, dense),
        None => (t, *y, DenseStep { t0: t, h: T::zero(), rc: [*y; 5].map(|_| [T::zero(); N]) }),
    }
}

/// Dense output of either representation.
#[derive(Debug, Clone, PartialEq)]
enum DenseOutput<T> {
    Full(Vec<DenseStep<T, 4>>),
    Reduced(Vec<DenseStep<T, 5>>),
}

fn find_step<T: Real, const N: usize>(steps: &[DenseStep<T, N>], t: T) -> Option<&DenseStep<T, N>> {
    let idx = steps.partition_point(|s| s.t1() < t);
    steps.get(idx.min(steps.len().saturating_sub(1)))
}

fn theta_of<T: Real, const N: usize>(step: &DenseStep<T, N>, t: T) -> T {
    if step.h == T::zero() {
        T::zero()
    } else {
        ((t - step.t0) / step.h).max(T::zero()).min(T::one())
    }
}

fn reduced_to_peakon<T: Real>(y: &[T; 5]) -> PeakonState<T> {
    let half = T::lit(0.5);
    PeakonState { p1: half * (y[2] - y[1]), p2: half * (y[2] + y[1]), q1: y[4], q2: y[4] + y[0] }
}

/// Time-stamped states from one integration, its terminal event and a
/// continuous interpolant over the whole interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    params: ABParams<T>,
    representation: Representation,
    direction: Direction,
    times: Vec<T>,
    states: Vec<PeakonState<T>>,
    reduced: Vec<ReducedState<T>>,
    events: Vec<EventRecord<T>>,
    dense: DenseOutput<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn params(&self) -> &ABParams<T> {
        &self.params
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Accepted step times, strictly increasing from 0.
    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn states(&self) -> &[PeakonState<T>] {
        &self.states
    }

    /// Reduced states at the step times. For a reduced integration `z` is
    /// the integrated value, not `p1 p2`.
    pub fn reduced_states(&self) -> &[ReducedState<T>] {
        &self.reduced
    }

    pub fn events(&self) -> &[EventRecord<T>] {
        &self.events
    }

    pub fn terminal_event(&self) -> &EventRecord<T> {
        self.events.last().expect("trajectory always carries a terminal event")
    }

    pub fn end_time(&self) -> T {
        *self.times.last().expect("trajectory has at least one point")
    }

    pub fn initial_state(&self) -> &PeakonState<T> {
        &self.states[0]
    }

    pub fn final_state(&self) -> &PeakonState<T> {
        self.states.last().expect("trajectory has at least one point")
    }

    fn check_time(&self, t: T) -> Result<()> {
        let end = self.end_time();
        if !(t >= T::zero() && t <= end) {
            return Err(Error::TimeOutOfRange {
                t: t.to_f64().unwrap_or(f64::NAN),
                start: 0.0,
                end: end.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }

    /// Interpolated state at time `t` in `[0, end_time]`.
    pub fn state_at(&self, t: T) -> Result<PeakonState<T>> {
        self.check_time(t)?;
        if t == self.end_time() {
            return Ok(*self.final_state());
        }
        Ok(match &self.dense {
            DenseOutput::Full(steps) => match find_step(steps, t) {
                Some(s) => PeakonState::from_array(s.eval(theta_of(s, t))),
                None => self.states[0],
            },
            DenseOutput::Reduced(steps) => match find_step(steps, t) {
                Some(s) => reduced_to_peakon(&s.eval(theta_of(s, t))),
                None => self.states[0],
            },
        })
    }

    /// Interpolated reduced state at time `t`.
    pub fn reduced_at(&self, t: T) -> Result<ReducedState<T>> {
        self.check_time(t)?;
        if t == self.end_time() {
            return Ok(*self.reduced.last().expect("non-empty"));
        }
        Ok(match &self.dense {
            DenseOutput::Full(_) => self.state_at(t)?.to_reduced_unchecked(),
            DenseOutput::Reduced(steps) => match find_step(steps, t) {
                Some(s) => {
                    let y = s.eval(theta_of(s, t));
                    ReducedState { q: y[0], h: y[1], w: y[2], z: y[3] }
                }
                None => self.reduced[0],
            },
        })
    }

    /// Derivative of the interpolant at `t` (with respect to the trajectory's
    /// own time variable).
    pub fn velocity_at(&self, t: T) -> Result<PeakonState<T>> {
        self.check_time(t)?;
        let half = T::lit(0.5);
        Ok(match &self.dense {
            DenseOutput::Full(steps) => match find_step(steps, t) {
                Some(s) => PeakonState::from_array(s.derivative(theta_of(s, t))),
                None => PeakonState::default(),
            },
            DenseOutput::Reduced(steps) => match find_step(steps, t) {
                Some(s) => {
                    let d = s.derivative(theta_of(s, t));
                    PeakonState { p1: half * (d[2] - d[1]), p2: half * (d[2] + d[1]), q1: d[4], q2: d[4] + d[0] }
                }
                None => PeakonState::default(),
            },
        })
    }

    /// The first collision event, if the run ended in one.
    pub fn locate_collision(&self) -> Option<&EventRecord<T>> {
        self.events.iter().find(|e| e.kind == EventKind::Collision)
    }

    /// Largest `|p1|`, `|p2|`, `|h|`, `|w|`, `|z|` over the step states.
    pub fn maxima(&self) -> [T; 5] {
        let mut m = [T::zero(); 5];
        for (s, r) in self.states.iter().zip(&self.reduced) {
            let v = [s.p1, s.p2, r.h, r.w, r.z];
            for i in 0..5 {
                m[i] = m[i].max(v[i].abs());
            }
        }
        m
    }
}

fn assemble_full<T: Real>(
    params: ABParams<T>,
    direction: Direction,
    raw: RawRun<T, 4>,
) -> Trajectory<T> {
    let states: Vec<_> = raw.ys.iter().map(|y| PeakonState::from_array(*y)).collect();
    let reduced = states.iter().map(|s| s.to_reduced_unchecked()).collect();
    let event = EventRecord {
        kind: raw.event.kind,
        time: raw.event.t,
        state_at_event: PeakonState::from_array(raw.event.y),
        simultaneous: raw.event.simultaneous,
    };
    Trajectory {
        params,
        representation: Representation::Full,
        direction,
        times: raw.times,
        states,
        reduced,
        events: vec![event],
        dense: DenseOutput::Full(raw.steps),
    }
}

fn assemble_reduced<T: Real>(
    params: ABParams<T>,
    direction: Direction,
    raw: RawRun<T, 5>,
) -> Trajectory<T> {
    let states = raw.ys.iter().map(reduced_to_peakon).collect();
    let reduced = raw.ys.iter().map(|y| ReducedState { q: y[0], h: y[1], w: y[2], z: y[3] }).collect();
    let event = EventRecord {
        kind: raw.event.kind,
        time: raw.event.t,
        state_at_event: reduced_to_peakon(&raw.event.y),
        simultaneous: raw.event.simultaneous,
    };
    Trajectory {
        params,
        representation: Representation::Reduced,
        direction,
        times: raw.times,
        states,
        reduced,
        events: vec![event],
        dense: DenseOutput::Reduced(raw.steps),
    }
}

fn run_directed<T: Real>(
    initial: &PeakonState<T>,
    params: &ABParams<T>,
    cfg: &IntegrationConfig<T>,
    direction: Direction,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    if !initial.is_finite() {
        return Err(Error::NonFinite { t: 0.0 });
    }
    if initial.q2 < initial.q1 {
        return Err(Error::Orientation {
            q1: initial.q1.to_f64().unwrap_or(f64::NAN),
            q2: initial.q2.to_f64().unwrap_or(f64::NAN),
        });
    }
    let sign = match direction {
        Direction::Forward => T::one(),
        Direction::Reversed => -T::one(),
    };
    let p = *params;
    match cfg.representation {
        Representation::Full => {
            let f = |y: &[T; 4]| {
                let d = full_rhs(&PeakonState::from_array(*y), &p);
                d.to_array().map(|v| sign * v)
            };
            let g = |y: &[T; 4]| [y[3] - y[2], y[0], y[1]];
            let raw = run(&f, &g, &|y: &[T; 4]| PeakonState::from_array(*y), initial.to_array(), cfg)?;
            Ok(assemble_full(p, direction, raw))
        }
        Representation::Reduced => {
            let r = initial.to_reduced()?;
            let f = |y: &[T; 5]| {
                let rs = ReducedState { q: y[0], h: y[1], w: y[2], z: y[3] };
                let d = reduced_rhs(&rs, &p);
                let dq1 = reduced_q1_rate(&rs, &p);
                [d.q, d.h, d.w, d.z, dq1].map(|v| sign * v)
            };
            let half = T::lit(0.5);
            let g = move |y: &[T; 5]| [y[0], half * (y[2] - y[1]), half * (y[2] + y[1])];
            let raw = run(&f, &g, &reduced_to_peakon, [r.q, r.h, r.w, r.z, initial.q1], cfg)?;
            Ok(assemble_reduced(p, direction, raw))
        }
    }
}

/// Integrates forward until a collision, a vanishing momentum, or
/// `cfg.max_time`.
pub fn integrate<T: Real>(
    initial: &PeakonState<T>,
    params: &ABParams<T>,
    cfg: &IntegrationConfig<T>,
) -> Result<Trajectory<T>> {
    run_directed(initial, params, cfg, Direction::Forward)
}

/// Integrates the time-reversed field for `duration` (events stay armed).
/// The returned times count elapsed reversed time, so `state_at(s)` is the
/// state at physical time `t_from - s`.
pub fn integrate_reversed<T: Real>(
    from: &PeakonState<T>,
    params: &ABParams<T>,
    cfg: &IntegrationConfig<T>,
    duration: T,
) -> Result<Trajectory<T>> {
    if duration == T::zero() {
        let reduced = from.to_reduced()?;
        return Ok(Trajectory {
            params: *params,
            representation: cfg.representation,
            direction: Direction::Reversed,
            times: vec![T::zero()],
            states: vec![*from],
            reduced: vec![reduced],
            events: vec![EventRecord {
                kind: EventKind::Horizon,
                time: T::zero(),
                state_at_event: *from,
                simultaneous: Vec::new(),
            }],
            dense: DenseOutput::Full(Vec::new()),
        });
    }
    if !(duration > T::zero()) {
        return Err(Error::InvalidConfig("reversal duration must be non-negative".into()));
    }
    let cfg = IntegrationConfig { max_time: duration, ..*cfg };
    run_directed(from, params, &cfg, Direction::Reversed)
}

/// The first collision event of `traj`, if any.
pub fn locate_collision<T: Real>(traj: &Trajectory<T>) -> Option<EventRecord<T>> {
    traj.locate_collision().cloned()
}

#[cfg(test)]
mod tests {
    use super::*;

    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

    #[test]
    fn tableau_order_conditions() {
        let sum_b: f64 = B.iter().sum();
        assert!((sum_b - 1.0).abs() < 1e-15);
        let bc: f64 = B.iter().zip(C.iter()).map(|(b, c)| b * c).sum();
        assert!((bc - 0.5).abs() < 1e-15);
        let bc2: f64 = B.iter().zip(C.iter()).map(|(b, c)| b * c * c).sum();
        assert!((bc2 - 1.0 / 3.0).abs() < 1e-15);
        let bc4: f64 = B.iter().zip(C.iter()).map(|(b, c)| b * c.powi(4)).sum();
        assert!((bc4 - 0.2).abs() < 1e-15);
        // embedded pair: the error weights sum to zero
        assert!(E.iter().sum::<f64>().abs() < 1e-15);
        // row sums of A equal c
        let rows = [
            A21,
            A31 + A32,
            A41 + A42 + A43,
            A51 + A52 + A53 + A54,
            A61 + A62 + A63 + A64 + A65,
        ];
        for (r, c) in rows.iter().zip(&C[1..6]) {
            assert!((r - c).abs() < 1e-13);
        }
    }

    #[test]
    fn fifth_order_convergence_on_exponential() {
        // y' = y over one unit with fixed steps; error ratio ~ 2^5.
        let f = |y: &[f64; 1]| [y[0]];
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let mut y = [1.0];
            let mut k1 = f(&y);
            for i in 0..n {
                let s = dopri_step(&f, i as f64 * h, &y, &k1, h, 1e-10, 1e-12);
                y = s.y1;
                k1 = s.k7;
            }
            (y[0] - 1.0_f64.exp()).abs()
        };
        let ratio = err(8) / err(16);
        assert!(ratio > 28.0 && ratio < 40.0, "ratio {ratio}");
    }

    #[test]
    fn dense_output_interpolates_and_differentiates() {
        let f = |y: &[f64; 1]| [-2.0 * y[0]];
        let y0 = [1.0];
        let k1 = f(&y0);
        // local interpolation error is O(h^5), its derivative at least O(h^4)
        let errs = |h: f64| {
            let s = dopri_step(&f, 0.0, &y0, &k1, h, 1e-10, 1e-12);
            assert_eq!(s.dense.eval(1.0)[0], s.y1[0]);
            let t = 0.4 * h;
            let e = (s.dense.eval(0.4)[0] - (-2.0 * t).exp()).abs();
            let de = (s.dense.derivative(0.4)[0] + 2.0 * (-2.0 * t).exp()).abs();
            (e, de)
        };
        let (e1, d1) = errs(0.1);
        let (e2, d2) = errs(0.05);
        assert!(e1 < 2e-7 && d1 < 5e-6);
        assert!(e1 / e2 > 25.0 && e1 / e2 < 40.0, "{}", e1 / e2);
        assert!(d1 / d2 > 12.0 && d1 / d2 < 40.0, "{}", d1 / d2);
    }

    #[test]
    fn config_validation() {
        let bad = IntegrationConfig::<f64> { rel_tol: 0.0, ..Default::default() };
        assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        let bad = IntegrationConfig::<f64> { max_time: -1.0, ..Default::default() };
        assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn orientation_enforced() {
        let s = PeakonState::new(1.0, 1.0, 1.0, 0.0);
        let r = integrate(&s, &ABParams::new(1.0, 3.0), &IntegrationConfig::default());
        assert!(matches!(r, Err(Error::Orientation { .. })));
    }
}
