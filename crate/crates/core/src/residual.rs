//! Pointwise residual of the ab-equation for the 2-peakon ansatz, away from
//! the peaks.
//!
//! `u_t` comes from the chain rule through the ODE velocity; spatial
//! derivatives are analytic; the nonlocal terms are convolutions with
//! `K(z) = e^{-|z|}/2` (for `D^{-2}`) and `K'(z) = -sgn(z) e^{-|z|}/2`
//! (for `d_x D^{-2}`), integrated by a composite Gauss rule with breaks at
//! `x` and at the peaks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evaluate_u, evaluate_ux, full_rhs, PeakonState};
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::params::ABParams;
use crate::quadrature::gauss_legendre_composite;
use crate::scalar::Real;

pub const DEFAULT_SPACING: f64 = 1e-3;
pub const DEFAULT_MARGIN: f64 = 30.0;
pub const DEFAULT_EXCLUSION_RADIUS: f64 = 0.1;
/// Tail mass, relative to the result, above which a grid is too narrow.
pub const TAIL_WARNING: f64 = 1e-10;

/// Truncated integration domain `[-half_width, half_width]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionGrid<T> {
    pub half_width: T,
    pub spacing: T,
}

impl<T: Real> ConvolutionGrid<T> {
    pub fn new(half_width: T, spacing: T) -> Self {
        Self { half_width, spacing }
    }

    /// `L = max(|q1|, |q2|) + margin`.
    pub fn for_state(state: &PeakonState<T>, margin: T, spacing: T) -> Self {
        Self { half_width: state.q1.abs().max(state.q2.abs()) + margin, spacing }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convolution<T> {
    pub value: T,
    /// Bound on the kernel mass dropped outside the grid, assuming `f`
    /// decays at least like `e^{-|y|}` beyond it.
    pub tail_bound: T,
}

impl<T: Real> Convolution<T> {
    pub fn too_narrow(&self) -> bool {
        self.tail_bound > T::lit(TAIL_WARNING) * self.value.abs()
    }
}

fn sorted_breaks<T: Real>(lo: T, hi: T, kinks: &[T]) -> Vec<T> {
    let mut pts = vec![lo, hi];
    pts.extend(kinks.iter().copied().filter(|&k| k > lo && k < hi));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup();
    pts
}

fn convolve<T: Real, F: Fn(T) -> T, K: Fn(T) -> T>(
    f: &F,
    kernel: K,
    x: T,
    grid: &ConvolutionGrid<T>,
    kinks: &[T],
) -> Convolution<T> {
    let (lo, hi) = (-grid.half_width, grid.half_width);
    let mut ks = kinks.to_vec();
    ks.push(x);
    let pts = sorted_breaks(lo, hi, &ks);
    let mut value = T::zero();
    for w in pts.windows(2) {
        value = value + gauss_legendre_composite(|y| kernel(x - y) * f(y), w[0], w[1], grid.spacing);
    }
    let half = T::lit(0.5);
    let tail_bound = half * (f(lo).abs() * (-(x - lo).abs()).exp() + f(hi).abs() * (-(x - hi).abs()).exp());
    Convolution { value, tail_bound }
}

/// `D^{-2} f (x) = (1/2) int e^{-|x-y|} f(y) dy`. `kinks` lists points where
/// `f` is not smooth.
pub fn d_minus2<T: Real, F: Fn(T) -> T>(f: F, x: T, grid: &ConvolutionGrid<T>, kinks: &[T]) -> Convolution<T> {
    let half = T::lit(0.5);
    convolve(&f, |z: T| half * (-z.abs()).exp(), x, grid, kinks)
}

/// `d_x D^{-2} f (x) = -(1/2) int sgn(x-y) e^{-|x-y|} f(y) dy`, which needs
/// no derivative of `f`.
pub fn d_minus2_dx<T: Real, F: Fn(T) -> T>(f: F, x: T, grid: &ConvolutionGrid<T>, kinks: &[T]) -> Convolution<T> {
    let half = T::lit(0.5);
    convolve(&f, |z: T| -half * z.sgn() * (-z.abs()).exp(), x, grid, kinks)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualOptions<T> {
    pub spacing: T,
    pub margin: T,
    pub exclusion_radius: T,
}

impl<T: Real> Default for ResidualOptions<T> {
    fn default() -> Self {
        Self {
            spacing: T::lit(DEFAULT_SPACING),
            margin: T::lit(DEFAULT_MARGIN),
            exclusion_radius: T::lit(DEFAULT_EXCLUSION_RADIUS),
        }
    }
}

impl<T: Real> ResidualOptions<T> {
    pub fn with_spacing(mut self, spacing: T) -> Self {
        self.spacing = spacing;
        self
    }
}

fn check_exclusion<T: Real>(state: &PeakonState<T>, x: T, radius: T) -> Result<()> {
    let distance = (x - state.q1).abs().min((x - state.q2).abs());
    if distance < radius {
        return Err(Error::InsideExclusion {
            x: x.to_f64().unwrap_or(f64::NAN),
            distance: distance.to_f64().unwrap_or(f64::NAN),
            radius: radius.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Residual of the ab-equation at `x` for the profile `state` moving with
/// `velocity = (p1', p2', q1', q2')`.
pub fn pde_residual_at<T: Real>(
    state: &PeakonState<T>,
    velocity: &PeakonState<T>,
    x: T,
    params: &ABParams<T>,
    opts: &ResidualOptions<T>,
) -> Result<T> {
    check_exclusion(state, x, opts.exclusion_radius)?;
    if !state.is_finite() || !velocity.is_finite() {
        return Err(Error::NonFinite { t: f64::NAN });
    }
    let (a, b) = (params.a, params.b);
    let two = T::lit(2.0);
    let three = T::lit(3.0);

    let e1 = (-(x - state.q1).abs()).exp();
    let e2 = (-(x - state.q2).abs()).exp();
    let u_t = velocity.p1 * e1
        + state.p1 * velocity.q1 * (x - state.q1).sgn() * e1
        + velocity.p2 * e2
        + state.p2 * velocity.q2 * (x - state.q2).sgn() * e2;

    let u = evaluate_u(state, x);
    let ux = evaluate_ux(state, x);
    let local = u_t + u * u * ux - a * ux * ux * ux;

    let c1 = b / three;
    let c2 = (T::lit(6.0) - T::lit(6.0) * a - b) / two;
    let c3 = (two * a + b - two) / two;
    let g1 = |y: T| {
        let (uy, uxy) = (evaluate_u(state, y), evaluate_ux(state, y));
        c1 * uy * uy * uy + c2 * uy * uxy * uxy
    };
    let g2 = |y: T| {
        let uxy = evaluate_ux(state, y);
        c3 * uxy * uxy * uxy
    };
    let grid = ConvolutionGrid::for_state(state, opts.margin, opts.spacing);
    let kinks = [state.q1, state.q2];
    let n1 = d_minus2_dx(g1, x, &grid, &kinks).value;
    let n2 = d_minus2(g2, x, &grid, &kinks).value;
    Ok(local + n1 + n2)
}

/// Residual at `(t, x)` along a trajectory, with the velocity taken from the
/// ODE at the interpolated state.
pub fn pde_residual<T: Real>(
    traj: &Trajectory<T>,
    t: T,
    x: T,
    params: &ABParams<T>,
    opts: &ResidualOptions<T>,
) -> Result<T> {
    let state = traj.state_at(t)?;
    pde_residual_at(&state, &full_rhs(&state, params), x, params, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport<T> {
    pub sample_points: Vec<T>,
    pub residual_values: Vec<T>,
    pub max_abs_residual: T,
    pub exclusion_radius: T,
}

impl<T: Real> ResidualReport<T> {
    /// Evaluates the residual at every point in parallel.
    pub fn at_state(
        state: &PeakonState<T>,
        velocity: &PeakonState<T>,
        points: &[T],
        params: &ABParams<T>,
        opts: &ResidualOptions<T>,
    ) -> Result<Self> {
        let residual_values = points
            .par_iter()
            .map(|&x| pde_residual_at(state, velocity, x, params, opts))
            .collect::<Result<Vec<T>>>()?;
        let max_abs_residual = residual_values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        Ok(Self {
            sample_points: points.to_vec(),
            residual_values,
            max_abs_residual,
            exclusion_radius: opts.exclusion_radius,
        })
    }

    pub fn along(
        traj: &Trajectory<T>,
        t: T,
        points: &[T],
        params: &ABParams<T>,
        opts: &ResidualOptions<T>,
    ) -> Result<Self> {
        let state = traj.state_at(t)?;
        Self::at_state(&state, &full_rhs(&state, params), points, params, opts)
    }
}
