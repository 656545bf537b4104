//! Vector fields of the 2-peakon system in physical `(p1, p2, q1, q2)` and
//! reduced `(q, h, w, z)` coordinates, and the peakon profile itself.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ABParams;
use crate::scalar::Real;

/// Heights and positions of the two peaks. Also used for time derivatives of
/// the same quantities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PeakonState<T> {
    pub p1: T,
    pub p2: T,
    pub q1: T,
    pub q2: T,
}

/// Separation, momentum difference, momentum sum and momentum product.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReducedState<T> {
    pub q: T,
    pub h: T,
    pub w: T,
    pub z: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxDiagnostics<T> {
    /// `p2^2 - p1^2`
    pub p: T,
    /// `p1 p2`
    pub pprod: T,
}

impl<T: Real> PeakonState<T> {
    pub fn new(p1: T, p2: T, q1: T, q2: T) -> Self {
        Self { p1, p2, q1, q2 }
    }

    pub fn is_finite(&self) -> bool {
        self.p1.is_finite() && self.p2.is_finite() && self.q1.is_finite() && self.q2.is_finite()
    }

    /// `q2 - q1`
    #[inline]
    pub fn separation(&self) -> T {
        self.q2 - self.q1
    }

    pub fn translate(&self, shift: T) -> Self {
        Self { q1: self.q1 + shift, q2: self.q2 + shift, ..*self }
    }

    pub fn aux(&self) -> AuxDiagnostics<T> {
        AuxDiagnostics { p: self.p2 * self.p2 - self.p1 * self.p1, pprod: self.p1 * self.p2 }
    }

    pub fn to_array(&self) -> [T; 4] {
        [self.p1, self.p2, self.q1, self.q2]
    }

    pub fn from_array(y: [T; 4]) -> Self {
        Self { p1: y[0], p2: y[1], q1: y[2], q2: y[3] }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        (self.p1 - other.p1)
            .abs()
            .max((self.p2 - other.p2).abs())
            .max((self.q1 - other.q1).abs())
            .max((self.q2 - other.q2).abs())
    }

    pub fn max_abs(&self) -> T {
        self.p1.abs().max(self.p2.abs()).max(self.q1.abs()).max(self.q2.abs())
    }

    pub(crate) fn widen(&self) -> [f64; 4] {
        self.to_array().map(|v| v.to_f64().unwrap_or(f64::NAN))
    }

    /// Change of variables to `(q, h, w, z)`; requires `q2 >= q1`.
    pub fn to_reduced(&self) -> Result<ReducedState<T>> {
        if self.q2 < self.q1 {
            return Err(Error::Orientation {
                q1: self.q1.to_f64().unwrap_or(f64::NAN),
                q2: self.q2.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(self.to_reduced_unchecked())
    }

    pub(crate) fn to_reduced_unchecked(&self) -> ReducedState<T> {
        ReducedState {
            q: self.q2 - self.q1,
            h: self.p2 - self.p1,
            w: self.p1 + self.p2,
            z: self.p1 * self.p2,
        }
    }
}

impl<T: Real> ReducedState<T> {
    pub fn new(q: T, h: T, w: T, z: T) -> Self {
        Self { q, h, w, z }
    }

    /// `h^2 + 4z - w^2`, identically zero for states built from momenta.
    pub fn defect(&self) -> T {
        self.h * self.h + T::lit(4.0) * self.z - self.w * self.w
    }

    /// `p1 = (w - h)/2`, `p2 = (w + h)/2`
    pub fn momenta(&self) -> (T, T) {
        let half = T::lit(0.5);
        (half * (self.w - self.h), half * (self.w + self.h))
    }

    pub fn aux(&self) -> AuxDiagnostics<T> {
        AuxDiagnostics { p: self.h * self.w, pprod: self.z }
    }
}

/// Inverse change of variables given the first position. `z` is not used;
/// see [`from_reduced_checked`] for the consistency check.
pub fn from_reduced<T: Real>(state: &ReducedState<T>, q1: T) -> PeakonState<T> {
    let (p1, p2) = state.momenta();
    PeakonState { p1, p2, q1, q2: q1 + state.q }
}

/// Like [`from_reduced`] but rejects inputs where `p1 p2` differs from `z`
/// by more than `tol`.
pub fn from_reduced_checked<T: Real>(state: &ReducedState<T>, q1: T, tol: T) -> Result<PeakonState<T>> {
    let out = from_reduced(state, q1);
    let defect = (out.p1 * out.p2 - state.z).abs();
    if !(defect <= tol) {
        return Err(Error::ReducedInconsistent { defect: defect.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(out)
}

/// Right-hand side of the 4x4 peakon system, with `sgn(0) = 0`.
pub fn full_rhs<T: Real>(state: &PeakonState<T>, params: &ABParams<T>) -> PeakonState<T> {
    let PeakonState { p1, p2, q1, q2 } = *state;
    let (a, b) = (params.a, params.b);
    let one = T::one();
    let two = T::lit(2.0);
    let e = (-(q1 - q2).abs()).exp();
    let e2 = e * e;
    let c1 = one - a;
    let c3 = params.one_minus_3a();
    let cross = two * p1 * p2 * e;
    let dq1 = c1 * p1 * p1 + cross + c3 * p2 * p2 * e2;
    let dq2 = c1 * p2 * p2 + cross + c3 * p1 * p1 * e2;
    let coupling = (two - b) * p1 * p2 * e;
    let dp1 = coupling * (q2 - q1).sgn() * (p1 + p2 * e);
    let dp2 = coupling * (q1 - q2).sgn() * (p1 * e + p2);
    PeakonState { p1: dp1, p2: dp2, q1: dq1, q2: dq2 }
}

/// Right-hand side of the reduced `(q, h, w, z)` system (valid for `q >= 0`).
pub fn reduced_rhs<T: Real>(state: &ReducedState<T>, params: &ABParams<T>) -> ReducedState<T> {
    let ReducedState { q, h, w, z } = *state;
    let one = T::one();
    let k = T::lit(2.0) - params.b;
    let e = (-q).exp();
    let e2 = e * e;
    let la = one - params.a - params.one_minus_3a() * e2;
    ReducedState {
        q: h * w * la,
        h: -k * w * z * (one + e) * e,
        w: -k * h * z * (one - e) * e,
        z: k * h * w * z * e2,
    }
}

/// `q1'` expressed in reduced variables; closes the reduced system when the
/// absolute position is tracked alongside it.
pub fn reduced_q1_rate<T: Real>(state: &ReducedState<T>, params: &ABParams<T>) -> T {
    let (p1, p2) = state.momenta();
    let e = (-state.q.abs()).exp();
    (T::one() - params.a) * p1 * p1
        + T::lit(2.0) * p1 * p2 * e
        + params.one_minus_3a() * p2 * p2 * e * e
}

/// The 2-peakon profile `u(x) = p1 e^{-|x-q1|} + p2 e^{-|x-q2|}`.
#[inline]
pub fn evaluate_u<T: Real>(state: &PeakonState<T>, x: T) -> T {
    state.p1 * (-(x - state.q1).abs()).exp() + state.p2 * (-(x - state.q2).abs()).exp()
}

/// `u_x` away from the peaks (one-sided limits are taken with `sgn(0) = 0`).
#[inline]
pub fn evaluate_ux<T: Real>(state: &PeakonState<T>, x: T) -> T {
    let d1 = x - state.q1;
    let d2 = x - state.q2;
    -(state.p1 * d1.sgn() * (-d1.abs()).exp() + state.p2 * d2.sgn() * (-d2.abs()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, b: f64) -> ABParams<f64> {
        ABParams::new(a, b)
    }

    #[test]
    fn single_peakon_rhs() {
        let s = PeakonState::new(1.0, 0.0, 0.0, 5.0);
        for (a, b) in [(0.3, 1.0), (-2.0, 7.0), (1.0 / 3.0, 2.0)] {
            let d = full_rhs(&s, &p(a, b));
            assert_eq!(d.q1, 1.0 - a);
            assert_eq!(d.p1, 0.0);
            assert_eq!(d.p2, 0.0);
        }
    }

    #[test]
    fn forq_hand_evaluation() {
        let s = PeakonState::new(1.0, 1.0, 0.0, 2.0_f64.ln());
        let d = full_rhs(&s, &p(1.0 / 3.0, 2.0));
        assert!((d.q1 - 5.0 / 3.0).abs() < 1e-15);
        assert!((d.q2 - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!((d.p1, d.p2), (0.0, 0.0));
    }

    #[test]
    fn b_two_freezes_momenta() {
        let s = PeakonState::new(0.7, -1.3, -0.2, 0.4);
        let d = full_rhs(&s, &p(-0.8, 2.0));
        assert_eq!((d.p1, d.p2), (0.0, 0.0));
    }

    #[test]
    fn coincident_peaks_use_zero_sign() {
        let s = PeakonState::new(1.0, 2.0, 0.5, 0.5);
        let d = full_rhs(&s, &p(1.0, 3.0));
        assert_eq!((d.p1, d.p2), (0.0, 0.0));
    }

    #[test]
    fn reduced_rhs_limits() {
        let r = ReducedState::new(0.1, -2.5, 0.5, -1.5);
        let d = reduced_rhs(&r, &p(1.0, 2.0));
        assert_eq!((d.h, d.w, d.z), (0.0, 0.0, 0.0));
        let far = ReducedState::new(80.0, 1.2, 0.7, -0.2);
        let d = reduced_rhs(&far, &p(0.25, 4.0));
        assert!((d.q - 1.2 * 0.7 * 0.75).abs() < 1e-15);
        assert!(d.h.abs() < 1e-30 && d.w.abs() < 1e-30 && d.z.abs() < 1e-30);
    }

    #[test]
    fn reduced_conversions() {
        let s = PeakonState::new(1.5, -1.0, 0.0, 0.1);
        let r = s.to_reduced().unwrap();
        assert_eq!(r, ReducedState::new(0.1, -2.5, 0.5, -1.5));
        assert_eq!(r.defect(), 0.0);
        assert_eq!(from_reduced(&r, 0.0), s);
        let sym = PeakonState::new(0.8_f64, 0.8, 1.0, 1.0).to_reduced().unwrap();
        assert_eq!((sym.q, sym.h, sym.w), (0.0, 0.0, 1.6));
        assert!((sym.z - 0.64).abs() < 1e-15);
        let back = from_reduced(&ReducedState::new(1.0, 2.0, 0.0, -1.0), 0.0);
        assert_eq!(back, PeakonState::new(-1.0, 1.0, 0.0, 1.0));
        assert!(matches!(
            PeakonState::new(1.0, 1.0, 1.0, 0.0).to_reduced(),
            Err(Error::Orientation { .. })
        ));
        assert!(from_reduced_checked(&ReducedState::new(1.0, 2.0, 0.0, -1.0), 0.0, 1e-12).is_ok());
        assert!(matches!(
            from_reduced_checked(&ReducedState::new(1.0, 2.0, 0.0, 3.0), 0.0, 1e-12),
            Err(Error::ReducedInconsistent { .. })
        ));
    }

    #[test]
    fn profile_values() {
        assert_eq!(evaluate_u(&PeakonState::new(1.0, 0.0, 0.0, 3.0), 0.0), 1.0);
        assert_eq!(evaluate_u(&PeakonState::new(1.0, -1.0, -0.7, 0.7), 0.0), 0.0);
        let v = evaluate_u(&PeakonState::new(1.5, -1.0, 0.0, 0.1), 0.1);
        assert!((v - (1.5 * (-0.1_f64).exp() - 1.0)).abs() < 1e-15);
        assert!((v - 0.357_256_127_053_939_4).abs() < 1e-12);
    }

    #[test]
    fn ux_matches_finite_difference() {
        let s = PeakonState::new(1.3_f64, -0.4, -0.5, 0.9);
        for x in [-3.0, 0.1, 2.0] {
            let h = 1e-6;
            let fd = (evaluate_u(&s, x + h) - evaluate_u(&s, x - h)) / (2.0 * h);
            assert!((fd - evaluate_ux(&s, x)).abs() < 1e-8);
        }
    }

    #[test]
    fn f32_rhs_agrees_with_f64() {
        let s64 = PeakonState::new(1.5, -1.0, 0.0, 0.1);
        let s32 = PeakonState::new(1.5_f32, -1.0, 0.0, 0.1);
        let d64 = full_rhs(&s64, &p(1.0 / 3.0, 3.0));
        let d32 = full_rhs(&s32, &ABParams::new(1.0_f32 / 3.0, 3.0));
        assert!((d64.q1 - d32.q1 as f64).abs() < 1e-5);
        assert!((d64.p2 - d32.p2 as f64).abs() < 1e-5);
    }
}
