//! Equation parameters, the four sign quadrants of `(a, b)`, and the
//! separation geometry (`L_a`, `mu`, `c`) that drives the colliding
//! initial profiles.

use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::dynamics::PeakonState;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default separation design constant.
pub const DEFAULT_C: f64 = 1.5;
/// Step of the fallback scan over `c` in `(1, 2)`.
pub const C_SCAN_STEP: f64 = 0.05;
/// Initial separation used when `a = 1/3` (and by the fallback policy).
pub const DEFAULT_MU: f64 = 0.1;
pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_DELTA: f64 = 0.5;

/// Parameters `(a, b)` of the cubic ab-equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ABParams<T> {
    pub a: T,
    pub b: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseId {
    /// `a > 0, b > 2`: peakon-antipeakon.
    Case1,
    /// `a > 0, b < 2`: two peakons, larger one behind.
    Case2,
    /// `a < 0, b > 2`: two peakons, larger one in front.
    Case3,
    /// `a < 0, b < 2`: antipeakon-peakon.
    Case4,
}

impl CaseId {
    pub const ALL: [CaseId; 4] = [CaseId::Case1, CaseId::Case2, CaseId::Case3, CaseId::Case4];

    /// Peakon-antipeakon layouts have momenta of opposite sign.
    pub fn opposite_signs(self) -> bool {
        matches!(self, CaseId::Case1 | CaseId::Case4)
    }

    pub fn name(self) -> &'static str {
        match self {
            CaseId::Case1 => "case1",
            CaseId::Case2 => "case2",
            CaseId::Case3 => "case3",
            CaseId::Case4 => "case4",
        }
    }
}

impl std::str::FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "case1" | "1" => Ok(CaseId::Case1),
            "case2" | "2" => Ok(CaseId::Case2),
            "case3" | "3" => Ok(CaseId::Case3),
            "case4" | "4" => Ok(CaseId::Case4),
            other => Err(Error::InvalidSpec(format!("unknown case '{other}'"))),
        }
    }
}

/// Outcome of [`ABParams::classify`] for `a != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Case(CaseId),
    /// `b = 2`: momenta are frozen, nothing to construct.
    DegenerateB,
}

impl<T: Real> ABParams<T> {
    pub fn new(a: T, b: T) -> Self {
        Self { a, b }
    }

    /// Sorts `(a, b)` into the sign quadrants of `a` and `b - 2`.
    pub fn classify(&self) -> Result<Classification> {
        let two = T::lit(2.0);
        if self.a == T::zero() {
            return Err(Error::ZeroA);
        }
        if self.b == two {
            return Ok(Classification::DegenerateB);
        }
        let case = match (self.a > T::zero(), self.b > two) {
            (true, true) => CaseId::Case1,
            (true, false) => CaseId::Case2,
            (false, true) => CaseId::Case3,
            (false, false) => CaseId::Case4,
        };
        Ok(Classification::Case(case))
    }

    /// `1 - 3a`, the coefficient that vanishes for the FORQ value `a = 1/3`.
    #[inline]
    pub fn one_minus_3a(&self) -> T {
        T::one() - T::lit(3.0) * self.a
    }

    /// True when `a` is close enough to `1/3` that the closed forms must use
    /// their analytic limit.
    pub fn is_third(&self) -> bool {
        self.one_minus_3a().abs() <= T::epsilon().sqrt()
    }

    pub(crate) fn widen(&self) -> (f64, f64) {
        (self.a.to_f64().unwrap_or(f64::NAN), self.b.to_f64().unwrap_or(f64::NAN))
    }
}

/// `L_a(q) = 1 - e^{-2q} + 3a e^{-2q} - a`, the factor multiplying `h w` in `q'`.
#[inline]
pub fn l_a<T: Real>(a: T, q: T) -> T {
    let e2 = (-T::lit(2.0) * q).exp();
    T::one() - e2 + T::lit(3.0) * a * e2 - a
}

/// Initial separation `mu = -1/2 ln(((c+1)a - 1)/(3a - 1))`, chosen so that
/// `L_a(mu) = c a`.
pub fn compute_mu<T: Real>(a: T, c: T) -> Result<T> {
    let one = T::one();
    let three = T::lit(3.0);
    let ratio = ((c + one) * a - one) / (three * a - one);
    if !(ratio > T::zero() && ratio < one) || !ratio.is_finite() {
        return Err(Error::MuDomain {
            a: a.to_f64().unwrap_or(f64::NAN),
            c: c.to_f64().unwrap_or(f64::NAN),
            ratio: ratio.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mu = -T::lit(0.5) * ratio.ln();
    if mu >= one {
        return Err(Error::MuDomain {
            a: a.to_f64().unwrap_or(f64::NAN),
            c: c.to_f64().unwrap_or(f64::NAN),
            ratio: ratio.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(mu)
}

/// Separation chosen for a given `a`: `mu` and the design constant `c` that
/// produced it (absent when `mu` came from the `a = 1/3` rule or the
/// fallback).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Separation<T> {
    pub mu: T,
    pub c: Option<T>,
}

/// Picks `mu` for the given `a`: the `a = 1/3` default, else `c = 1.5`, else
/// the first admissible `c` on a 0.05 grid in `(1, 2)`, else `mu = 0.1` when
/// `L_a >= a` on `[0, 0.1]`.
pub fn resolve_separation<T: Real>(params: &ABParams<T>) -> Result<Separation<T>> {
    let a = params.a;
    if a == T::zero() {
        return Err(Error::ZeroA);
    }
    let default_mu = T::lit(DEFAULT_MU);
    if params.is_third() {
        return Ok(Separation { mu: default_mu, c: None });
    }
    if let Ok(mu) = compute_mu(a, T::lit(DEFAULT_C)) {
        return Ok(Separation { mu, c: Some(T::lit(DEFAULT_C)) });
    }
    // 1.05, 1.10, ..., 1.95
    for k in 1..20 {
        let c = T::lit(1.0 + C_SCAN_STEP * k as f64);
        if let Ok(mu) = compute_mu(a, c) {
            return Ok(Separation { mu, c: Some(c) });
        }
    }
    if a > T::zero() {
        let lo = l_a(a, T::zero()).min(l_a(a, default_mu)) / a;
        if lo >= T::one() {
            return Ok(Separation { mu: default_mu, c: None });
        }
    }
    Err(Error::NoAdmissibleMu { a: a.to_f64().unwrap_or(f64::NAN) })
}

/// One of the four colliding initial-data constructions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec<T> {
    pub case_id: CaseId,
    /// Magnitude scale.
    pub alpha: T,
    /// Magnitude asymmetry.
    pub delta: T,
    /// Initial separation `q2(0) - q1(0)`.
    pub mu: T,
    /// Separation design constant in `(1, 2)`.
    pub c: Option<T>,
}

impl<T: Real> CaseSpec<T> {
    /// Preset for `params` with the default separation policy.
    pub fn preset(params: &ABParams<T>, alpha: T, delta: T) -> Result<Self> {
        let case_id = match params.classify()? {
            Classification::Case(id) => id,
            Classification::DegenerateB => return Err(Error::DegenerateB),
        };
        let sep = resolve_separation(params)?;
        let spec = Self { case_id, alpha, delta, mu: sep.mu, c: sep.c };
        spec.validate(params)?;
        Ok(spec)
    }

    /// Preset with the default magnitudes `alpha = 1`, `delta = 0.5`.
    pub fn default_for(params: &ABParams<T>) -> Result<Self> {
        Self::preset(params, T::lit(DEFAULT_ALPHA), T::lit(DEFAULT_DELTA))
    }

    /// Checks the invariants tying the spec to `(a, b)`.
    pub fn validate(&self, params: &ABParams<T>) -> Result<()> {
        match params.classify()? {
            Classification::DegenerateB => return Err(Error::DegenerateB),
            Classification::Case(id) if id != self.case_id => {
                let (a, b) = params.widen();
                return Err(Error::InconsistentCase { case: self.case_id, a, b });
            }
            Classification::Case(_) => {}
        }
        if !(self.alpha > T::zero()) || !(self.delta > T::zero()) {
            return Err(Error::InvalidSpec("alpha and delta must be positive".into()));
        }
        if !(self.mu > T::zero() && self.mu <= T::one()) {
            return Err(Error::InvalidSpec(format!("mu = {} outside (0, 1]", self.mu)));
        }
        if let Some(c) = self.c {
            if !(c > T::one() && c < T::lit(2.0)) {
                return Err(Error::InvalidSpec(format!("c = {c} outside (1, 2)")));
            }
            let expected = compute_mu(params.a, c)?;
            let tol = T::lit(1e3) * T::epsilon() * expected.abs().max(T::one());
            if (expected - self.mu).abs() > tol {
                return Err(Error::InvalidSpec(format!(
                    "mu = {} does not match compute_mu(a, c) = {expected}",
                    self.mu
                )));
            }
        } else if params.a < T::zero() {
            return Err(Error::InvalidSpec("a < 0 requires a separation constant c".into()));
        }
        Ok(())
    }

    /// `2 alpha delta + delta^2`, the magnitude of `p(0) = p2(0)^2 - p1(0)^2`.
    pub fn momentum_gap(&self) -> T {
        T::lit(2.0) * self.alpha * self.delta + self.delta * self.delta
    }

    /// Lower bound `eps` on the approach speed: `q' <= -eps` until the first
    /// event.
    pub fn epsilon(&self, params: &ABParams<T>) -> T {
        match self.case_id {
            CaseId::Case1 | CaseId::Case2 => params.a * self.momentum_gap(),
            CaseId::Case3 | CaseId::Case4 => {
                let c = self.c.unwrap_or(T::one());
                (c * params.a).abs() * self.momentum_gap()
            }
        }
    }

    /// Upper bound `mu / eps` on the first event time.
    pub fn time_bound(&self, params: &ABParams<T>) -> T {
        self.mu / self.epsilon(params)
    }
}

/// Initial `(p1, p2, q1, q2)` for a case. Only ring arithmetic is used, so the
/// layout can be checked in exact arithmetic.
pub fn make_initial_profile<T>(spec: &CaseSpec<T>) -> PeakonState<T>
where
    T: Num + Copy + std::ops::Neg<Output = T>,
{
    let (alpha, delta, mu) = (spec.alpha, spec.delta, spec.mu);
    let big = alpha + delta;
    let (p1, p2) = match spec.case_id {
        CaseId::Case1 => (big, -alpha),
        CaseId::Case2 => (big, alpha),
        CaseId::Case3 => (alpha, big),
        CaseId::Case4 => (-alpha, big),
    };
    PeakonState { p1, p2, q1: T::zero(), q2: mu }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, b: f64) -> ABParams<f64> {
        ABParams::new(a, b)
    }

    #[test]
    fn classification_quadrants() {
        assert_eq!(p(1.0 / 3.0, 3.0).classify(), Ok(Classification::Case(CaseId::Case1)));
        assert_eq!(p(1.0 / 3.0, 2.0).classify(), Ok(Classification::DegenerateB));
        assert_eq!(p(-1.0, 0.0).classify(), Ok(Classification::Case(CaseId::Case4)));
        assert_eq!(p(1.0, 1.0).classify(), Ok(Classification::Case(CaseId::Case2)));
        assert_eq!(p(-0.5, 4.0).classify(), Ok(Classification::Case(CaseId::Case3)));
        assert_eq!(p(0.0, 3.0).classify(), Err(Error::ZeroA));
    }

    #[test]
    fn mu_hand_values() {
        // -1/2 ln(1.5/2)
        let mu = compute_mu(1.0_f64, 1.5).unwrap();
        assert!((mu - 0.143_841_036_225_890_45).abs() < 1e-12);
        assert!((l_a(1.0, mu) - 1.5).abs() < 1e-12);
        // -1/2 ln(0.875)
        let mu = compute_mu(-1.0_f64, 1.5).unwrap();
        assert!((mu - 0.066_765_696_312_261_31).abs() < 1e-12);
        assert!((l_a(-1.0, mu) + 1.5).abs() < 1e-12);
    }

    #[test]
    fn mu_vanishes_as_c_approaches_two() {
        let mut last = f64::INFINITY;
        for c in [1.9, 1.99, 1.999, 1.9999] {
            let mu = compute_mu(1.0, c).unwrap();
            assert!(mu > 0.0 && mu < last);
            last = mu;
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn mu_domain_errors() {
        // 0 < a < 1/3 never admits c in (1, 2)
        assert!(matches!(compute_mu(0.2, 1.5), Err(Error::MuDomain { .. })));
        assert!(matches!(compute_mu(1.0, 2.5), Err(Error::MuDomain { .. })));
    }

    #[test]
    fn l_a_values() {
        assert!((l_a(0.5_f64, 0.0) - 1.0).abs() < 1e-15);
        for q in [0.0, 0.3, 2.0, 10.0] {
            assert!((l_a(1.0_f64 / 3.0, q) - 2.0 / 3.0).abs() < 1e-15);
        }
        assert!((l_a(1.0, 2.0_f64.ln()) - 0.5).abs() < 1e-15);
        // limits 2a and 1 - a
        assert!((l_a(-0.7_f64, 0.0) - (-1.4)).abs() < 1e-15);
        assert!((l_a(-0.7_f64, 60.0) - 1.7).abs() < 1e-15);
    }

    #[test]
    fn separation_policy() {
        let s = resolve_separation(&p(1.0 / 3.0, 3.0)).unwrap();
        assert_eq!(s, Separation { mu: 0.1, c: None });
        let s = resolve_separation(&p(1.0, 3.0)).unwrap();
        assert_eq!(s.c, Some(1.5));
        // a slightly above 1/3 needs a scanned c
        let s = resolve_separation(&p(0.4, 3.0)).unwrap();
        let c = s.c.unwrap();
        assert!(c > 1.5 && c < 2.0);
        assert!((l_a(0.4, s.mu) - c * 0.4).abs() < 1e-12);
        // 0 < a < 1/3 falls back to mu = 0.1
        let s = resolve_separation(&p(0.2, 3.0)).unwrap();
        assert_eq!(s, Separation { mu: 0.1, c: None });
        assert_eq!(resolve_separation(&p(0.0, 3.0)), Err(Error::ZeroA));
    }

    #[test]
    fn profiles_match_layouts() {
        let spec = |case_id| CaseSpec { case_id, alpha: 1.0, delta: 0.5, mu: 0.1, c: None };
        let s = make_initial_profile(&spec(CaseId::Case1));
        assert_eq!((s.p1, s.q1, s.p2, s.q2), (1.5, 0.0, -1.0, 0.1));
        let s = make_initial_profile(&spec(CaseId::Case3));
        assert_eq!((s.p1, s.q1, s.p2, s.q2), (1.0, 0.0, 1.5, 0.1));
        let s = make_initial_profile(&spec(CaseId::Case2));
        assert_eq!((s.p1, s.p2), (1.5, 1.0));
        let s = make_initial_profile(&spec(CaseId::Case4));
        assert_eq!((s.p1, s.p2), (-1.0, 1.5));
    }

    #[test]
    fn preset_rejections() {
        assert_eq!(CaseSpec::default_for(&p(1.0 / 3.0, 2.0)), Err(Error::DegenerateB));
        assert_eq!(CaseSpec::default_for(&p(0.0, 3.0)), Err(Error::ZeroA));
        let mut spec = CaseSpec::default_for(&p(1.0, 3.0)).unwrap();
        spec.case_id = CaseId::Case2;
        assert!(matches!(spec.validate(&p(1.0, 3.0)), Err(Error::InconsistentCase { .. })));
        let mut spec = CaseSpec::default_for(&p(-1.0, 3.0)).unwrap();
        spec.mu = 0.2;
        assert!(matches!(spec.validate(&p(-1.0, 3.0)), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn epsilon_per_case() {
        let params = p(1.0 / 3.0, 3.0);
        let spec = CaseSpec::default_for(&params).unwrap();
        assert!((spec.epsilon(&params) - 1.25 / 3.0).abs() < 1e-15);
        assert!((spec.time_bound(&params) - 0.24).abs() < 1e-14);
        let params = p(-1.0, 3.0);
        let spec = CaseSpec::default_for(&params).unwrap();
        assert!((spec.epsilon(&params) - 1.5 * 1.25).abs() < 1e-15);
    }
}
