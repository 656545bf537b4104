//! Closed-form invariants of the reduced flow. Along a trajectory the
//! momentum product `z`, and the squares `h^2`, `w^2`, are functions of the
//! separation `q` alone:
//!
//! * `z(q) = z0 (L_a(q) / L_a(mu))^k` with `k = (2-b) / (2(1-3a))`,
//! * `h^2 = h0^2 + 2 F1(q)` and `w^2 = w0^2 + 2 F2(q)`, where `F1`, `F2`
//!   integrate `(1 ± e^{-r}) f(r)` over the separation from `mu` to `q`.
//!
//! At `a = 1/3` the exponent is singular but the limit is not; that branch
//! uses `z(q) = z0 exp(-(3(2-b)/4)(e^{-2q} - e^{-2mu}))`.

use crate::dynamics::PeakonState;
use crate::error::{Error, Result};
use crate::params::{l_a, ABParams};
use crate::quadrature::{integrate, Tolerance};
use crate::scalar::Real;

/// Absolute tolerance of the `F1`/`F2` quadratures.
pub const POTENTIAL_TOL: f64 = 1e-12;

/// Initial reduced data and parameters for the invariant formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantContext<T> {
    pub params: ABParams<T>,
    pub mu: T,
    pub z0: T,
    pub h0: T,
    pub w0: T,
}

impl<T: Real> InvariantContext<T> {
    pub fn new(params: ABParams<T>, mu: T, z0: T, h0: T, w0: T) -> Result<Self> {
        if params.a == T::zero() {
            return Err(Error::ZeroA);
        }
        let scale = (h0 * h0).max(w0 * w0).max(T::one());
        let defect = h0 * h0 + T::lit(4.0) * z0 - w0 * w0;
        if defect.abs() > T::lit(64.0) * T::epsilon() * scale {
            return Err(Error::ReducedInconsistent { defect: defect.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(Self { params, mu, z0, h0, w0 })
    }

    /// Context read off an initial peakon state (`mu = q2 - q1`).
    pub fn from_initial(params: ABParams<T>, initial: &PeakonState<T>) -> Result<Self> {
        let r = initial.to_reduced()?;
        Self::new(params, r.q, r.z, r.h, r.w)
    }

    /// `(2 - b) / (2 (1 - 3a))`; infinite at `a = 1/3`.
    pub fn exponent(&self) -> T {
        (T::lit(2.0) - self.params.b) / (T::lit(2.0) * self.params.one_minus_3a())
    }

    /// `z` as a function of the separation.
    pub fn z_closed_form(&self, q: T) -> T {
        let two = T::lit(2.0);
        let b = self.params.b;
        if b == two {
            return self.z0;
        }
        if self.params.is_third() {
            let shift = (-two * q).exp() - (-two * self.mu).exp();
            return self.z0 * (-(T::lit(3.0) * (two - b) / T::lit(4.0)) * shift).exp();
        }
        let a = self.params.a;
        let base = l_a(a, q) / l_a(a, self.mu);
        self.z0 * base.powf(self.exponent())
    }

    /// The density `f(q)` with `h h' = (1 + e^{-q}) f(q) q'` and
    /// `w w' = (1 - e^{-q}) f(q) q'`.
    ///
    /// Written as `sign(L_a(q)) z0 |L_a(mu)|^{-k} (-(2-b) e^{-q}) / |L_a(q)|^{1-k}`;
    /// the sign factor is what makes the identities hold where `L_a < 0`.
    pub fn f_density(&self, q: T) -> T {
        let two = T::lit(2.0);
        let b = self.params.b;
        if b == two {
            return T::zero();
        }
        let drive = -(two - b) * (-q).exp();
        if self.params.is_third() {
            // L_a = 2/3 identically
            return self.z_closed_form(q) * drive / (two / T::lit(3.0));
        }
        let a = self.params.a;
        let k = self.exponent();
        let lq = l_a(a, q);
        let lmu = l_a(a, self.mu);
        lq.sgn() * self.z0 * lmu.abs().powf(-k) * drive / lq.abs().powf(T::one() - k)
    }

    fn potential(&self, q: T, plus: bool) -> Result<T> {
        if self.params.b == T::lit(2.0) || q == self.mu {
            return Ok(T::zero());
        }
        let one = T::one();
        let integrand = |r: T| {
            let e = (-r).exp();
            let weight = if plus { one + e } else { one - e };
            weight * self.f_density(r)
        };
        integrate(integrand, self.mu, q, Tolerance::absolute(T::lit(POTENTIAL_TOL))).into_result()
    }

    /// `F1(q) = int_mu^q (1 + e^{-r}) f(r) dr`
    pub fn f1(&self, q: T) -> Result<T> {
        self.potential(q, true)
    }

    /// `F2(q) = int_mu^q (1 - e^{-r}) f(r) dr`
    pub fn f2(&self, q: T) -> Result<T> {
        self.potential(q, false)
    }

    /// `h0^2 + 2 F1(q)`, returned unclamped: a negative value means the
    /// trajectory left the regime where `h` keeps its sign.
    pub fn h_sq(&self, q: T) -> Result<T> {
        Ok(self.h0 * self.h0 + T::lit(2.0) * self.f1(q)?)
    }

    /// `w0^2 + 2 F2(q)`, unclamped like [`Self::h_sq`].
    pub fn w_sq(&self, q: T) -> Result<T> {
        Ok(self.w0 * self.w0 + T::lit(2.0) * self.f2(q)?)
    }
}
