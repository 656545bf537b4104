//! Numerical laboratory for 2-peakon solutions of the cubic ab-family
//!
//! ```text
//! u_t + u^2 u_x - a u_x^3 + D^{-2} d_x[(b/3) u^3 + ((6-6a-b)/2) u u_x^2]
//!     + D^{-2}[((2a+b-2)/2) u_x^3] = 0,      D^{-2} = (1 - d_x^2)^{-1}.
//! ```
//!
//! The ansatz `u = p1 e^{-|x-q1|} + p2 e^{-|x-q2|}` reduces the equation to a
//! four-dimensional ODE. The modules cover that ODE and its reduced form
//! ([`dynamics`]), the initial data that force a collision in each sign
//! quadrant of `(a, b)` ([`params`]), the closed-form invariants of the
//! reduced flow ([`analytic`]), adaptive integration with event location
//! ([`integrator`]), the `H^s` distance to the collision profile
//! ([`sobolev`]), and a pointwise check of the PDE itself ([`residual`]).
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! below fix the precision used by the command-line front end.

pub mod analytic;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod params;
pub mod quadrature;
pub mod residual;
pub mod scalar;
pub mod sobolev;

pub use analytic::InvariantContext;
pub use dynamics::{
    evaluate_u, evaluate_ux, from_reduced, from_reduced_checked, full_rhs, reduced_rhs, AuxDiagnostics,
    PeakonState, ReducedState,
};
pub use error::{Error, Result};
pub use integrator::{
    integrate, integrate_reversed, locate_collision, Direction, EventKind, EventRecord, IntegrationConfig,
    Representation, Trajectory,
};
pub use params::{
    compute_mu, l_a, make_initial_profile, resolve_separation, ABParams, CaseId, CaseSpec,
    Classification, Separation,
};
pub use residual::{d_minus2, d_minus2_dx, pde_residual, pde_residual_at, ConvolutionGrid, ResidualOptions, ResidualReport};
pub use scalar::Real;
pub use sobolev::{collision_function, divergence_probe, hs_distance, hs_norm, CollisionFunction, SobolevIndex};

pub type ABParams64 = ABParams<f64>;
pub type CaseSpec64 = CaseSpec<f64>;
pub type PeakonState64 = PeakonState<f64>;
pub type ReducedState64 = ReducedState<f64>;
pub type InvariantContext64 = InvariantContext<f64>;
pub type IntegrationConfig64 = IntegrationConfig<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type EventRecord64 = EventRecord<f64>;
pub type CollisionFunction64 = CollisionFunction<f64>;
pub type SobolevIndex64 = SobolevIndex<f64>;
pub type ResidualReport64 = ResidualReport<f64>;

pub type PeakonState32 = PeakonState<f32>;
pub type ABParams32 = ABParams<f32>;
pub type Trajectory32 = Trajectory<f32>;
