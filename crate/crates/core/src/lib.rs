//! Numerical laboratory for blow-up and lifespan estimates of the damped
//! wave equation with combined power nonlinearities,
//!
//! ```text
//! u_tt − Δu + μ(1+t)^{−β} u_t = |u_t|^p + |u|^q,   β > 1,
//! u(x,0) = ε f(x),   u_t(x,0) = ε g(x),
//! ```
//!
//! with nonnegative, compactly supported radial data. The crate provides
//!
//! * [`exponents`] — critical exponents (Fujita, Strauss, Glassey) and the
//!   admissibility regions of the two lifespan upper bounds;
//! * [`special`] — the test-function apparatus: φ₁, ψ = e^{−t}φ₁, the
//!   damping multiplier m(t), and weighted radial integrals;
//! * [`iteration`] — the iteration argument run as arithmetic: explicit
//!   constants, lower-bound sequences, divergence envelopes, and the
//!   resulting blow-up time bounds `T ≤ C ε^{−k}`;
//! * [`solver`] — a radially symmetric finite-difference solver that tracks
//!   the functionals behind the argument and measures numerical lifespans;
//! * [`sweep`] — ε-sweeps fitting the empirical lifespan scaling against the
//!   predicted exponents.
//!
//! All numerics are generic over the scalar type through [`num::Real`]
//! (f32 or f64); the concrete aliases below fix f64, which is what the
//! command-line tool uses.

// Guards of the form `!(x > T::zero())` are NaN-rejecting on purpose;
// the suggested `x <= 0` would silently accept NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exponents;
pub mod field;
pub mod num;
pub mod params;
pub mod quad;
pub mod special;

pub mod config;
pub mod iteration;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
pub use params::ModelParams;

/// Default scalar precision of the command-line tool.
pub type Scalar = f64;

pub type ModelParams64 = params::ModelParams<f64>;
pub type RadialField64 = field::RadialField<f64>;
pub type Multiplier64 = special::Multiplier<f64>;
pub type IterationConstants64 = iteration::IterationConstants<f64>;
pub type SolverConfig64 = solver::SolverConfig<f64>;
pub type SolverTrace64 = solver::SolverTrace<f64>;
pub type SweepResult64 = sweep::SweepResult<f64>;
