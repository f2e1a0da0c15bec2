//! Problem parameters for the damped wave equation
//! `u_tt − Δu + μ(1+t)^{−β} u_t = |u_t|^p + |u|^q`.

use crate::error::{Error, Result};
use crate::num::Real;

/// Single source of truth for the model parameters, shared by every module.
///
/// `beta` may be any real (the theorem checkers require `beta > 1`); `mu` may
/// be zero so that the undamped solver validation cases are expressible, while
/// the theorem checkers require `mu > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    /// Spatial dimension, n ≥ 1.
    pub n: u32,
    /// Damping amplitude μ ≥ 0.
    pub mu: T,
    /// Damping decay exponent β.
    pub beta: T,
    /// Power on the derivative nonlinearity |u_t|^p, p > 1.
    pub p: T,
    /// Power on the solution nonlinearity |u|^q, q > 1.
    pub q: T,
    /// Support radius R ≥ 1 of the initial data.
    pub support_radius: T,
    /// Initial-data amplitude ε ≥ 0.
    pub eps: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(n: u32, mu: T, beta: T, p: T, q: T, support_radius: T, eps: T) -> Result<Self> {
        if n < 1 {
            return Err(Error::Config("n: dimension must satisfy n >= 1".into()));
        }
        if !(mu >= T::zero()) || !mu.is_finite() {
            return Err(Error::Config(format!(
                "mu: must be finite and >= 0, got {mu}"
            )));
        }
        if !beta.is_finite() {
            return Err(Error::Config(format!("beta: must be finite, got {beta}")));
        }
        if !(p > T::one()) {
            return Err(Error::Config(format!("p: must satisfy p > 1, got {p}")));
        }
        if !(q > T::one()) {
            return Err(Error::Config(format!("q: must satisfy q > 1, got {q}")));
        }
        if !(support_radius >= T::one()) {
            return Err(Error::Config(format!(
                "R: support radius must satisfy R >= 1, got {support_radius}"
            )));
        }
        if !(eps >= T::zero()) || !eps.is_finite() {
            return Err(Error::Config(format!(
                "eps: must be finite and >= 0, got {eps}"
            )));
        }
        Ok(Self {
            n,
            mu,
            beta,
            p,
            q,
            support_radius,
            eps,
        })
    }

    /// Same parameters with a different data amplitude.
    pub fn with_eps(mut self, eps: T) -> Self {
        self.eps = eps;
        self
    }

    /// Dimension as a scalar.
    pub fn nf(&self) -> T {
        T::of_u32(self.n)
    }
}
