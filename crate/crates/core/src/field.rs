//! Radially symmetric fields sampled on a uniform r-grid.

use crate::error::{Error, Result};
use crate::num::Real;

/// A radial function sampled at `r_i = i·dr`, `i = 0..=N`, together with the
/// dimension it lives in.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField<T> {
    n: u32,
    dr: T,
    values: Vec<T>,
}

impl<T: Real> RadialField<T> {
    pub fn new(n: u32, dr: T, values: Vec<T>) -> Result<Self> {
        if n < 1 {
            return Err(Error::Config("n: radial field needs n >= 1".into()));
        }
        if !(dr > T::zero()) || !dr.is_finite() {
            return Err(Error::Config(format!(
                "dr: must be finite and > 0, got {dr}"
            )));
        }
        if values.len() < 3 {
            return Err(Error::Config(
                "radial field needs at least 3 samples".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(
                "radial field contains non-finite samples".into(),
            ));
        }
        Ok(Self { n, dr, values })
    }

    /// Construction without the finiteness check, for snapshots of states
    /// that may legitimately contain non-finite samples (post-blow-up).
    pub(crate) fn new_unchecked(n: u32, dr: T, values: Vec<T>) -> Self {
        Self { n, dr, values }
    }

    /// Sample `f(r_i)` on `len` grid points.
    pub fn from_fn(n: u32, dr: T, len: usize, f: impl Fn(T) -> T) -> Result<Self> {
        let values = (0..len).map(|i| f(dr * T::of_usize(i))).collect();
        Self::new(n, dr, values)
    }

    pub fn zeros(n: u32, dr: T, len: usize) -> Result<Self> {
        Self::new(n, dr, vec![T::zero(); len])
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dr(&self) -> T {
        self.dr
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least 3 samples
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn r(&self, i: usize) -> T {
        self.dr * T::of_usize(i)
    }

    /// Outer grid radius `N·dr`.
    pub fn extent(&self) -> T {
        self.r(self.values.len() - 1)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Largest radius whose sample exceeds `threshold` in magnitude
    /// (zero if none does).
    pub fn support_extent(&self, threshold: T) -> T {
        for i in (0..self.values.len()).rev() {
            if self.values[i].abs() > threshold {
                return self.r(i);
            }
        }
        T::zero()
    }

    /// True when the outermost two samples carry no more than `rel_tol`
    /// of the field's maximum amplitude.
    pub fn boundary_is_quiet(&self, rel_tol: T) -> bool {
        let cap = rel_tol * self.max_abs();
        let len = self.values.len();
        self.values[len - 2..].iter().all(|v| v.abs() <= cap)
    }
}
