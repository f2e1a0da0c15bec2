//! Scalar abstraction: every numerical routine in this crate is generic over
//! a floating-point type implementing [`Real`].

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar usable throughout the crate (f32 or f64).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + fmt::Display
    + fmt::Debug
    + fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lift an f64 literal into the scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal not representable in scalar type")
    }

    /// Lift a small integer into the scalar type.
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize not representable in scalar type")
    }

    /// Lift a dimension count into the scalar type.
    fn of_u32(x: u32) -> Self {
        Self::from_u32(x).expect("u32 not representable in scalar type")
    }

    /// Lossy view as f64, for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
