//! Scalar abstraction for the numeric kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar with the conversions and compound assignments the
/// kernels need. Implemented by `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + Display
    + Debug
    + Send
    + Sync
    + 'static
{
    /// Iteration tolerance floored at a few machine epsilons, so narrower
    /// types converge to their own precision instead of iterating forever.
    /// Tolerances are specified as `f64` values throughout.
    fn tol(spec: f64) -> Self {
        let floor = Self::epsilon() * real::<Self>(8.0);
        let s = real::<Self>(spec);
        if s < floor {
            floor
        } else {
            s
        }
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum<T>
        + Display
        + Debug
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` constant into the working scalar type.
#[inline]
pub fn real<S: Real>(x: f64) -> S {
    S::from_f64(x).expect("constant must be representable")
}

/// Converts a `usize` into the working scalar type.
#[inline]
pub fn real_of<S: Real>(n: usize) -> S {
    S::from_usize(n).expect("count must be representable")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tol_respects_spec_in_f64() {
        assert_eq!(<f64 as Real>::tol(1e-12), 1e-12);
    }

    #[test]
    fn tol_floors_at_epsilon_in_f32() {
        let t = <f32 as Real>::tol(1e-12);
        assert!(t >= f32::EPSILON);
    }
}
