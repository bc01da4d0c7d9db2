//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating point type the capacity math is written against: `f32` or `f64`.
///
/// Tolerances throughout the crate are stated for `f64`. [`Scalar::tol`]
/// widens them to a small multiple of machine epsilon when the type cannot
/// resolve the requested value, so the same code paths stay usable on `f32`.
pub trait Scalar:
    Float + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts a literal. Every `f64` literal used in this crate is
    /// representable (possibly rounded) in both supported types.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// A tolerance of `base`, floored at `64 * epsilon`.
    fn tol(base: f64) -> Self {
        Self::lit(base).max(Self::epsilon() * Self::lit(64.0))
    }

    fn ln2() -> Self {
        Self::lit(std::f64::consts::LN_2)
    }

    /// Widens to `f64` for reporting.
    fn to_f64_lossy(self) -> f64;
}

impl Scalar for f32 {
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

/// `max(1, |x|)`, the scale used by every relative tolerance in the crate.
pub(crate) fn unit_scale<T: Scalar>(x: T) -> T {
    T::one().max(x.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_is_untouched_for_f64() {
        assert_eq!(<f64 as Scalar>::tol(1e-12), 1e-12);
        assert_eq!(<f64 as Scalar>::tol(1e-9), 1e-9);
    }

    #[test]
    fn tolerance_is_floored_for_f32() {
        let t = <f32 as Scalar>::tol(1e-12);
        assert!(t > 1e-6 && t < 1e-4);
    }
}
