//! Floating-point scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// A real scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative tolerance used for rate-matrix row closure.
    ///
    /// `1e-9` for `f64`; widened to a few ulps for narrower types.
    #[inline]
    fn row_tolerance() -> Self {
        let floor = Self::of(1e-9);
        let ulps = Self::epsilon() * Self::of(64.0);
        if ulps > floor {
            ulps
        } else {
            floor
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
