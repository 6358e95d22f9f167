//! Scalar abstraction shared by every grid type.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumCast, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real type a grid is sampled in.
///
/// Everything numeric in this crate is written against this trait. Internal
/// ball sums are accumulated exactly in fixed point, so the choice of scalar
/// only affects how values are stored and reported.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumCast
    + Default
    + Debug
    + Display
    + FromStr
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Lossless for `f64`, rounding to nearest for `f32`.
    fn of(v: f64) -> Self;

    fn f64(self) -> f64;

    /// Machine epsilon, as f64.
    const EPS: f64;
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn of(v: f64) -> Self {
                v as $t
            }

            #[inline]
            fn f64(self) -> f64 {
                self as f64
            }

            const EPS: f64 = <$t>::EPSILON as f64;
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// Converts an index count to the scalar type.
#[inline]
pub(crate) fn from_usize<T: Scalar>(n: usize) -> T {
    T::of(n as f64)
}

#[inline]
pub(crate) fn from_i64<T: Scalar>(n: i64) -> T {
    T::of(n as f64)
}
