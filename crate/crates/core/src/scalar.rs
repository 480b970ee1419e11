//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar backing the complex amplitudes: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// A tolerance nominally `nominal` in double precision, floored at a
    /// small multiple of this type's machine epsilon.
    #[inline]
    fn tol(nominal: f64) -> Self {
        Self::lit(nominal).max(Self::epsilon() * Self::lit(64.0))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = num_complex::Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: f64, im: f64) -> C<T> {
    C::new(T::lit(re), T::lit(im))
}

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> C<T> {
    C::new(re, T::zero())
}
