//! Scalar abstraction: the whole library is generic over the floating
//! point type through this trait.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating point scalar usable everywhere in the library: f32 or f64.
pub trait Real:
    Float + FromPrimitive + Sum + fmt::Debug + fmt::Display + serde::Serialize + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for converting an f64 literal into the generic scalar.
#[inline]
pub fn lit<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("f64 literal must convert into the scalar type")
}
