use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar used by the distribution, tree and value-of-computation code.
///
/// Implemented for `f32` and `f64`. The complementary error function is the one
/// special function the normal model needs; it is delegated to `libm`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    fn erfc(self) -> Self;

    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("count representable in scalar type")
    }
}

impl Real for f32 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}

impl Real for f64 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

/// A value that may sit at either end of the extended real line.
///
/// Inverse maps through saturating backup stages produce these instead of
/// arbitrary large finite numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended<T> {
    NegInf,
    Finite(T),
    PosInf,
}

impl<T: Real> Extended<T> {
    pub fn to_scalar(self) -> T {
        match self {
            Extended::NegInf => T::neg_infinity(),
            Extended::Finite(v) => v,
            Extended::PosInf => T::infinity(),
        }
    }

    pub fn from_scalar(v: T) -> Self {
        if v == T::infinity() {
            Extended::PosInf
        } else if v == T::neg_infinity() {
            Extended::NegInf
        } else {
            Extended::Finite(v)
        }
    }
}
