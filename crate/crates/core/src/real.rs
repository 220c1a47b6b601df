use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar the library is generic over.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + std::iter::Sum
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn from_usize_(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    fn to_f64_(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    fn c(re: f64, im: f64) -> Complex<Self> {
        Complex::new(Self::lit(re), Self::lit(im))
    }

    fn zero_c() -> Complex<Self> {
        Complex::new(Self::zero(), Self::zero())
    }

    fn i_c() -> Complex<Self> {
        Complex::new(Self::zero(), Self::one())
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub(crate) fn to_c64<T: Real>(z: Complex<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64_(), z.im.to_f64_())
}

pub(crate) fn from_c64<T: Real>(z: Complex<f64>) -> Complex<T> {
    Complex::new(T::lit(z.re), T::lit(z.im))
}
