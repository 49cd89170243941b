use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumCast, ToPrimitive};

/// Floating-point scalar the estimators are generic over.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumCast + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("finite scalar converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub(crate) fn dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y)).sqrt()
}

/// Jung's constant `sqrt(2d/(d+1))`.
pub fn jung_constant<T: Real>(d: usize) -> T {
    let d = T::from_usize_lossy(d);
    (T::lit(2.0) * d / (d + T::one())).sqrt()
}

/// Sub-Gaussian rate `sigma * sqrt(2 ln(1/delta) / n)`.
pub fn sub_gaussian_rate<T: Real>(sigma: T, delta: T, n: usize) -> T {
    sigma * (T::lit(2.0) * delta.recip().ln() / T::from_usize_lossy(n)).sqrt()
}
