//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point type the simulator is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Amplitudes with modulus below this value are dropped after every linear operation.
    fn prune_threshold() -> Self;

    /// Converts an `f64` literal into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }
}

impl Real for f64 {
    fn prune_threshold() -> Self {
        1e-14
    }
}

impl Real for f32 {
    fn prune_threshold() -> Self {
        1e-6
    }
}

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub fn real<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// `sqrt(n!)` computed as a running product of square roots to stay finite for large `n`.
pub fn sqrt_factorial<T: Real>(n: usize) -> T {
    (2..=n).fold(T::one(), |acc, k| acc * T::from_count(k).sqrt())
}

pub fn factorial<T: Real>(n: usize) -> T {
    (2..=n).fold(T::one(), |acc, k| acc * T::from_count(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_factorial_matches_direct() {
        for n in 0..12 {
            let direct = factorial::<f64>(n).sqrt();
            assert!((sqrt_factorial::<f64>(n) - direct).abs() <= 1e-12 * direct);
        }
    }
}
