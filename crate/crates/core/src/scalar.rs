//! Scalar abstraction shared by every module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Floating point scalar: f32 or f64.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an f64 literal. Every f64 is representable (possibly rounded) in f32.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal is representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(k: usize) -> Self {
        Self::lit(k as f64)
    }

    #[inline]
    fn from_i64_lossy(k: i64) -> Self {
        Self::lit(k as f64)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    comp: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), comp: T::zero() }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn compensated_sum<T: Real, I: IntoIterator<Item = T>>(items: I) -> T {
    let mut acc = CompensatedSum::new();
    for x in items {
        acc.add(x);
    }
    acc.value()
}

/// Japanese bracket `(1 + |x|^2)^{1/2}`.
#[inline]
pub fn bracket<T: Real>(x: &[T]) -> T {
    (T::one() + x.iter().fold(T::zero(), |s, &v| s + v * v)).sqrt()
}

/// Euclidean length.
#[inline]
pub fn euclid<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |s, &v| s + v * v).sqrt()
}

/// Euclidean length of an integer point, as a real.
#[inline]
pub fn euclid_int<T: Real>(x: &[i64]) -> T {
    T::lit(x.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let xs = [1.0e16_f64, 1.0, -1.0e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn bracket_of_origin_is_one() {
        assert_eq!(bracket::<f64>(&[0.0, 0.0]), 1.0);
        assert!((bracket::<f32>(&[3.0, 4.0]) - 26f32.sqrt()).abs() < 1e-6);
    }
}
