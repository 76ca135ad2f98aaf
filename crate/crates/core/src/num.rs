//! Scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar the models and encoders are generic over: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossless for the integer counts the samplers produce (< 2^24 for `f32`).
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as float")
    }

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to Real")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Correctly rounded sum of `values`: the exact mathematical sum rounded once.
///
/// Shewchuk's partials algorithm (the same one behind Python's `math.fsum`).
/// Falls back to naive summation if any input is non-finite.
pub fn exact_sum<T: Float>(values: impl IntoIterator<Item = T>) -> T {
    let mut partials: Vec<T> = Vec::new();
    let mut special = T::zero();
    let mut has_special = false;

    for mut x in values {
        if !x.is_finite() {
            special = special + x;
            has_special = true;
            continue;
        }
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != T::zero() {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    if has_special {
        return special;
    }

    let mut n = partials.len();
    if n == 0 {
        return T::zero();
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = T::zero();
    while n > 0 {
        let x = hi;
        let y = partials[n - 1];
        n -= 1;
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != T::zero() {
            break;
        }
    }
    // Half-way case: make the final rounding agree with the remaining partials.
    if n > 0
        && ((lo < T::zero() && partials[n - 1] < T::zero())
            || (lo > T::zero() && partials[n - 1] > T::zero()))
    {
        let y = lo + lo;
        let x = hi + y;
        let yr = x - hi;
        if y == yr {
            hi = x;
        }
    }
    hi
}

/// Round half up and clamp into a color channel.
pub(crate) fn channel<T: Real>(x: T) -> u8 {
    let v = (x.to_f64_lossy() + 0.5).floor();
    v.clamp(0.0, 255.0) as u8
}
