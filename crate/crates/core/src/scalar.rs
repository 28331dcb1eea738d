//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
///
/// Everything geometric (bases, enumeration, sums, optimizers) is written
/// against this trait. Special functions (gamma, incomplete gamma) are
/// evaluated in `f64` and converted, so `f32` runs lose nothing there.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn from_i64_lossy(n: i64) -> Self {
        Self::from_i64(n).expect("i64 representable")
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `||x||_p` for `0 < p <= inf` (a quasi-norm when `p < 1`).
pub fn norm_p<T: Scalar>(x: &[T], p: T) -> T {
    if p.is_infinite() {
        return x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    }
    if p == T::one() {
        return x.iter().map(|v| v.abs()).sum();
    }
    if p == T::lit(2.0) {
        return x.iter().map(|v| *v * *v).sum::<T>().sqrt();
    }
    let s: T = x.iter().map(|v| v.abs().powf(p)).sum();
    s.powf(p.recip())
}

/// `||x||_p^p` (for finite `p`).
pub fn norm_p_pow<T: Scalar>(x: &[T], p: T) -> T {
    if p == T::lit(2.0) {
        return x.iter().map(|v| *v * *v).sum();
    }
    x.iter().map(|v| v.abs().powf(p)).sum()
}

/// Neumaier-compensated accumulator for long positive sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator<T> {
    sum: T,
    comp: T,
    count: usize,
}

impl<T: Scalar> Accumulator<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
            count: 0,
        }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.count += 1;
    }

    pub fn value(&self) -> T {
        self.sum + self.comp
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// Rounds to 12 significant digits; used for every number in emitted reports.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.11e}", x).parse().unwrap_or(x)
}
