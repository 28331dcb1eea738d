//! Derivative-free one-dimensional maximization.

use crate::scalar::Scalar;

/// Interval tolerance used by every optimizer call in the crate.
pub const GOLDEN_TOL: f64 = 1e-10;

/// Maximizes a unimodal `f` on `[a, b]` by golden-section search.
///
/// Returns `(argmax, max)`. The endpoints are compared against the interior
/// result, so a maximum sitting on the boundary is found exactly.
pub fn golden_max<T: Scalar, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let tol = tol.max(T::epsilon().sqrt() * (a.abs() + b.abs()).max(T::one()) * T::lit(1e-3));
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..500 {
        if hi - lo <= tol {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for x in [a, b] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}
