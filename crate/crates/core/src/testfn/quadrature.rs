//! Adaptive Gauss–Legendre quadrature and half-line Fourier integrals.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const GL_ORDER: usize = 16;
const MAX_DEPTH: u32 = 60;

fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut rule = Vec::with_capacity(n);
        for i in 1..=n {
            let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        rule
    })
}

fn fixed<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T) -> T {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    gauss_legendre()
        .iter()
        .map(|&(x, w)| T::lit(w) * f(mid + half * T::lit(x)))
        .sum::<T>()
        * half
}

/// `(integral, error estimate)` of `f` on `[a, b]` by recursive bisection
/// until whole-interval and two-half estimates agree to `tol`.
pub fn adaptive<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T) -> (T, T) {
    let whole = fixed(f, a, b);
    recurse(f, a, b, whole, tol, 0)
}

fn recurse<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T, whole: T, tol: T, depth: u32) -> (T, T) {
    let m = (a + b) * T::lit(0.5);
    let left = fixed(f, a, m);
    let right = fixed(f, m, b);
    let err = (left + right - whole).abs();
    // Below this the difference is rounding noise and halving cannot help.
    let floor = T::lit(64.0) * T::epsilon() * (left.abs() + right.abs());
    if err <= tol.max(floor) || depth >= MAX_DEPTH || m <= a || m >= b {
        return (left + right, err);
    }
    let half_tol = tol * T::lit(0.5);
    let (l, el) = recurse(f, a, m, left, half_tol, depth + 1);
    let (r, er) = recurse(f, m, b, right, half_tol, depth + 1);
    (l + r, el + er)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oscillation {
    Cos,
    Sin,
}

/// Half-line Fourier integral `int_0^inf g(t) w(omega t) dt` with
/// `w = cos` or `sin`, for `g >= 0` decreasing beyond `monotone_from`.
///
/// `tail_mass(T)` must bound `int_T^inf |g|`. The integral is split at the
/// zeros of `w`; once the pieces alternate, the partial sums are
/// accelerated by repeated averaging.
pub fn fourier_half_line<T, G, M>(
    g: &G,
    tail_mass: &M,
    omega: T,
    kind: Oscillation,
    monotone_from: T,
    tol: T,
) -> Result<(T, T)>
where
    T: Scalar,
    G: Fn(T) -> T,
    M: Fn(T) -> T,
{
    let quarter = T::lit(0.25);
    let mut cutoff = T::one();
    while tail_mass(cutoff) > tol * quarter {
        cutoff *= T::lit(2.0);
        if cutoff > T::lit(1e12) {
            return Err(Error::ToleranceUnreached {
                requested: tol.f64(),
                achieved: tail_mass(cutoff).f64(),
            });
        }
    }
    let piece_tol = tol / T::lit(256.0);
    if omega == T::zero() {
        if kind == Oscillation::Sin {
            return Ok((T::zero(), T::zero()));
        }
        let (v, e) = adaptive(g, T::zero(), cutoff, tol * quarter);
        return finish(v, e + tail_mass(cutoff), tol);
    }
    let w = |t: T| match kind {
        Oscillation::Cos => (omega * t).cos(),
        Oscillation::Sin => (omega * t).sin(),
    };
    let integrand = |t: T| g(t) * w(t);
    let half = T::PI() / omega;
    let mut left = T::zero();
    let mut right = match kind {
        Oscillation::Cos => half * T::lit(0.5),
        Oscillation::Sin => half,
    };
    let mut sum = T::zero();
    let mut err = T::zero();
    let mut partials: Vec<T> = Vec::new();
    let mut estimates: Vec<T> = Vec::new();
    const WINDOW: usize = 24;
    const MAX_PIECES: usize = 2_000_000;
    for _ in 0..MAX_PIECES {
        let (v, e) = adaptive(&integrand, left, right.min(cutoff), piece_tol);
        sum += v;
        err += e;
        if right >= cutoff {
            return finish(sum, err + tail_mass(cutoff), tol);
        }
        if left >= monotone_from {
            partials.push(sum);
            if partials.len() > WINDOW {
                let window = &partials[partials.len() - WINDOW - 1..];
                estimates.push(repeated_average(window));
                let k = estimates.len();
                if k >= 3 {
                    let d1 = (estimates[k - 1] - estimates[k - 2]).abs();
                    let d2 = (estimates[k - 2] - estimates[k - 3]).abs();
                    if d1.max(d2) <= tol / T::lit(8.0) {
                        return finish(estimates[k - 1], err + d1.max(d2), tol);
                    }
                }
            }
        }
        left = right;
        right += half;
    }
    Err(Error::ToleranceUnreached {
        requested: tol.f64(),
        achieved: err.f64(),
    })
}

fn finish<T: Scalar>(v: T, err: T, tol: T) -> Result<(T, T)> {
    if err <= tol {
        Ok((v, err))
    } else {
        Err(Error::ToleranceUnreached {
            requested: tol.f64(),
            achieved: err.f64(),
        })
    }
}

/// Euler-type acceleration: average neighbours until one value remains.
fn repeated_average<T: Scalar>(s: &[T]) -> T {
    let mut v = s.to_vec();
    while v.len() > 1 {
        v = v.windows(2).map(|w| (w[0] + w[1]) * T::lit(0.5)).collect();
    }
    v[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        let s: f64 = gauss_legendre().iter().map(|(_, w)| w).sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn polynomial_exact() {
        let (v, _) = adaptive(&|x: f64| x.powi(7) - 3.0 * x * x, 0.0, 2.0, 1e-14);
        assert!((v - (32.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn cusp_at_origin() {
        // int_0^1 sqrt(x) dx = 2/3
        let (v, e) = adaptive(&|x: f64| x.sqrt(), 0.0, 1.0, 1e-13);
        assert!((v - 2.0 / 3.0).abs() < 1e-12, "{v} {e}");
    }

    #[test]
    fn laplace_transform_cosine() {
        // int_0^inf e^-t cos(w t) dt = 1 / (1 + w^2)
        for w in [0.0, 0.5, 3.0, 40.0] {
            let (v, _) = fourier_half_line(
                &|t: f64| (-t).exp(),
                &|t: f64| (-t).exp(),
                w,
                Oscillation::Cos,
                0.0,
                1e-12,
            )
            .unwrap();
            assert!((v - 1.0 / (1.0 + w * w)).abs() < 1e-11, "w = {w}: {v}");
        }
    }

    #[test]
    fn laplace_transform_sine() {
        // int_0^inf e^-t sin(w t) dt = w / (1 + w^2)
        for w in [0.5, 7.0] {
            let (v, _) = fourier_half_line(
                &|t: f64| (-t).exp(),
                &|t: f64| (-t).exp(),
                w,
                Oscillation::Sin,
                0.0,
                1e-12,
            )
            .unwrap();
            assert!((v - w / (1.0 + w * w)).abs() < 1e-11);
        }
    }
}
