//! Truncated lattice sums with certified remainder bounds.
//!
//! Two routes:
//!
//! * radial: the summand is dominated by `C e^{-a s^beta}` in some `l_q`
//!   norm `s`. Points are counted with the packing bound
//!   `N(s) <= (2s/sigma_q + 1)^n` (disjoint `l_q` balls of radius
//!   `sigma_q / 2`), and the tail is integrated by parts against the
//!   envelope, which reduces to upper incomplete gamma functions.
//! * product: the lattice is an orthogonal product of 1-D lattices and the
//!   summand a product of even, decreasing 1-D factors with only
//!   polynomial decay. Each 1-D sum is bracketed by integrals (or, with a
//!   phase, by Abel summation) and the brackets are multiplied.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{BodySpec, Lattice};
use crate::scalar::{Accumulator, Scalar};
use crate::special::{ln_gamma, ln_gamma_upper};
use crate::testfn::{inv_cosh_rate, Family, TestFunctionSpec, Transform1DTable};
use std::sync::Arc;

/// A truncated sum with a certified enclosure of the full sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifiedSum<T> {
    pub partial: T,
    /// Bound on the omitted part (the full sum is at least `partial` when
    /// `two_sided` is false, within `partial +- remainder_bound` otherwise).
    pub remainder_bound: T,
    pub truncation_radius: T,
    /// Norm the truncation radius refers to (`inf` for the product route).
    pub norm_p: T,
    pub terms: usize,
    /// Bound on floating-point error in `partial`.
    pub roundoff: T,
    pub two_sided: bool,
}

impl<T: Scalar> CertifiedSum<T> {
    pub fn lower(&self) -> T {
        let mut lo = self.partial - self.roundoff;
        if self.two_sided {
            lo -= self.remainder_bound;
        }
        lo
    }

    pub fn upper(&self) -> T {
        self.partial + self.remainder_bound + self.roundoff
    }

    pub fn interval(&self) -> (T, T) {
        (self.lower(), self.upper())
    }

    /// Multiplies by a positive constant.
    pub fn scale(&self, c: T) -> Self {
        CertifiedSum {
            partial: self.partial * c,
            remainder_bound: self.remainder_bound * c,
            roundoff: self.roundoff * c,
            ..*self
        }
    }
}

/// Which function of the pair is summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Function,
    Transform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target<T> {
    /// Remainder at most this fraction of a lower bound on the sum.
    Relative(T),
    /// Remainder at most this value.
    Absolute(T),
}

/// `sum_{x in lattice} h(x + shift) e(x . freq)`, optionally skipping the
/// `x + shift` inside `exclude`.
pub struct SumQuery<'a, T> {
    pub lattice: &'a Lattice<T>,
    pub shift: &'a [T],
    pub freq: Option<&'a [T]>,
    pub spec: &'a TestFunctionSpec<T>,
    pub side: Side,
    pub exclude: Option<BodySpec<T>>,
    pub budget: u64,
}

/// Result of a query: the real part certified, the imaginary part as computed.
#[derive(Debug, Clone, Copy)]
pub struct SumOutput<T> {
    pub sum: CertifiedSum<T>,
    pub imaginary: T,
}

/// `C e^{-a s^beta}` dominating the summand in the `l_q` norm.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Radial {
    pub q: f64,
    pub ln_c: f64,
    pub a: f64,
    pub beta: f64,
}

impl Radial {
    fn g(&self, s: f64) -> f64 {
        (self.ln_c - self.a * s.powf(self.beta)).exp()
    }

    /// `int_R^inf (2s/sigma + 1)^n |G'(s)| ds`.
    fn count_integral(&self, r: f64, sigma: f64, n: usize) -> f64 {
        let x = self.a * r.powf(self.beta);
        let mut total = 0.0;
        for k in 0..=n {
            let kb = k as f64 / self.beta;
            let ln_binom = ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0)
                - ln_gamma((n - k) as f64 + 1.0);
            let ln_term = self.ln_c + ln_binom + k as f64 * (2.0 / sigma).ln() - kb * self.a.ln()
                + ln_gamma_upper(1.0 + kb, x);
            total += ln_term.exp();
        }
        total
    }

    /// Certified tail beyond `r` given the exact count `n_r` of points within `r`.
    fn tail(&self, r: f64, sigma: f64, n: usize, n_r: usize) -> f64 {
        let i = self.count_integral(r, sigma, n);
        let known = self.g(r) * n_r as f64;
        (i - known).max(0.0) + 1e-13 * i
    }
}

/// Even, decreasing 1-D factor with polynomial decay.
#[derive(Debug, Clone)]
pub(crate) enum Factor {
    /// `2 / (1 + 4 pi^2 y^2)`
    ExpL1Transform,
    Table(Arc<Transform1DTable>),
}

impl Factor {
    fn h(&self, y: f64) -> f64 {
        match self {
            Factor::ExpL1Transform => {
                let c = 2.0 * std::f64::consts::PI * y;
                2.0 / (1.0 + c * c)
            }
            Factor::Table(t) => t.eval(y).max(0.0),
        }
    }

    /// `int_y^inf h`; only called with `y >= self.tail_start()`.
    fn integral_from(&self, y: f64) -> f64 {
        match self {
            Factor::ExpL1Transform => {
                (1.0 / (2.0 * std::f64::consts::PI * y)).atan() / std::f64::consts::PI
            }
            Factor::Table(t) => t.tail_integral(y).0.max(0.0),
        }
    }

    /// Bound on the error of one `h(y)` value.
    fn value_error(&self, y: f64) -> f64 {
        match self {
            Factor::ExpL1Transform => 4.0 * f64::EPSILON * self.h(y),
            Factor::Table(t) => t.error_bound(y),
        }
    }

    /// Bound on the error of `integral_from(y)`.
    fn integral_error(&self, y: f64) -> f64 {
        match self {
            Factor::ExpL1Transform => 0.0,
            Factor::Table(t) => t.tail_integral(y).1,
        }
    }

    /// Where `integral_from` becomes valid.
    fn tail_start(&self) -> f64 {
        match self {
            Factor::ExpL1Transform => 0.0,
            Factor::Table(t) => t.r_end(),
        }
    }
}

pub(crate) enum Envelope {
    Radial(Radial),
    Product(Factor),
}

pub(crate) fn envelope<T: Scalar>(spec: &TestFunctionSpec<T>, side: Side) -> Result<Envelope> {
    let n = spec.dim() as f64;
    let pi = std::f64::consts::PI;
    let radial = |q: f64, ln_c: f64, a: f64, beta: f64| Envelope::Radial(Radial { q, ln_c, a, beta });
    Ok(match (spec.family(), side) {
        (Family::Gaussian, _) => radial(2.0, 0.0, pi, 2.0),
        // sech(y) <= 2 e^{-|y|}
        (Family::SechProduct, _) => radial(1.0, n * 2f64.ln(), pi, 1.0),
        // 1 / (1 + 2 cosh y) <= e^{-|y|}
        (Family::InvCoshProduct, _) => radial(1.0, 0.0, inv_cosh_rate::<f64>(), 1.0),
        (Family::ExpL1, Side::Function) => radial(1.0, 0.0, 1.0, 1.0),
        (Family::ExpL1, Side::Transform) => Envelope::Product(Factor::ExpL1Transform),
        (Family::Supergaussian, Side::Function) => {
            let p = spec.p().expect("exponent").f64();
            // ||x||_p >= ||x||_1 for p <= 1, so count in l1 then.
            radial(p.max(1.0), 0.0, 1.0, p)
        }
        (Family::Supergaussian, Side::Transform) => {
            let t = spec.table().ok_or(Error::MissingTable {
                p: spec.p().map(|p| p.f64()).unwrap_or(f64::NAN),
            })?;
            Envelope::Product(Factor::Table(t.clone()))
        }
    })
}

fn summand<T: Scalar>(spec: &TestFunctionSpec<T>, side: Side, x: &[T]) -> Result<T> {
    match side {
        Side::Function => Ok(spec.eval_f(x)),
        Side::Transform => spec.eval_fhat(x),
    }
}

fn phase<T: Scalar>(x: &[T], freq: Option<&[T]>) -> (T, T) {
    match freq {
        None => (T::one(), T::zero()),
        Some(f) => {
            let mut dot = 0.0f64;
            for (a, b) in x.iter().zip(f) {
                dot += a.f64() * b.f64();
            }
            // reduce before the trig call to keep large arguments accurate
            let turns = dot - dot.round();
            let ang = 2.0 * std::f64::consts::PI * turns;
            (T::lit(ang.cos()), T::lit(ang.sin()))
        }
    }
}

fn roundoff<T: Scalar>(abs_sum: T) -> T {
    T::lit(256.0) * T::epsilon() * abs_sum
}

/// Certifies the query, picking the truncation so the remainder meets `target`.
pub fn certify<T: Scalar>(q: &SumQuery<'_, T>, target: Target<T>) -> Result<SumOutput<T>> {
    check_query(q)?;
    match envelope(q.spec, q.side)? {
        Envelope::Radial(env) => {
            let goal = match target {
                Target::Absolute(e) => e.f64(),
                Target::Relative(tol) => tol.f64() * lower_estimate(q)?.f64(),
            };
            let sigma = q.lattice.shortest_vector_budget(T::lit(env.q), q.budget)?.sigma.f64();
            let r = radius_for(&env, sigma, q.lattice.dim(), goal, q);
            radial_sum(q, &env, sigma, r)
        }
        Envelope::Product(factor) => product_sum(q, &factor, target),
    }
}

/// The same sum truncated at a fixed radius (radial route only).
pub fn certify_at_radius<T: Scalar>(q: &SumQuery<'_, T>, radius: T) -> Result<SumOutput<T>> {
    check_query(q)?;
    match envelope(q.spec, q.side)? {
        Envelope::Radial(env) => {
            let sigma = q.lattice.shortest_vector_budget(T::lit(env.q), q.budget)?.sigma.f64();
            radial_sum(q, &env, sigma, radius.f64())
        }
        Envelope::Product(_) => Err(Error::Unsupported(
            "fixed-radius truncation needs an exponentially decaying summand".into(),
        )),
    }
}

fn check_query<T: Scalar>(q: &SumQuery<'_, T>) -> Result<()> {
    let n = q.lattice.dim();
    if q.spec.dim() != n || q.shift.len() != n || q.freq.is_some_and(|f| f.len() != n) {
        return Err(Error::Precondition(format!(
            "dimension mismatch: lattice {n}, function {}, shift {}",
            q.spec.dim(),
            q.shift.len()
        )));
    }
    Ok(())
}

/// A single term of the sum: the summand at the lattice point nearest `-shift`.
fn lower_estimate<T: Scalar>(q: &SumQuery<'_, T>) -> Result<T> {
    let neg: Vec<T> = q.shift.iter().map(|s| -*s).collect();
    let coords: Vec<i64> = q
        .lattice
        .coordinates(&neg)
        .iter()
        .map(|c| c.round().to_i64().unwrap_or(0))
        .collect();
    let pt = crate::lattice::LatticePoint::from_coords(q.lattice, coords);
    let x: Vec<T> = pt.embedding.iter().zip(q.shift).map(|(a, b)| *a + *b).collect();
    let v = summand(q.spec, q.side, &x)?;
    Ok(v.max(T::min_positive_value()))
}

fn radius_for<T: Scalar>(env: &Radial, sigma: f64, n: usize, goal: f64, q: &SumQuery<'_, T>) -> f64 {
    let goal = goal.max(1e-300);
    let mut min_r = 0.0f64;
    if let Some(k) = q.exclude {
        // radius of the l_q ball containing K
        let (p, r) = (k.p.f64(), k.radius.f64());
        let factor = if env.q < p { (n as f64).powf(1.0 / env.q - 1.0 / p) } else { 1.0 };
        min_r = r * factor;
    }
    let bound = |r: f64| env.count_integral(r, sigma, n);
    let mut hi = sigma.max(1e-3).max(min_r);
    let mut steps = 0;
    while bound(hi) > goal && steps < 200 {
        hi *= 2.0;
        steps += 1;
    }
    let mut lo = (hi / 2.0).max(min_r);
    if bound(lo) <= goal {
        return lo;
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if bound(mid) > goal {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn radial_sum<T: Scalar>(q: &SumQuery<'_, T>, env: &Radial, sigma: f64, r: f64) -> Result<SumOutput<T>> {
    let n = q.lattice.dim();
    let mut re = Accumulator::<T>::new();
    let mut im = Accumulator::<T>::new();
    let mut abs = Accumulator::<T>::new();
    let mut x = vec![T::zero(); n];
    let mut err: Option<Error> = None;
    let mut included = 0usize;
    let visited = q
        .lattice
        .for_each_in_ball(q.shift, T::lit(r), T::lit(env.q), q.budget, |_, lambda| {
            for ((xi, l), s) in x.iter_mut().zip(lambda).zip(q.shift) {
                *xi = *l + *s;
            }
            if q.exclude.is_some_and(|k| k.contains(&x)) {
                return;
            }
            match summand(q.spec, q.side, &x) {
                Ok(h) => {
                    let (c, s) = phase(lambda, q.freq);
                    re.add(h * c);
                    im.add(h * s);
                    abs.add(h);
                    included += 1;
                }
                Err(e) => err = Some(e),
            }
        })
        .map_err(|e| match e {
            Error::BudgetExceeded { what, budget, found, .. } => Error::BudgetExceeded {
                what,
                budget,
                found,
                remainder: Some(env.count_integral(r, sigma, n)),
            },
            other => other,
        })?;
    if let Some(e) = err {
        return Err(e);
    }
    let remainder = env.tail(r, sigma, n, visited);
    Ok(SumOutput {
        sum: CertifiedSum {
            partial: re.value(),
            remainder_bound: T::lit(remainder),
            truncation_radius: T::lit(r),
            norm_p: T::lit(env.q),
            terms: included,
            roundoff: roundoff(abs.value()),
            two_sided: q.freq.is_some(),
        },
        imaginary: im.value(),
    })
}

/// Splits a lattice into axis-parallel 1-D lattices: `(spacing per axis)`.
fn axis_spacings<T: Scalar>(l: &Lattice<T>) -> Option<Vec<f64>> {
    let n = l.dim();
    let mut spacing = vec![0.0f64; n];
    for row in l.reduced_basis() {
        let nz: Vec<usize> = (0..n).filter(|&j| row[j] != T::zero()).collect();
        if nz.len() != 1 || spacing[nz[0]] != 0.0 {
            return None;
        }
        spacing[nz[0]] = row[nz[0]].abs().f64();
    }
    Some(spacing)
}

/// One-dimensional sum `sum_k h(d k + w) e((d k) theta)` over `|d k + w| <= y`
/// as `(re, im, sum |h|, terms, tail_lo, tail_hi, value error)`; the tails
/// bound the modulus of the omitted part (`tail_lo` only meaningful without
/// a phase) and the last entry bounds the error in `re + i im` coming from
/// inexact `h` values.
fn axis_sum(f: &Factor, d: f64, w: f64, theta: f64, y: f64) -> AxisSum {
    let k_lo = ((-y - w) / d).ceil() as i64;
    let k_hi = ((y - w) / d).floor() as i64;
    let mut re = Accumulator::<f64>::new();
    let mut im = Accumulator::<f64>::new();
    let mut abs = Accumulator::<f64>::new();
    let mut err = 0.0f64;
    for k in k_lo..=k_hi {
        let pos = d * k as f64 + w;
        let h = f.h(pos);
        err += f.value_error(pos);
        let turns = d * k as f64 * theta;
        let ang = 2.0 * std::f64::consts::PI * (turns - turns.round());
        re.add(h * ang.cos());
        im.add(h * ang.sin());
        abs.add(h);
    }
    let up = d * (k_hi + 1) as f64 + w;
    let down = -(d * (k_lo - 1) as f64 + w);
    let slack = (f.integral_error(up) + f.integral_error(down)) / d;
    let lo = ((f.integral_from(up) + f.integral_from(down)) / d - slack).max(0.0);
    let slack = (f.integral_error(up - d) + f.integral_error(down - d)) / d;
    let hi = (f.integral_from(up - d) + f.integral_from(down - d)) / d + slack;
    let osc = (std::f64::consts::PI * d * theta).sin().abs();
    let hi = if theta != 0.0 && osc > 1e-6 {
        let edge = f.h(up) + f.h(down) + f.value_error(up) + f.value_error(down);
        hi.min(edge / osc)
    } else {
        hi
    };
    let terms = (k_hi - k_lo + 1).max(0) as u64;
    (re.value(), im.value(), abs.value(), terms, lo, hi, err)
}

type AxisSum = (f64, f64, f64, u64, f64, f64, f64);

fn product_sum<T: Scalar>(q: &SumQuery<'_, T>, f: &Factor, target: Target<T>) -> Result<SumOutput<T>> {
    if q.exclude.is_some() {
        return Err(Error::Unsupported("excluded bodies need an exponentially decaying summand".into()));
    }
    let spacing = axis_spacings(q.lattice).ok_or_else(|| {
        Error::Unsupported(
            "slowly decaying transform sums are only certified on axis-aligned product lattices"
                .into(),
        )
    })?;
    let dmax = spacing.iter().cloned().fold(0.0, f64::max);
    let mut y = (f.tail_start() + 2.0 * dmax).max(4.0 * dmax);
    let oscillating = q.freq.is_some();
    loop {
        let terms: u64 = spacing.iter().map(|d| (2.0 * y / d) as u64 + 1).sum();
        if terms > q.budget {
            return Err(Error::BudgetExceeded {
                what: "one-dimensional sum terms",
                budget: q.budget,
                found: 0,
                remainder: None,
            });
        }
        // product of complex centres c_i with radii eps_i
        let (mut pr, mut pi) = (1.0f64, 0.0f64);
        let mut mod_c = 1.0f64;
        let mut mod_hi = 1.0f64;
        // includes the error of inexact factor values, which no radius removes
        let mut mod_all = 1.0f64;
        let mut abs_total = 1.0f64;
        let mut count = 1usize;
        for (axis, d) in spacing.iter().enumerate() {
            let w = q.shift[axis].f64();
            let theta = q.freq.map(|fr| fr[axis].f64()).unwrap_or(0.0);
            let (re, im, abs, k, lo, hi, err) = axis_sum(f, *d, w, theta, y);
            let (cr, ci, eps) = if oscillating {
                (re, im, hi)
            } else {
                (re + 0.5 * (lo + hi), im, 0.5 * (hi - lo))
            };
            let (nr, ni) = (pr * cr - pi * ci, pr * ci + pi * cr);
            pr = nr;
            pi = ni;
            let m = cr.hypot(ci);
            mod_c *= m;
            mod_hi *= m + eps;
            mod_all *= m + eps + err;
            abs_total *= abs + hi;
            count *= k as usize;
        }
        let truncation = (mod_hi - mod_c).max(0.0) * (1.0 + 1e-12);
        let remainder = (mod_all - mod_c).max(0.0) * (1.0 + 1e-12);
        let goal = match target {
            Target::Absolute(e) => e.f64(),
            Target::Relative(tol) => tol.f64() * pr.abs(),
        };
        // no point truncating far below the floor set by the factor values
        if truncation <= goal.max(remainder - truncation) {
            return Ok(SumOutput {
                sum: CertifiedSum {
                    partial: T::lit(pr),
                    remainder_bound: T::lit(remainder),
                    truncation_radius: T::lit(y),
                    norm_p: T::infinity(),
                    terms: count,
                    roundoff: roundoff(T::lit(abs_total)),
                    two_sided: true,
                },
                imaginary: T::lit(pi),
            });
        }
        y *= 2.0;
    }
}
