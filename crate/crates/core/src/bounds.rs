//! Tail functionals, their closed forms, and the transference/kissing bounds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimize::{golden_max, GOLDEN_TOL};
use crate::scalar::Scalar;
use crate::testfn::{Family, TestFunctionSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NuMethod {
    ClosedForm,
    NormOptimizer,
    /// Product-of-`1/(1 + 2 cosh)` bound on an l1 ball.
    CoshProduct,
}

/// An upper bound (or exact value) for the tail functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NuBound<T> {
    pub value: T,
    pub method: NuMethod,
    /// Maximizing scale `u` in the denominator, when one was searched for.
    pub u_star: Option<T>,
}

/// `ln g(s)` for the radial profile of a gaussian or supergaussian.
fn radial_log_profile<T: Scalar>(spec: &TestFunctionSpec<T>) -> Result<impl Fn(T) -> T> {
    let p = match spec.family() {
        Family::Gaussian => None,
        Family::Supergaussian => spec.p(),
        other => {
            return Err(Error::Unsupported(format!(
                "{} is not radial in an lp norm",
                other.name()
            )))
        }
    };
    Ok(move |s: T| match p {
        None => -T::PI() * s * s,
        Some(p) => -s.abs().powf(p),
    })
}

/// `g(r) / sup_{0 < u <= 1} u^n g(u r)` by golden-section search over `u`.
pub fn mu_norm<T: Scalar>(spec: &TestFunctionSpec<T>, r: T, n: usize) -> Result<NuBound<T>> {
    if !(r > T::zero()) || !r.is_finite() {
        return Err(Error::Domain(format!("radius must be positive (got {r})")));
    }
    let log_g = radial_log_profile(spec)?;
    let nn = T::from_usize_lossy(n);
    let objective = |u: T| nn * u.ln() + log_g(u * r);
    let (u_star, best) = golden_max(objective, T::zero(), T::one(), T::lit(GOLDEN_TOL));
    let value = (log_g(r) - best).exp().min(T::one());
    Ok(NuBound { value, method: NuMethod::NormOptimizer, u_star: Some(u_star) })
}

/// `(2 e^{1 - 2 tau} tau)^{n/2}`: the gaussian functional at `r = sqrt(tau n / pi)`.
pub fn gaussian_nu_closed_form<T: Scalar>(tau: T, n: usize) -> Result<T> {
    if !(tau >= T::lit(0.5)) {
        return Err(Error::Domain(format!("tau = {tau} below 1/2")));
    }
    let half_n = T::from_usize_lossy(n) * T::lit(0.5);
    let two = T::lit(2.0);
    Ok((half_n * (two.ln() + T::one() - two * tau + tau.ln())).exp())
}

/// Radius `sqrt(tau n / pi)` matching a gaussian parameter `tau`.
pub fn gaussian_radius<T: Scalar>(tau: T, n: usize) -> T {
    (tau * T::from_usize_lossy(n) / T::PI()).sqrt()
}

/// `(e t^p e^{-t^p})^{n/p}` with `t = r / (n/p)^{1/p}`.
pub fn supergaussian_mu_closed_form<T: Scalar>(p: T, r: T, n: usize) -> Result<T> {
    if !(p > T::zero() && p <= T::lit(2.0)) {
        return Err(Error::Domain(format!("exponent p = {p} outside (0, 2]")));
    }
    let np = T::from_usize_lossy(n) / p;
    let t = r / np.powf(p.recip());
    // Rounding in r = t (n/p)^{1/p} may land a hair under 1.
    if !(t >= T::one() - T::lit(64.0) * T::epsilon()) {
        return Err(Error::Domain(format!("t = {t} below 1 (radius under the threshold)")));
    }
    let tp = t.powf(p).max(T::one());
    Ok((np * (T::one() + tp.ln() - tp)).exp())
}

/// `z - z tanh z / (1 + sech(z) / 2)`.
pub fn cstar_objective<T: Scalar>(z: T) -> T {
    let sech = z.cosh().recip();
    z - z * z.tanh() / (T::one() + sech * T::lit(0.5))
}

/// `(z*, C*)` maximizing [`cstar_objective`] over `z >= 0`.
pub fn cstar_argmax<T: Scalar>() -> (T, T) {
    golden_max(cstar_objective::<T>, T::zero(), T::lit(20.0), T::lit(GOLDEN_TOL))
}

/// The constant `C* ≈ 0.42479`.
pub fn cstar<T: Scalar>() -> T {
    cstar_argmax::<T>().1
}

/// `(2 pi alpha / sqrt 3)^n e^{-(2 pi alpha / sqrt 3 - 1) n}`.
pub fn cosh_nu_bound<T: Scalar>(alpha: T, n: usize) -> Result<T> {
    let x = alpha * crate::testfn::inv_cosh_rate::<T>();
    if !(x > T::one()) {
        return Err(Error::Domain(format!("alpha = {alpha} not above sqrt(3)/(2 pi)")));
    }
    Ok((T::from_usize_lossy(n) * (x.ln() - x + T::one())).exp())
}

/// Radius `(1 + C*) alpha n` of the l1 ball that [`cosh_nu_bound`] covers.
pub fn cosh_ball_radius<T: Scalar>(alpha: T, n: usize) -> T {
    (T::one() + cstar::<T>()) * alpha * T::from_usize_lossy(n)
}

/// `n / (2 pi) + 3 sqrt(n) / pi`.
pub fn transference_bound_l2<T: Scalar>(n: usize) -> T {
    let nn = T::from_usize_lossy(n);
    nn / (T::lit(2.0) * T::PI()) + T::lit(3.0) * nn.sqrt() / T::PI()
}

/// Advertised constant in the l1 bound.
pub const L1_CONSTANT: f64 = 0.154264;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct L1Transference<T> {
    /// `(1 + C*)^2 (sqrt 3 / (2 pi) + 3 / sqrt n)^2 n^2`
    pub exact: T,
    /// `0.154264 n^2 (1 + 2 pi sqrt(3/n))^2`
    pub ceiling: T,
}

impl<T: Scalar> L1Transference<T> {
    pub fn below_ceiling(&self) -> bool {
        self.exact < self.ceiling
    }
}

pub fn transference_bound_l1<T: Scalar>(n: usize) -> L1Transference<T> {
    let nn = T::from_usize_lossy(n);
    let alpha = l1_alpha::<T>(n);
    let c = T::one() + cstar::<T>();
    let exact = c * c * alpha * alpha * nn * nn;
    let g = T::one() + T::lit(2.0) * T::PI() * (T::lit(3.0) / nn).sqrt();
    L1Transference { exact, ceiling: T::lit(L1_CONSTANT) * nn * nn * g * g }
}

/// `sqrt 3 / (2 pi) + 3 / sqrt n`, the l1 scale used in the bound.
pub fn l1_alpha<T: Scalar>(n: usize) -> T {
    T::one() / crate::testfn::inv_cosh_rate::<T>() + T::lit(3.0) / T::from_usize_lossy(n).sqrt()
}

/// `(1 + C*)^2 * 3 / (4 pi^2)`, the leading l1 constant.
pub fn l1_leading_constant<T: Scalar>() -> T {
    let c = T::one() + cstar::<T>();
    c * c * T::lit(3.0) / (T::lit(4.0) * T::PI() * T::PI())
}

/// `10 (e^{u^p} n / p) e^{u^p n / p}`.
pub fn handshake_bound<T: Scalar>(n: usize, p: T, u: T) -> Result<T> {
    if !(p > T::zero() && p <= T::lit(2.0)) {
        return Err(Error::Domain(format!("exponent p = {p} outside (0, 2]")));
    }
    if !(u >= T::one()) {
        return Err(Error::Domain(format!("u = {u} below 1")));
    }
    let up = u.powf(p);
    let np = T::from_usize_lossy(n) / p;
    Ok((T::lit(10.0) * np).ln().exp() * (up + up * np).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Holds,
    Fails,
    /// Within `1e-12` below the threshold; not certified.
    Inconclusive,
}

/// Slack below 1 that still counts as a floating-point tie.
pub const CONDITION_SLACK: f64 = 1e-12;

/// Decides `2 nu_K + nu_K' < 1`.
pub fn generic_transference_condition<T: Scalar>(nu_k: T, nu_kprime: T) -> Result<Condition> {
    if !(nu_k >= T::zero() && nu_kprime >= T::zero()) {
        return Err(Error::Domain(format!(
            "tail values must be nonnegative (got {nu_k}, {nu_kprime})"
        )));
    }
    let s = T::lit(2.0) * nu_k + nu_kprime;
    Ok(if s >= T::one() {
        Condition::Fails
    } else if s > T::one() - T::lit(CONDITION_SLACK) {
        Condition::Inconclusive
    } else {
        Condition::Holds
    })
}

/// Best available bound on the tail functional of `spec` outside the `lp`
/// ball of the given radius in dimension `n`.
///
/// Gaussians pair with `p = 2`, supergaussians with their own exponent and
/// the `1/(1 + 2 cosh)` product with `p = 1`; anything else is unsupported.
pub fn nu_bound<T: Scalar>(
    spec: &TestFunctionSpec<T>,
    p: T,
    radius: T,
    n: usize,
) -> Result<NuBound<T>> {
    let same = |a: T, b: T| (a - b).abs() <= T::lit(1e-12) * b.abs().max(T::one());
    match spec.family() {
        Family::Gaussian if same(p, T::lit(2.0)) => mu_norm(spec, radius, n),
        Family::Supergaussian if spec.p().is_some_and(|q| same(p, q)) => {
            mu_norm(spec, radius, n)
        }
        Family::InvCoshProduct if same(p, T::one()) => {
            let alpha = radius / ((T::one() + cstar::<T>()) * T::from_usize_lossy(n));
            Ok(NuBound {
                value: cosh_nu_bound(alpha, n)?,
                method: NuMethod::CoshProduct,
                u_star: None,
            })
        }
        f => Err(Error::Unsupported(format!(
            "no certified tail functional for {} with an l{} ball",
            f.name(),
            p
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn gauss(n: usize) -> TestFunctionSpec<f64> {
        TestFunctionSpec::new(Family::Gaussian, n).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn gaussian_documented_example() {
        let n = 4;
        let r = gaussian_radius(1.0, n);
        let b = mu_norm(&gauss(n), r, n).unwrap();
        assert!((b.value - (2.0 / E).powi(2)).abs() < 1e-9);
        assert!((b.value - 0.541341).abs() < 1e-6);
        let u = b.u_star.unwrap();
        assert!((u - (n as f64).sqrt() / ((2.0 * PI).sqrt() * r)).abs() < 1e-8);
    }

    #[test]
    fn gaussian_closed_form_values() {
        assert!((gaussian_nu_closed_form(0.5f64, 17).unwrap() - 1.0).abs() < 1e-15);
        let v = gaussian_nu_closed_form(PI, 1).unwrap();
        assert!((v - (2.0 * PI * E).sqrt() * (-PI).exp()).abs() < 1e-14);
        assert!((v - 0.17860).abs() < 1e-5);
        // n = 100, tau = 1/2 + 3/10: (1.6 e^{-0.6})^{50}
        let v = gaussian_nu_closed_form(0.8, 100).unwrap();
        assert!(rel(v, 1.6f64.powi(50) * (-30.0f64).exp()) < 1e-12);
        assert!(gaussian_nu_closed_form(0.49, 3).is_err());
    }

    #[test]
    fn supergaussian_closed_form_values() {
        for p in [0.5, 1.0, 2.0] {
            for n in [1, 3, 8] {
                let r = (n as f64 / p).powf(1.0 / p);
                assert!((supergaussian_mu_closed_form(p, r, n).unwrap() - 1.0).abs() < 1e-12);
            }
        }
        let v = supergaussian_mu_closed_form(1.0, 6.0, 3).unwrap();
        assert!((v - (2.0 / E).powi(3)).abs() < 1e-14);
        assert!((v - 0.39829).abs() < 1e-5);
        assert!(supergaussian_mu_closed_form(1.0, 2.0, 3).is_err());
    }

    #[test]
    fn supergaussian_p2_is_a_rescaled_gaussian() {
        let s = TestFunctionSpec::<f64>::supergaussian(2.0, 4).unwrap();
        let v = mu_norm(&s, 2.0, 4).unwrap().value;
        // e^{-|x|^2} is the gaussian at x / sqrt(pi): tau = pi (2/sqrt pi)^2 / 4 = 1
        assert!(rel(v, gaussian_nu_closed_form(1.0, 4).unwrap()) < 1e-9);
    }

    #[test]
    fn optimizer_matches_closed_forms_on_grid() {
        for n in [1usize, 2, 4, 8] {
            for tau in [0.5, 1.0, 2.0] {
                let r = gaussian_radius(tau, n);
                let a = mu_norm(&gauss(n), r, n).unwrap().value;
                let b = gaussian_nu_closed_form(tau, n).unwrap();
                assert!(rel(a, b) < 1e-9, "n={n} tau={tau}: {a} vs {b}");
            }
            for p in [0.5, 1.0, 1.5, 2.0] {
                let s = TestFunctionSpec::<f64>::supergaussian(p, n).unwrap();
                for t in [1.0, 1.5, 2.0] {
                    let r = t * (n as f64 / p).powf(1.0 / p);
                    let a = mu_norm(&s, r, n).unwrap().value;
                    let b = supergaussian_mu_closed_form(p, r, n).unwrap();
                    assert!(rel(a, b) < 1e-9, "n={n} p={p} t={t}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn below_threshold_is_one() {
        // Tiny radius: the best u is 1 and the ratio is exactly 1.
        let b = mu_norm(&gauss(3), 0.1, 3).unwrap();
        assert_eq!(b.u_star, Some(1.0));
        assert!(b.value <= 1.0);
        assert!(mu_norm(&TestFunctionSpec::<f64>::new(Family::ExpL1, 2).unwrap(), 1.0, 2).is_err());
    }

    #[test]
    fn cstar_value_and_certificate() {
        assert_eq!(cstar_objective(0.0f64), 0.0);
        let (z, c) = cstar_argmax::<f64>();
        assert!((0.424785..=0.424795).contains(&c), "{c}");
        let h = 1e-3;
        let second = cstar_objective(z + h) - 2.0 * c + cstar_objective(z - h);
        assert!(second <= 0.0);
        assert!(l1_leading_constant::<f64>() < L1_CONSTANT);
    }

    #[test]
    fn cosh_bound_values() {
        let a0 = 3.0f64.sqrt() / (2.0 * PI);
        assert!((cosh_nu_bound(a0 * (1.0 + 1e-9), 5).unwrap() - 1.0).abs() < 1e-12);
        assert!(cosh_nu_bound(a0, 5).is_err());
        let v = cosh_nu_bound(a0 + 0.3, 100).unwrap();
        assert!((v.ln() + 35.2).abs() < 0.05, "{}", v.ln());
        assert!(v < 1.0 / 3.0);
        let x = 1.5 * a0;
        assert!(cosh_nu_bound(x, 6).unwrap() < cosh_nu_bound(x, 5).unwrap());
    }

    #[test]
    fn transference_values() {
        assert!((transference_bound_l2::<f64>(1) - 1.11408).abs() < 1e-5);
        assert!((transference_bound_l2::<f64>(100) - 25.4648).abs() < 1e-4);
        assert!(transference_bound_l2::<f64>(1) >= 0.5);
        let b = transference_bound_l1::<f64>(3);
        assert!((b.ceiling - 73.6).abs() < 0.1, "{}", b.ceiling);
        assert!(b.below_ceiling());
        for n in 1..=2000 {
            assert!(transference_bound_l1::<f64>(n).below_ceiling(), "n = {n}");
        }
    }

    #[test]
    fn handshake_values() {
        let v = handshake_bound(4, 2.0, 1.0).unwrap();
        assert!((v - 20.0 * E.powi(3)).abs() < 1e-10);
        assert!((v - 401.71).abs() < 0.01);
        assert!((handshake_bound(2, 1.0, 1.0).unwrap() - v).abs() < 1e-10);
        assert!(handshake_bound(2, 1.0, 0.9).is_err());
        assert!(handshake_bound(2, 2.5, 1.0).is_err());
    }

    #[test]
    fn condition_cases() {
        assert_eq!(generic_transference_condition(0.0, 0.0).unwrap(), Condition::Holds);
        assert_ne!(generic_transference_condition(1.0 / 3.0, 1.0 / 3.0).unwrap(), Condition::Holds);
        assert_eq!(
            generic_transference_condition(0.25, 0.5 - 1e-14).unwrap(),
            Condition::Inconclusive
        );
        assert!(generic_transference_condition(-0.1, 0.0).is_err());
        for n in 1..=200 {
            let nu = gaussian_nu_closed_form(0.5 + 3.0 / (n as f64).sqrt(), n).unwrap();
            assert_eq!(generic_transference_condition(nu, nu).unwrap(), Condition::Holds);
        }
    }

    #[test]
    fn nu_bound_dispatch() {
        let ic = TestFunctionSpec::<f64>::new(Family::InvCoshProduct, 3).unwrap();
        let r = cosh_ball_radius(0.5, 3);
        let b = nu_bound(&ic, 1.0, r, 3).unwrap();
        assert_eq!(b.method, NuMethod::CoshProduct);
        assert!((b.value - cosh_nu_bound(0.5, 3).unwrap()).abs() < 1e-14);
        assert!(nu_bound(&ic, 2.0, r, 3).is_err());
        assert!(nu_bound(&gauss(2), 1.0, 1.0, 2).is_err());
    }

    proptest::proptest! {
        #[test]
        fn mu_non_increasing_past_threshold(n in 1usize..9, a in 0.0f64..3.0, d in 0.0f64..2.0) {
            let r0 = gaussian_radius(0.5, n);
            let (r1, r2) = (r0 + a, r0 + a + d);
            let g = gauss(n);
            proptest::prop_assert!(mu_norm(&g, r2, n).unwrap().value
                <= mu_norm(&g, r1, n).unwrap().value * (1.0 + 1e-9));
        }

        #[test]
        fn supergaussian_mu_non_increasing(n in 1usize..9, p in 0.3f64..2.0, a in 0.0f64..3.0, d in 0.0f64..2.0) {
            let s = TestFunctionSpec::<f64>::supergaussian(p, n).unwrap();
            let r0 = (n as f64 / p).powf(1.0 / p);
            let (r1, r2) = (r0 + a, r0 + a + d);
            proptest::prop_assert!(mu_norm(&s, r2, n).unwrap().value
                <= mu_norm(&s, r1, n).unwrap().value * (1.0 + 1e-9));
        }
    }
}
