//! Test functions `f` and their Fourier transforms.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

mod hypotheses;
pub mod quadrature;
mod table;

pub use hypotheses::{check_hypotheses, HypothesisReport, Violations};
pub use table::{
    asymptotic_coeff, transform_point, TableCache, Transform1DTable, DEFAULT_R_MAX, DEFAULT_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `e^{-pi |x|^2}`
    Gaussian,
    /// `prod sech(pi x_i)`
    SechProduct,
    /// `prod 1 / (1 + 2 cosh(2 pi x_i / sqrt 3))`
    InvCoshProduct,
    /// `e^{-||x||_p^p}`
    Supergaussian,
    /// `prod e^{-|x_i|}`
    ExpL1,
}

impl Family {
    pub fn is_self_dual(self) -> bool {
        matches!(self, Family::Gaussian | Family::SechProduct | Family::InvCoshProduct)
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::SechProduct => "sech_product",
            Family::InvCoshProduct => "inv_cosh_product",
            Family::Supergaussian => "supergaussian",
            Family::ExpL1 => "exp_l1",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "gaussian" => Family::Gaussian,
            "sech_product" | "sech" => Family::SechProduct,
            "inv_cosh_product" | "inv_cosh" => Family::InvCoshProduct,
            "supergaussian" => Family::Supergaussian,
            "exp_l1" => Family::ExpL1,
            other => return Err(Error::Parse(format!("unknown test function family '{other}'"))),
        })
    }
}

/// Scale in the `inv_cosh_product` family: `2 pi / sqrt 3`.
pub fn inv_cosh_rate<T: Scalar>() -> T {
    T::lit(2.0) * T::PI() / T::lit(3.0).sqrt()
}

#[derive(Debug, Clone)]
pub struct TestFunctionSpec<T> {
    family: Family,
    p: Option<T>,
    dim: usize,
    table: Option<Arc<Transform1DTable>>,
}

impl<T: Scalar> TestFunctionSpec<T> {
    /// A non-supergaussian family in dimension `dim`.
    pub fn new(family: Family, dim: usize) -> Result<Self> {
        if family == Family::Supergaussian {
            return Err(Error::Precondition(
                "supergaussian needs an exponent; use TestFunctionSpec::supergaussian".into(),
            ));
        }
        check_dim(dim)?;
        Ok(TestFunctionSpec { family, p: None, dim, table: None })
    }

    pub fn supergaussian(p: T, dim: usize) -> Result<Self> {
        if !(p > T::zero() && p <= T::lit(2.0)) {
            return Err(Error::Domain(format!("supergaussian exponent {p} outside (0, 2]")));
        }
        check_dim(dim)?;
        Ok(TestFunctionSpec { family: Family::Supergaussian, p: Some(p), dim, table: None })
    }

    /// Attaches a transform table; its exponent must match.
    pub fn with_table(mut self, table: Arc<Transform1DTable>) -> Result<Self> {
        match self.p {
            Some(p) if (p.f64() - table.p).abs() <= 1e-12 * table.p => {
                self.table = Some(table);
                Ok(self)
            }
            _ => Err(Error::Precondition(format!(
                "table for p = {} does not match {}",
                table.p,
                self.describe()
            ))),
        }
    }

    /// Builds and attaches a table with the given radius and tolerance.
    pub fn build_table(self, r_max: f64, tol: f64) -> Result<Self> {
        let p = self
            .p
            .ok_or_else(|| Error::Precondition("only supergaussians carry tables".into()))?;
        let table = Transform1DTable::build(p.f64(), r_max, tol)?;
        self.with_table(Arc::new(table))
    }

    /// Same as [`build_table`](Self::build_table) with defaults, and a no-op
    /// for families that need no table or already have one.
    pub fn ensure_table(self) -> Result<Self> {
        if self.family != Family::Supergaussian || self.table.is_some() {
            return Ok(self);
        }
        self.build_table(DEFAULT_R_MAX, DEFAULT_TOL)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn p(&self) -> Option<T> {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn table(&self) -> Option<&Arc<Transform1DTable>> {
        self.table.as_ref()
    }

    /// Same function in another dimension; the table is kept.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(TestFunctionSpec { dim, ..self.clone() })
    }

    pub fn describe(&self) -> String {
        match self.p {
            Some(p) => format!("{}(p = {p}, n = {})", self.family.name(), self.dim),
            None => format!("{}(n = {})", self.family.name(), self.dim),
        }
    }

    /// `f(0)`, the maximum of `f`.
    pub fn f_at_origin(&self) -> T {
        match self.family {
            Family::InvCoshProduct => T::lit(3.0).powi(-(self.dim as i32)),
            _ => T::one(),
        }
    }

    pub fn eval_f(&self, x: &[T]) -> T {
        debug_assert_eq!(x.len(), self.dim);
        self.log_f(x).exp()
    }

    /// `ln f(x)`, accurate far into the tails where `f` underflows.
    pub fn log_f(&self, x: &[T]) -> T {
        match self.family {
            Family::Gaussian => -T::PI() * x.iter().map(|v| *v * *v).sum::<T>(),
            Family::SechProduct => x.iter().map(|v| log_sech(T::PI() * v.abs())).sum(),
            Family::InvCoshProduct => x.iter().map(|v| log_inv_cosh(v.abs())).sum(),
            Family::ExpL1 => -x.iter().map(|v| v.abs()).sum::<T>(),
            Family::Supergaussian => {
                let p = self.p.expect("supergaussian exponent");
                -crate::scalar::norm_p_pow(x, p)
            }
        }
    }

    pub fn eval_fhat(&self, x: &[T]) -> Result<T> {
        debug_assert_eq!(x.len(), self.dim);
        match self.family {
            f if f.is_self_dual() => Ok(self.eval_f(x)),
            Family::ExpL1 => {
                let c = T::lit(4.0) * T::PI() * T::PI();
                Ok(x.iter().map(|v| T::lit(2.0) / (T::one() + c * *v * *v)).fold(T::one(), |a, b| a * b))
            }
            _ => {
                let table = self.table.as_ref().ok_or(Error::MissingTable {
                    p: self.p.map(|p| p.f64()).unwrap_or(f64::NAN),
                })?;
                let mut prod = 1.0f64;
                for v in x {
                    prod *= table.eval(v.f64()).max(0.0);
                }
                Ok(T::lit(prod))
            }
        }
    }

    /// `fhat(0)`, the maximum of the transform.
    pub fn fhat_at_origin(&self) -> Result<T> {
        self.eval_fhat(&vec![T::zero(); self.dim])
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    Ok(())
}

/// `ln sech(y)` for `y >= 0`.
fn log_sech<T: Scalar>(y: T) -> T {
    let two = T::lit(2.0);
    two.ln() - y - (-two * y).exp().ln_1p()
}

/// `-ln(1 + 2 cosh(c y))` for `y >= 0`.
fn log_inv_cosh<T: Scalar>(y: T) -> T {
    let z = inv_cosh_rate::<T>() * y;
    let e = (-z).exp();
    -(z + (e + e * e).ln_1p())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_closed(n: usize) -> Vec<TestFunctionSpec<f64>> {
        [Family::Gaussian, Family::SechProduct, Family::InvCoshProduct, Family::ExpL1]
            .into_iter()
            .map(|f| TestFunctionSpec::new(f, n).unwrap())
            .collect()
    }

    #[test]
    fn documented_values() {
        let g = TestFunctionSpec::<f64>::new(Family::Gaussian, 3).unwrap();
        assert_eq!(g.eval_f(&[0.0; 3]), 1.0);
        let c = TestFunctionSpec::<f64>::new(Family::InvCoshProduct, 2).unwrap();
        assert!((c.eval_f(&[0.0, 0.0]) - 1.0 / 9.0).abs() < 1e-15);
        assert!((c.f_at_origin() - 1.0 / 9.0).abs() < 1e-15);
        let s = TestFunctionSpec::<f64>::supergaussian(1.0, 2).unwrap();
        assert!((s.eval_f(&[1.0, 0.0]) - (-1.0f64).exp()).abs() < 1e-15);
        let e = TestFunctionSpec::<f64>::new(Family::ExpL1, 1).unwrap();
        assert_eq!(e.eval_fhat(&[0.0]).unwrap(), 2.0);
    }

    #[test]
    fn closed_forms_match_direct_formulas() {
        let pi = std::f64::consts::PI;
        let x = [0.3, -1.2];
        let sech = TestFunctionSpec::<f64>::new(Family::SechProduct, 2).unwrap();
        let direct: f64 = x.iter().map(|v: &f64| 1.0 / (pi * v).cosh()).product();
        assert!((sech.eval_f(&x) - direct).abs() < 1e-15);
        let ic = TestFunctionSpec::<f64>::new(Family::InvCoshProduct, 2).unwrap();
        let c = 2.0 * pi / 3.0f64.sqrt();
        let direct: f64 = x.iter().map(|v: &f64| 1.0 / (1.0 + 2.0 * (c * v).cosh())).product();
        assert!((ic.eval_f(&x) - direct).abs() < 1e-15);
    }

    #[test]
    fn self_dual_families() {
        for spec in all_closed(3).into_iter().filter(|s| s.family().is_self_dual()) {
            let x = [0.1, -0.7, 2.0];
            assert_eq!(spec.eval_fhat(&x).unwrap(), spec.eval_f(&x));
        }
    }

    #[test]
    fn product_and_symmetry() {
        for spec in all_closed(4) {
            let a = spec.with_dim(2).unwrap();
            let x = [0.4, -1.1, 0.9, 0.05];
            let whole = spec.eval_f(&x);
            let split = a.eval_f(&x[..2]) * a.eval_f(&x[2..]);
            assert!((whole - split).abs() <= 1e-14 * whole);
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            assert!((spec.eval_f(&neg) - whole).abs() <= 1e-15 * whole);
            let perm = [x[3], x[1], x[0], x[2]];
            assert!((spec.eval_f(&perm) - whole).abs() <= 1e-14 * whole);
        }
    }

    #[test]
    fn supergaussian_needs_table() {
        let s = TestFunctionSpec::<f64>::supergaussian(1.5, 2).unwrap();
        assert!(matches!(s.eval_fhat(&[0.0, 0.0]), Err(Error::MissingTable { .. })));
        assert!(TestFunctionSpec::<f64>::new(Family::Supergaussian, 2).is_err());
        assert!(TestFunctionSpec::<f64>::supergaussian(2.5, 2).is_err());
    }

    #[test]
    fn supergaussian_p2_origin() {
        let s = TestFunctionSpec::<f64>::supergaussian(2.0, 1)
            .unwrap()
            .build_table(4.0, 1e-11)
            .unwrap();
        let v = s.eval_fhat(&[0.0]).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn f32_evaluation() {
        let g = TestFunctionSpec::<f32>::new(Family::Gaussian, 2).unwrap();
        let v = g.eval_f(&[0.5, 0.5]);
        assert!((v - (-std::f32::consts::PI * 0.5).exp()).abs() < 1e-6);
    }
}
