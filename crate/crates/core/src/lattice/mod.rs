//! Lattices, their duals, LLL reduction and exact point enumeration.
//!
//! A [`Lattice`] is immutable once built. Construction validates the basis
//! and caches an LLL-reduced copy together with its Gram–Schmidt data; every
//! enumeration runs on that reduced basis and reports coordinates in the
//! original one.

mod enumerate;
pub mod generate;
pub mod io;
mod lll;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, GramSchmidt, Mat};
use crate::scalar::{norm_p, Scalar};

pub use enumerate::{ShortestVector, TIE_TOLERANCE};

/// Default LLL parameter.
pub const DEFAULT_DELTA: f64 = 0.99;

/// Work limits for enumeration-heavy operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    /// Enumeration tree nodes per call.
    pub nodes: u64,
    /// Grid samples for covering-radius estimation.
    pub grid: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            nodes: 100_000_000,
            grid: 10_000_000,
        }
    }
}

#[derive(Debug)]
struct Reduction<T> {
    basis: Mat<T>,
    /// `basis = transform * original`
    transform: Vec<Vec<i64>>,
    inverse: Mat<T>,
    gs: GramSchmidt<T>,
}

/// Full-rank lattice in `R^n`, rows of `basis` are the generators.
#[derive(Debug, Clone)]
pub struct Lattice<T> {
    basis: Mat<T>,
    inverse: Mat<T>,
    covolume: T,
    reduced: Arc<Reduction<T>>,
}

/// A lattice vector with its integer coordinates in the lattice basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticePoint<T> {
    pub coords: Vec<i64>,
    pub embedding: Vec<T>,
}

impl<T: Scalar> LatticePoint<T> {
    pub fn from_coords(lattice: &Lattice<T>, coords: Vec<i64>) -> Self {
        let embedding = linalg::int_row_times(&coords, &lattice.basis);
        Self { coords, embedding }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn norm(&self, p: T) -> T {
        norm_p(&self.embedding, p)
    }
}

/// `K = radius * B_p`, the closed `l_p` ball (a quasi-ball for `p < 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodySpec<T> {
    pub p: T,
    pub radius: T,
}

impl<T: Scalar> BodySpec<T> {
    pub fn new(p: T, radius: T) -> Result<Self> {
        if !(p > T::zero()) {
            return Err(Error::Domain(format!("body exponent p = {p} must be > 0")));
        }
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::Domain(format!("body radius {radius} must be > 0")));
        }
        Ok(Self { p, radius })
    }

    /// `||x||_K = ||x||_p / r`.
    pub fn gauge(&self, x: &[T]) -> T {
        norm_p(x, self.p) / self.radius
    }

    pub fn contains(&self, x: &[T]) -> bool {
        norm_p(x, self.p) <= self.radius
    }
}

fn condition_limit<T: Scalar>() -> T {
    (T::epsilon() * T::lit(1e3)).recip()
}

impl<T: Scalar> Lattice<T> {
    /// Builds a lattice from basis rows.
    pub fn new(basis: Vec<Vec<T>>) -> Result<Self> {
        let n = basis.len();
        if n == 0 {
            return Err(Error::InvalidLattice("empty basis".into()));
        }
        if let Some((i, row)) = basis.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::InvalidLattice(format!(
                "basis row {i} has length {}, expected {n}",
                row.len()
            )));
        }
        if basis.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidLattice("non-finite basis entry".into()));
        }
        let det = linalg::determinant(&basis);
        let inverse = match linalg::inverse(&basis) {
            Some(inv) if det != T::zero() => inv,
            _ => {
                return Err(Error::IllConditioned {
                    condition: f64::INFINITY,
                })
            }
        };
        let condition = linalg::frobenius(&basis) * linalg::frobenius(&inverse);
        if !condition.is_finite() || condition > condition_limit::<T>() {
            return Err(Error::IllConditioned {
                condition: condition.f64(),
            });
        }
        let mut reduced = basis.clone();
        let transform = lll::lll_rows(&mut reduced, T::lit(DEFAULT_DELTA));
        let red_inverse = linalg::inverse(&reduced).ok_or(Error::IllConditioned {
            condition: f64::INFINITY,
        })?;
        let gs = linalg::gram_schmidt(&reduced);
        Ok(Self {
            covolume: det.abs(),
            inverse,
            reduced: Arc::new(Reduction {
                basis: reduced,
                transform,
                inverse: red_inverse,
                gs,
            }),
            basis,
        })
    }

    /// `Z^n`.
    pub fn integer(n: usize) -> Self {
        Self::new(linalg::identity(n)).expect("identity basis is valid")
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &Mat<T> {
        &self.basis
    }

    pub fn covolume(&self) -> T {
        self.covolume
    }

    /// The cached LLL-reduced basis used for enumeration.
    pub fn reduced_basis(&self) -> &Mat<T> {
        &self.reduced.basis
    }

    /// Dual lattice: basis is the inverse transpose.
    pub fn dual(&self) -> Result<Self> {
        Self::new(linalg::transpose(&self.inverse))
    }

    /// `t * L`.
    pub fn scaled(&self, t: T) -> Result<Self> {
        if !(t > T::zero()) {
            return Err(Error::Domain(format!("scale {t} must be > 0")));
        }
        Self::new(
            self.basis
                .iter()
                .map(|r| r.iter().map(|v| *v * t).collect())
                .collect(),
        )
    }

    /// Real coordinates of `x` in the basis.
    pub fn coordinates(&self, x: &[T]) -> Vec<T> {
        linalg::row_times(x, &self.inverse)
    }

    /// Whether `x` lies in the lattice, to `tol` in every coordinate.
    pub fn contains(&self, x: &[T], tol: T) -> bool {
        self.coordinates(x)
            .iter()
            .all(|c| (*c - c.round()).abs() <= tol)
    }

    /// Mutual membership of basis vectors.
    pub fn same_lattice(&self, other: &Self, tol: T) -> bool {
        self.dim() == other.dim()
            && other.basis.iter().all(|b| self.contains(b, tol))
            && self.basis.iter().all(|b| other.contains(b, tol))
    }

    /// LLL-reduces the basis (`0.25 < delta < 1`).
    pub fn lll_reduce(&self, delta: T) -> Result<Self> {
        self.lll_reduce_with_transform(delta).map(|(l, _)| l)
    }

    /// As [`Self::lll_reduce`], also returning the unimodular `U` with
    /// `new_basis = U * old_basis`.
    pub fn lll_reduce_with_transform(&self, delta: T) -> Result<(Self, Vec<Vec<i64>>)> {
        if !(delta > T::lit(0.25) && delta < T::one()) {
            return Err(Error::Domain(format!("LLL delta {delta} outside (1/4, 1)")));
        }
        let mut b = self.basis.clone();
        let u = lll::lll_rows(&mut b, delta);
        Ok((Self::new(b)?, u))
    }

    /// Whether the stored basis satisfies the LLL conditions at `delta`.
    pub fn is_lll_reduced(&self, delta: T) -> bool {
        lll::is_lll_reduced(&self.basis, delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn dual_of_integer_lattice_is_itself() {
        for n in 1..5 {
            let z = Lattice::<f64>::integer(n);
            assert_eq!(z.dual().unwrap().basis(), z.basis());
        }
    }

    #[test]
    fn dual_of_2z() {
        let l = Lattice::new(vec![vec![2.0f64]]).unwrap();
        let d = l.dual().unwrap();
        assert_eq!(d.basis(), &vec![vec![0.5]]);
        assert_eq!(d.covolume(), 0.5);
    }

    #[test]
    fn dual_of_shear_is_inverse_transpose() {
        let l = Lattice::new(vec![vec![1.0f64, 1.0], vec![0.0, 1.0]]).unwrap();
        // direct inversion: B^-1 = [[1,-1],[0,1]], transposed
        assert_eq!(l.dual().unwrap().basis(), &vec![vec![1.0, 0.0], vec![-1.0, 1.0]]);
    }

    #[test]
    fn covolume_matches_determinant() {
        let l = Lattice::new(vec![vec![2.0f64, 1.0], vec![0.5, 3.0]]).unwrap();
        assert!(close(l.covolume(), 5.5, 1e-12));
        let d = l.dual().unwrap();
        assert!(close(l.covolume() * d.covolume(), 1.0, 1e-10));
        assert!(l.same_lattice(&d.dual().unwrap(), 1e-9));
    }

    #[test]
    fn rejects_singular_and_ragged() {
        assert!(matches!(
            Lattice::new(vec![vec![1.0f64, 2.0], vec![2.0, 4.0]]),
            Err(Error::IllConditioned { .. })
        ));
        assert!(matches!(
            Lattice::new(vec![vec![1.0f64, 2.0], vec![2.0]]),
            Err(Error::InvalidLattice(_))
        ));
        assert!(matches!(
            Lattice::new(vec![vec![1.0f64, 0.0], vec![0.0, 1e-14]]),
            Err(Error::IllConditioned { .. })
        ));
        assert!(Lattice::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn lll_identity_stays_identity() {
        let z = Lattice::<f64>::integer(3);
        assert_eq!(z.lll_reduce(0.99).unwrap().basis(), z.basis());
    }

    #[test]
    fn lll_shortens_skewed_basis() {
        let l = Lattice::new(vec![vec![1.0f64, 0.0], vec![100.0, 1.0]]).unwrap();
        let (r, u) = l.lll_reduce_with_transform(0.99).unwrap();
        let max_norm = r
            .basis()
            .iter()
            .map(|b| norm_p(b, 2.0))
            .fold(0.0f64, f64::max);
        assert!(max_norm <= 2.0);
        assert!(r.same_lattice(&l, 1e-9));
        assert!(r.is_lll_reduced(0.99));
        // U has determinant +-1 and maps the old basis onto the new one
        let uf: Mat<f64> = u.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
        assert_eq!(linalg::determinant(&uf).abs(), 1.0);
        assert_eq!(&linalg::int_mat_times(&u, l.basis()), r.basis());
        assert!(close(r.covolume(), l.covolume(), 1e-12));
    }

    #[test]
    fn lll_rejects_bad_delta() {
        let z = Lattice::<f64>::integer(2);
        assert!(z.lll_reduce(0.25).is_err());
        assert!(z.lll_reduce(1.0).is_err());
    }

    #[test]
    fn body_gauge() {
        let k = BodySpec::new(1.0f64, 2.0).unwrap();
        assert_eq!(k.gauge(&[1.0, -3.0]), 2.0);
        assert!(k.contains(&[1.0, 1.0]));
        assert!(!k.contains(&[1.0, 1.5]));
        assert!(BodySpec::new(1.0f64, 0.0).is_err());
        assert!(BodySpec::new(0.0f64, 1.0).is_err());
    }

    #[test]
    fn lattice_point_embedding_consistent() {
        let l = Lattice::new(vec![vec![2.0f64, 0.0], vec![1.0, 1.0]]).unwrap();
        let pt = LatticePoint::from_coords(&l, vec![1, -1]);
        assert_eq!(pt.embedding, vec![1.0, -1.0]);
        assert!(l.contains(&pt.embedding, 1e-12));
        assert!(!l.contains(&[0.5, 0.0], 1e-12));
    }

    #[test]
    fn works_in_single_precision() {
        let l = Lattice::new(vec![vec![1.0f32, 1.0], vec![0.0, 1.0]]).unwrap();
        let d = l.dual().unwrap();
        assert_eq!(d.basis(), &vec![vec![1.0f32, 0.0], vec![-1.0, 1.0]]);
        assert!(l.same_lattice(&d.dual().unwrap(), 1e-5));
    }
}
