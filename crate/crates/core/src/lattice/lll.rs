//! LLL reduction of a row basis, tracking the integer change of basis.

use crate::linalg::{dot, Mat};
use crate::scalar::Scalar;

/// Reduces `basis` in place to a `delta`-LLL-reduced basis of the same
/// lattice. Returns the unimodular matrix `U` with `reduced = U * original`.
pub(crate) fn lll_rows<T: Scalar>(basis: &mut Mat<T>, delta: T) -> Vec<Vec<i64>> {
    let n = basis.len();
    let mut u: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect();
    if n <= 1 {
        return u;
    }
    let half = T::lit(0.5);
    let mut k = 1;
    let mut gs = GsState::new(basis);
    // hard stop far beyond the polynomial bound for n <= 8
    let mut iterations = 0usize;
    while k < n && iterations < 100_000 {
        iterations += 1;
        // size-reduce b_k against b_{k-1}, ..., b_0
        for j in (0..k).rev() {
            let m = gs.mu[k][j];
            if m.abs() > half {
                let q = m.round();
                let qi = q.to_i64().expect("reduction coefficient fits i64");
                for c in 0..basis[k].len() {
                    let d = q * basis[j][c];
                    basis[k][c] -= d;
                }
                for c in 0..n {
                    u[k][c] -= qi * u[j][c];
                }
                for l in 0..=j {
                    let d = q * gs.mu[j][l];
                    gs.mu[k][l] -= d;
                }
            }
        }
        let lhs = gs.bsq[k];
        let m = gs.mu[k][k - 1];
        if lhs >= (delta - m * m) * gs.bsq[k - 1] {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            u.swap(k, k - 1);
            gs = GsState::new(basis);
            k = (k - 1).max(1);
        }
    }
    u
}

struct GsState<T> {
    mu: Mat<T>,
    bsq: Vec<T>,
}

impl<T: Scalar> GsState<T> {
    fn new(b: &Mat<T>) -> Self {
        let n = b.len();
        let mut bstar: Mat<T> = Vec::with_capacity(n);
        let mut mu = vec![vec![T::zero(); n]; n];
        let mut bsq = Vec::with_capacity(n);
        for i in 0..n {
            let mut v = b[i].clone();
            for j in 0..i {
                let m = dot(&b[i], &bstar[j]) / bsq[j];
                mu[i][j] = m;
                for (vk, bk) in v.iter_mut().zip(&bstar[j]) {
                    *vk -= m * *bk;
                }
            }
            mu[i][i] = T::one();
            bsq.push(dot(&v, &v));
            bstar.push(v);
        }
        Self { mu, bsq }
    }
}

/// Checks size reduction (|mu| <= 1/2 + slack) and the Lovász condition.
pub(crate) fn is_lll_reduced<T: Scalar>(basis: &Mat<T>, delta: T) -> bool {
    let gs = GsState::new(basis);
    let slack = T::lit(1e-9);
    let n = basis.len();
    for i in 1..n {
        for j in 0..i {
            if gs.mu[i][j].abs() > T::lit(0.5) + slack {
                return false;
            }
        }
        let m = gs.mu[i][i - 1];
        if gs.bsq[i] < (delta - m * m) * gs.bsq[i - 1] * (T::one() - slack) {
            return false;
        }
    }
    true
}
