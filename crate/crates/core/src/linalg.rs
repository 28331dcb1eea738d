//! Small dense linear algebra on row-major `Vec<Vec<T>>` matrices.
//!
//! Dimensions here never exceed ~8, so nothing is blocked or cached.

use crate::scalar::Scalar;

pub type Mat<T> = Vec<Vec<T>>;

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

pub fn identity<T: Scalar>(n: usize) -> Mat<T> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect()
}

pub fn transpose<T: Scalar>(m: &Mat<T>) -> Mat<T> {
    let n = m.len();
    let c = m.first().map_or(0, |r| r.len());
    (0..c).map(|j| (0..n).map(|i| m[i][j]).collect()).collect()
}

/// Row vector times matrix: `x * m`.
pub fn row_times<T: Scalar>(x: &[T], m: &Mat<T>) -> Vec<T> {
    let c = m.first().map_or(0, |r| r.len());
    let mut out = vec![T::zero(); c];
    for (xi, row) in x.iter().zip(m) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += *xi * *v;
        }
    }
    out
}

/// Integer row vector times real matrix.
pub fn int_row_times<T: Scalar>(x: &[i64], m: &Mat<T>) -> Vec<T> {
    let c = m.first().map_or(0, |r| r.len());
    let mut out = vec![T::zero(); c];
    for (&xi, row) in x.iter().zip(m) {
        if xi == 0 {
            continue;
        }
        let xi = T::from_i64_lossy(xi);
        for (o, v) in out.iter_mut().zip(row) {
            *o += xi * *v;
        }
    }
    out
}

/// Integer row vector times integer matrix.
pub fn int_row_times_int(x: &[i64], m: &[Vec<i64>]) -> Vec<i64> {
    let c = m.first().map_or(0, |r| r.len());
    let mut out = vec![0i64; c];
    for (&xi, row) in x.iter().zip(m) {
        if xi == 0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(row) {
            *o += xi * *v;
        }
    }
    out
}

pub fn int_mat_times<T: Scalar>(u: &[Vec<i64>], m: &Mat<T>) -> Mat<T> {
    u.iter().map(|row| int_row_times(row, m)).collect()
}

/// LU factorisation with partial pivoting. Returns `None` for an exactly
/// singular matrix.
struct Lu<T> {
    lu: Mat<T>,
    perm: Vec<usize>,
    sign: T,
}

fn lu<T: Scalar>(m: &Mat<T>) -> Option<Lu<T>> {
    let n = m.len();
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = T::one();
    for k in 0..n {
        let (piv, best) = (k..n)
            .map(|i| (i, a[i][k].abs()))
            .fold((k, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == T::zero() {
            return None;
        }
        if piv != k {
            a.swap(piv, k);
            perm.swap(piv, k);
            sign = -sign;
        }
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            a[i][k] = f;
            for j in k + 1..n {
                let d = f * a[k][j];
                a[i][j] -= d;
            }
        }
    }
    Some(Lu { lu: a, perm, sign })
}

pub fn determinant<T: Scalar>(m: &Mat<T>) -> T {
    match lu(m) {
        None => T::zero(),
        Some(f) => (0..m.len()).fold(f.sign, |d, i| d * f.lu[i][i]),
    }
}

pub fn inverse<T: Scalar>(m: &Mat<T>) -> Option<Mat<T>> {
    let n = m.len();
    let f = lu(m)?;
    let mut inv = vec![vec![T::zero(); n]; n];
    for col in 0..n {
        // solve A x = e_col
        let mut x: Vec<T> = (0..n)
            .map(|i| if f.perm[i] == col { T::one() } else { T::zero() })
            .collect();
        for i in 0..n {
            for j in 0..i {
                let d = f.lu[i][j] * x[j];
                x[i] -= d;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let d = f.lu[i][j] * x[j];
                x[i] -= d;
            }
            x[i] /= f.lu[i][i];
        }
        for i in 0..n {
            inv[i][col] = x[i];
        }
    }
    Some(inv)
}

pub fn frobenius<T: Scalar>(m: &Mat<T>) -> T {
    m.iter().flatten().map(|v| *v * *v).sum::<T>().sqrt()
}

/// Gram–Schmidt data of a row basis.
#[derive(Debug, Clone)]
pub struct GramSchmidt<T> {
    /// Orthogonalised rows `b*_i`.
    pub bstar: Mat<T>,
    /// `mu[i][j] = <b_i, b*_j> / <b*_j, b*_j>` for `j < i`.
    pub mu: Mat<T>,
    /// `<b*_i, b*_i>`.
    pub bstar_sq: Vec<T>,
}

pub fn gram_schmidt<T: Scalar>(rows: &Mat<T>) -> GramSchmidt<T> {
    let n = rows.len();
    let mut bstar: Mat<T> = Vec::with_capacity(n);
    let mut mu = vec![vec![T::zero(); n]; n];
    let mut bstar_sq = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = rows[i].clone();
        for j in 0..i {
            let m = dot(&rows[i], &bstar[j]) / bstar_sq[j];
            mu[i][j] = m;
            for (vk, bk) in v.iter_mut().zip(&bstar[j]) {
                *vk -= m * *bk;
            }
        }
        mu[i][i] = T::one();
        bstar_sq.push(dot(&v, &v));
        bstar.push(v);
    }
    GramSchmidt { bstar, mu, bstar_sq }
}
