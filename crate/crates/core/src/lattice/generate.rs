//! Standard and seeded test lattices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Lattice;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::scalar::Scalar;

/// `D_n = {x in Z^n : sum x_i even}` (the checkerboard lattice, `n >= 2`).
pub fn checkerboard<T: Scalar>(n: usize) -> Result<Lattice<T>> {
    if n < 2 {
        return Err(Error::Domain("checkerboard lattice needs n >= 2".into()));
    }
    let mut rows: Mat<T> = Vec::with_capacity(n);
    let mut first = vec![T::zero(); n];
    first[0] = T::one();
    first[1] = T::one();
    rows.push(first);
    for i in 1..n {
        let mut r = vec![T::zero(); n];
        r[i - 1] = T::one();
        r[i] = -T::one();
        rows.push(r);
    }
    Lattice::new(rows)
}

/// Integer basis of `Z^n` with determinant 1, built from a seeded product of
/// elementary row operations `row_i += c * row_j` with `c` in `[-3, 3]`.
pub fn unimodular_matrix(n: usize, seed: u64) -> Vec<Vec<i64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect();
    if n < 2 {
        return u;
    }
    for _ in 0..2 * n {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let mut c = rng.gen_range(-3i64..=2);
        if c >= 0 {
            c += 1;
        }
        for k in 0..n {
            let d = c * u[j][k];
            u[i][k] += d;
        }
    }
    u
}

pub fn unimodular<T: Scalar>(n: usize, seed: u64) -> Result<Lattice<T>> {
    Lattice::new(
        unimodular_matrix(n, seed)
            .iter()
            .map(|r| r.iter().map(|&v| T::from_i64_lossy(v)).collect())
            .collect(),
    )
}

/// A seeded generic lattice: a unimodular basis times an upper-triangular
/// matrix with diagonal in `[0.8, 1.25]` and off-diagonal entries in
/// `[-0.3, 0.3]`. Covolume is the product of the diagonal.
pub fn seeded<T: Scalar>(n: usize, seed: u64) -> Result<Lattice<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_1a77_1ce5);
    let mut m: Mat<T> = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        m[i][i] = T::lit(rng.gen_range(0.8..1.25));
        for j in i + 1..n {
            m[i][j] = T::lit(rng.gen_range(-0.3..0.3));
        }
    }
    let u = unimodular_matrix(n, seed);
    Lattice::new(linalg::int_mat_times(&u, &m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unimodular_has_unit_determinant() {
        for seed in 0..20 {
            for n in 1..5 {
                let l = unimodular::<f64>(n, seed).unwrap();
                assert!((l.covolume() - 1.0).abs() < 1e-9);
                assert!(l.same_lattice(&Lattice::integer(n), 1e-9));
            }
        }
    }

    #[test]
    fn seeded_is_reproducible() {
        let a = seeded::<f64>(3, 7).unwrap();
        let b = seeded::<f64>(3, 7).unwrap();
        assert_eq!(a.basis(), b.basis());
        assert_ne!(a.basis(), seeded::<f64>(3, 8).unwrap().basis());
    }

    #[test]
    fn d4_has_24_minimal_vectors() {
        let d4 = checkerboard::<f64>(4).unwrap();
        assert!((d4.covolume() - 2.0).abs() < 1e-12);
        let sv = d4.shortest_vector(2.0).unwrap();
        assert!((sv.sigma - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(sv.minimizers.len(), 24);
    }
}
