//! Branch-and-bound enumeration on Gram–Schmidt coordinates, and the
//! extremal quantities built on it (shortest vector, closest-vector
//! distance, covering-radius bracket).

use rayon::prelude::*;

use super::{Budgets, Lattice, LatticePoint};
use crate::error::{Error, Result};
use crate::linalg::{self, GramSchmidt};
use crate::scalar::{norm_p, Scalar};

/// Relative tie tolerance for minimal vectors.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Result of [`Lattice::shortest_vector`].
#[derive(Debug, Clone, PartialEq)]
pub struct ShortestVector<T> {
    pub sigma: T,
    pub minimizers: Vec<LatticePoint<T>>,
}

/// Radius of the `l_2` ball containing the `l_p` ball of radius `r` in `R^n`.
pub(crate) fn circumscribed_l2<T: Scalar>(r: T, p: T, n: usize) -> T {
    let two = T::lit(2.0);
    if p <= two {
        return r;
    }
    let exponent = T::lit(0.5) - if p.is_infinite() { T::zero() } else { p.recip() };
    r * T::from_usize_lossy(n).powf(exponent)
}

struct Search<'a, T, F> {
    gs: &'a GramSchmidt<T>,
    target: Vec<T>,
    bound: T,
    x: Vec<i64>,
    nodes: u64,
    budget: u64,
    found: usize,
    visit: F,
}

impl<T: Scalar, F: FnMut(&[i64])> Search<'_, T, F> {
    fn descend(&mut self, level: usize, used: T) -> bool {
        let n = self.x.len();
        let mut ctr = self.target[level];
        for i in level + 1..n {
            ctr -= T::from_i64_lossy(self.x[i]) * self.gs.mu[i][level];
        }
        let bsq = self.gs.bstar_sq[level];
        let rem = self.bound - used;
        if rem < T::zero() {
            return true;
        }
        let w = (rem / bsq).sqrt();
        let lo = (ctr - w).ceil().to_i64().unwrap_or(i64::MIN / 2);
        let hi = (ctr + w).floor().to_i64().unwrap_or(i64::MAX / 2);
        for xi in lo..=hi {
            self.nodes += 1;
            if self.nodes > self.budget {
                return false;
            }
            let d = T::from_i64_lossy(xi) - ctr;
            let next = used + d * d * bsq;
            if next > self.bound {
                continue;
            }
            self.x[level] = xi;
            if level == 0 {
                self.found += 1;
                (self.visit)(&self.x);
            } else if !self.descend(level - 1, next) {
                return false;
            }
        }
        self.x[level] = 0;
        true
    }
}

impl<T: Scalar> Lattice<T> {
    /// Visits every `c` (coordinates in the reduced basis) whose point lies
    /// within `l_2` distance `radius` of `center` (plus a hair of slack; the
    /// caller filters exactly).
    fn search_l2<F: FnMut(&[i64])>(
        &self,
        center: &[T],
        radius: T,
        budget: u64,
        visit: F,
    ) -> Result<usize> {
        let red = &*self.reduced;
        let n = self.dim();
        let gs = &red.gs;
        let target: Vec<T> = (0..n)
            .map(|j| linalg::dot(center, &gs.bstar[j]) / gs.bstar_sq[j])
            .collect();
        let slack = T::epsilon().sqrt() * T::lit(0.1);
        let scale = gs.bstar_sq.iter().fold(T::zero(), |m, v| m.max(*v));
        let bound = radius * radius * (T::one() + slack) + slack * slack * scale;
        let mut s = Search {
            gs,
            target,
            bound,
            x: vec![0; n],
            nodes: 0,
            budget,
            found: 0,
            visit,
        };
        if s.descend(n - 1, T::zero()) {
            Ok(s.found)
        } else {
            Err(Error::BudgetExceeded {
                what: "enumeration nodes",
                budget,
                found: s.found,
                remainder: None,
            })
        }
    }

    /// Calls `f(coords, lambda)` for every lattice vector with
    /// `||lambda + v||_p <= r`; `coords` are in the original basis.
    /// Returns the number of points visited.
    pub fn for_each_in_ball<F>(&self, v: &[T], r: T, p: T, budget: u64, mut f: F) -> Result<usize>
    where
        F: FnMut(&[i64], &[T]),
    {
        self.check_query(v, r, p)?;
        let red = &*self.reduced;
        let center: Vec<T> = v.iter().map(|x| -*x).collect();
        let r2 = circumscribed_l2(r, p, self.dim());
        let mut shifted = vec![T::zero(); self.dim()];
        let mut count = 0usize;
        self.search_l2(&center, r2, budget, |c| {
            let lambda = linalg::int_row_times(c, &red.basis);
            for ((s, l), vi) in shifted.iter_mut().zip(&lambda).zip(v) {
                *s = *l + *vi;
            }
            if norm_p(&shifted, p) <= r {
                let coords = linalg::int_row_times_int(c, &red.transform);
                count += 1;
                f(&coords, &lambda);
            }
        })?;
        Ok(count)
    }

    /// Every `lambda` in the lattice with `||lambda + v||_p <= r`, sorted by
    /// coordinates. Uses the default node budget.
    pub fn enumerate_in_ball(&self, v: &[T], r: T, p: T) -> Result<Vec<LatticePoint<T>>> {
        self.enumerate_in_ball_budget(v, r, p, Budgets::default().nodes)
    }

    pub fn enumerate_in_ball_budget(
        &self,
        v: &[T],
        r: T,
        p: T,
        budget: u64,
    ) -> Result<Vec<LatticePoint<T>>> {
        let mut out = Vec::new();
        self.for_each_in_ball(v, r, p, budget, |c, l| {
            out.push(LatticePoint {
                coords: c.to_vec(),
                embedding: l.to_vec(),
            })
        })?;
        out.sort_by(|a, b| a.coords.cmp(&b.coords));
        Ok(out)
    }

    fn check_query(&self, v: &[T], r: T, p: T) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::Domain(format!(
                "shift has length {}, lattice dimension is {}",
                v.len(),
                self.dim()
            )));
        }
        if !(r >= T::zero()) || !r.is_finite() {
            return Err(Error::Domain(format!("radius {r} must be finite and >= 0")));
        }
        if !(p > T::zero()) {
            return Err(Error::Domain(format!("exponent p = {p} must be > 0")));
        }
        Ok(())
    }

    /// `sigma_p(L)` and all nonzero vectors attaining it (within
    /// [`TIE_TOLERANCE`] relative).
    pub fn shortest_vector(&self, p: T) -> Result<ShortestVector<T>> {
        self.shortest_vector_budget(p, Budgets::default().nodes)
    }

    pub fn shortest_vector_budget(&self, p: T, budget: u64) -> Result<ShortestVector<T>> {
        let n = self.dim();
        let upper = self
            .reduced
            .basis
            .iter()
            .chain(self.basis.iter())
            .map(|b| norm_p(b, p))
            .fold(T::infinity(), T::min);
        let tie = T::lit(TIE_TOLERANCE);
        let zero = vec![T::zero(); n];
        let mut pts = self.enumerate_in_ball_budget(&zero, upper * (T::one() + tie), p, budget)?;
        pts.retain(|pt| !pt.is_zero());
        let sigma = pts
            .iter()
            .map(|pt| pt.norm(p))
            .fold(T::infinity(), T::min);
        pts.retain(|pt| pt.norm(p) <= sigma * (T::one() + tie));
        Ok(ShortestVector {
            sigma,
            minimizers: pts,
        })
    }

    /// `min_{lambda} ||lambda - target||_p`, exact up to rounding.
    ///
    /// The search radius starts at the distance of the Babai rounding point
    /// and doubles if (through rounding) nothing is found.
    pub fn closest_distance(&self, target: &[T], p: T, budget: u64) -> Result<T> {
        let red = &*self.reduced;
        let y = linalg::row_times(target, &red.inverse);
        let rounded: Vec<i64> = y
            .iter()
            .map(|c| c.round().to_i64().unwrap_or(0))
            .collect();
        let babai = linalg::int_row_times(&rounded, &red.basis);
        let diff: Vec<T> = babai.iter().zip(target).map(|(a, b)| *a - *b).collect();
        let mut radius = norm_p(&diff, p) * (T::one() + T::lit(TIE_TOLERANCE));
        if radius == T::zero() {
            return Ok(T::zero());
        }
        let shift: Vec<T> = target.iter().map(|x| -*x).collect();
        loop {
            let mut best = T::infinity();
            let mut diff = vec![T::zero(); target.len()];
            self.for_each_in_ball(&shift, radius, p, budget, |_, l| {
                for ((d, li), s) in diff.iter_mut().zip(l).zip(&shift) {
                    *d = *li + *s;
                }
                best = best.min(norm_p(&diff, p));
            })?;
            if best.is_finite() {
                return Ok(best);
            }
            radius *= T::lit(2.0);
        }
    }

    /// Certified bracket `lower <= rho_p(L) <= upper` from a
    /// `resolution^n` grid over the fundamental parallelepiped of the
    /// reduced basis. `upper` adds the largest distance from a point of a
    /// grid cell to its nearest grid corner.
    pub fn covering_radius_estimate(&self, p: T, resolution: usize) -> Result<(T, T)> {
        self.covering_radius_estimate_budget(p, resolution, &Budgets::default())
    }

    pub fn covering_radius_estimate_budget(
        &self,
        p: T,
        resolution: usize,
        budgets: &Budgets,
    ) -> Result<(T, T)> {
        if resolution < 2 {
            return Err(Error::Domain(format!("resolution {resolution} must be >= 2")));
        }
        if !(p > T::zero()) {
            return Err(Error::Domain(format!("exponent p = {p} must be > 0")));
        }
        let n = self.dim();
        let total = (resolution as u64)
            .checked_pow(n as u32)
            .filter(|t| *t <= budgets.grid)
            .ok_or(Error::BudgetExceeded {
                what: "covering-radius grid samples",
                budget: budgets.grid,
                found: 0,
                remainder: None,
            })?;
        let basis = &self.reduced.basis;
        let res = T::from_usize_lossy(resolution);
        let lower = (0..total)
            .into_par_iter()
            .map(|idx| {
                let mut rest = idx;
                let mut v = vec![T::zero(); n];
                for b in basis {
                    let k = T::from_u64(rest % resolution as u64).unwrap_or_default() / res;
                    rest /= resolution as u64;
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi += k * *bi;
                    }
                }
                self.closest_distance(&v, p, budgets.nodes)
            })
            .try_reduce(|| T::zero(), |a, b| Ok(a.max(b)))?;
        let half_cell = half_cell_radius(basis, p, res);
        let upper = if p >= T::one() {
            lower + half_cell
        } else {
            (lower.powf(p) + half_cell.powf(p)).powf(p.recip())
        };
        Ok((lower, upper))
    }
}

/// Largest `||sum s_i b_i / res||_p` over `|s_i| <= 1/2`.
fn half_cell_radius<T: Scalar>(basis: &[Vec<T>], p: T, res: T) -> T {
    let n = basis.len();
    let half = T::lit(0.5) / res;
    if p < T::one() {
        let s: T = basis.iter().map(|b| norm_p(b, p).powf(p)).sum();
        return half * s.powf(p.recip());
    }
    // convex in s: the maximum sits on a vertex; +-symmetry halves the work
    let mut best = T::zero();
    for mask in 0u32..(1 << (n - 1)) {
        let mut v = vec![T::zero(); n];
        for (i, b) in basis.iter().enumerate() {
            let sign = if i > 0 && (mask >> (i - 1)) & 1 == 1 { -T::one() } else { T::one() };
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi += sign * *bi;
            }
        }
        best = best.max(norm_p(&v, p));
    }
    best * half
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    /// Brute-force oracle: scan the coefficient box `[-k, k]^n`.
    fn brute_ball(l: &Lattice<f64>, v: &[f64], r: f64, p: f64, k: i64) -> BTreeSet<Vec<i64>> {
        let n = l.dim();
        let mut out = BTreeSet::new();
        let mut c = vec![-k; n];
        loop {
            let x = linalg::int_row_times(&c, l.basis());
            let s: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + b).collect();
            if norm_p(&s, p) <= r {
                out.insert(c.clone());
            }
            let mut i = 0;
            while i < n {
                c[i] += 1;
                if c[i] <= k {
                    break;
                }
                c[i] = -k;
                i += 1;
            }
            if i == n {
                return out;
            }
        }
    }

    fn coords(pts: &[LatticePoint<f64>]) -> BTreeSet<Vec<i64>> {
        pts.iter().map(|p| p.coords.clone()).collect()
    }

    #[test]
    fn unit_balls_of_z2() {
        let z = Lattice::<f64>::integer(2);
        let l2 = z.enumerate_in_ball(&[0.0, 0.0], 1.0, 2.0).unwrap();
        let l1 = z.enumerate_in_ball(&[0.0, 0.0], 1.0, 1.0).unwrap();
        assert_eq!(l2.len(), 5);
        assert_eq!(l1.len(), 5);
        assert_eq!(coords(&l2), brute_ball(&z, &[0.0, 0.0], 1.0, 2.0, 2));
        assert_eq!(coords(&l1), brute_ball(&z, &[0.0, 0.0], 1.0, 1.0, 2));
    }

    #[test]
    fn zero_radius_gives_origin() {
        let l = Lattice::new(vec![vec![1.0, 0.3, 0.0], vec![0.2, 1.1, 0.0], vec![0.0, 0.5, 0.9]])
            .unwrap();
        for p in [0.5, 1.0, 2.0, f64::INFINITY] {
            let pts = l.enumerate_in_ball(&[0.0; 3], 0.0, p).unwrap();
            assert_eq!(pts.len(), 1);
            assert!(pts[0].is_zero());
        }
    }

    #[test]
    fn matches_brute_force_on_skewed_basis() {
        let l = Lattice::new(vec![vec![1.0, 0.0, 0.0], vec![3.0, 1.0, 0.0], vec![-2.0, 2.0, 1.0]])
            .unwrap();
        let v = [0.3, -0.2, 0.45];
        for p in [0.5, 1.0, 2.0, 3.0, f64::INFINITY] {
            let got = coords(&l.enumerate_in_ball(&v, 2.5, p).unwrap());
            let want = brute_ball(&l, &v, 2.5, p, 25);
            assert_eq!(got, want, "p = {p}");
        }
    }

    #[test]
    fn infinity_ball_needs_wider_l2_ball() {
        // corners of the l_inf ball sit at l_2 distance sqrt(n) * r
        let z = Lattice::<f64>::integer(3);
        let pts = z.enumerate_in_ball(&[0.0; 3], 1.0, f64::INFINITY).unwrap();
        assert_eq!(pts.len(), 27);
    }

    #[test]
    fn budget_is_enforced() {
        let z = Lattice::<f64>::integer(3);
        match z.enumerate_in_ball_budget(&[0.0; 3], 10.0, 2.0, 100) {
            Err(Error::BudgetExceeded { budget, .. }) => assert_eq!(budget, 100),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn shortest_vector_of_integer_lattices() {
        for n in 1..5 {
            for p in [0.5, 1.0, 2.0, 7.0] {
                let sv = Lattice::<f64>::integer(n).shortest_vector(p).unwrap();
                assert_eq!(sv.sigma, 1.0);
                assert_eq!(sv.minimizers.len(), 2 * n);
            }
            // every nonzero vector of {-1,0,1}^n has sup-norm 1
            let sv = Lattice::<f64>::integer(n).shortest_vector(f64::INFINITY).unwrap();
            assert_eq!(sv.minimizers.len(), 3usize.pow(n as u32) - 1);
        }
    }

    #[test]
    fn shortest_vector_l1_example() {
        let l = Lattice::new(vec![vec![2.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let sv = l.shortest_vector(1.0).unwrap();
        assert_eq!(sv.sigma, 2.0);
        let emb: BTreeSet<Vec<i64>> = sv
            .minimizers
            .iter()
            .map(|p| p.embedding.iter().map(|x| *x as i64).collect())
            .collect();
        // brute-force oracle over the coefficient box; (0, 2) = 2(1, 1) - (2, 0) ties too
        let want: BTreeSet<Vec<i64>> = brute_ball(&l, &[0.0, 0.0], 2.0, 1.0, 6)
            .into_iter()
            .filter(|c| c.iter().any(|&x| x != 0))
            .map(|c| linalg::int_row_times(&c, l.basis()).iter().map(|x| *x as i64).collect())
            .collect();
        assert_eq!(want.len(), 8);
        assert!(want.contains(&vec![0, 2]));
        assert_eq!(emb, want);
    }

    #[test]
    fn shortest_vector_scales() {
        let l = Lattice::new(vec![vec![1.0f64, 0.2], vec![0.3, 1.4]]).unwrap();
        let s = l.shortest_vector(1.5).unwrap().sigma;
        let s3 = l.scaled(3.0).unwrap().shortest_vector(1.5).unwrap().sigma;
        assert!((s3 - 3.0 * s).abs() < 1e-12);
    }

    #[test]
    fn covering_radius_of_z() {
        let (lo, hi) = Lattice::<f64>::integer(1).covering_radius_estimate(2.0, 8).unwrap();
        assert!(lo <= 0.5 && 0.5 <= hi);
        assert_eq!(lo, 0.5);
    }

    #[test]
    fn covering_radius_of_z2_l2() {
        let (lo, hi) = Lattice::<f64>::integer(2).covering_radius_estimate(2.0, 64).unwrap();
        let want = 2f64.sqrt() / 2.0;
        assert!(lo <= want + 1e-12 && want <= hi);
        assert!(hi - lo <= 0.05);
    }

    #[test]
    fn covering_radius_of_z3_l1() {
        let (lo, hi) = Lattice::<f64>::integer(3).covering_radius_estimate(1.0, 8).unwrap();
        assert!((lo - 1.5).abs() < 1e-12);
        assert!(hi >= 1.5);
    }

    #[test]
    fn covering_grid_budget() {
        let b = Budgets {
            nodes: 1_000_000,
            grid: 1000,
        };
        assert!(matches!(
            Lattice::<f64>::integer(3).covering_radius_estimate_budget(2.0, 11, &b),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn closest_distance_brute_force() {
        let l = Lattice::new(vec![vec![1.0, 0.0], vec![0.4, 1.3]]).unwrap();
        let t = [0.77, -2.31];
        for p in [1.0, 2.0] {
            let d = l.closest_distance(&t, p, 1_000_000).unwrap();
            let shift = [-t[0], -t[1]];
            let brute = brute_ball(&l, &shift, 10.0, p, 20)
                .into_iter()
                .map(|c| {
                    let x = linalg::int_row_times(&c, l.basis());
                    norm_p(&[x[0] - t[0], x[1] - t[1]], p)
                })
                .fold(f64::INFINITY, f64::min);
            assert!((d - brute).abs() < 1e-12);
        }
    }
}
