//! Tabulated one-dimensional Fourier transform of `e^{-|t|^p}`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::quadrature::{fourier_half_line, Oscillation};
use crate::error::{Error, Result};
use crate::special::{gamma, gamma_q, ln_gamma};

/// Defaults used whenever a table is built on demand.
pub const DEFAULT_R_MAX: f64 = 8.0;
pub const DEFAULT_TOL: f64 = 1e-10;

/// Share of `tol` the tail series may spend on its own truncation.
const SERIES_SHARE: f64 = 1e-2;
const MAX_DOUBLINGS: u32 = 20;

/// `(r, value, slope)` at one grid node.
type Node = (f64, f64, f64);

/// `r -> int_R e^{-|t|^p} e^{-2 pi i r t} dt` on a cubic Hermite grid,
/// continued past the last node by the large-`r` series (see [`tail_series`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transform1DTable {
    pub p: f64,
    pub tol: f64,
    /// Radius the caller asked for; the grid may extend further.
    pub r_max: f64,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
    /// Leading asymptotic coefficient `-pi^{-p-1/2} Gamma((p+1)/2) / Gamma(-p/2)`.
    pub asymptotic_coeff: f64,
}

/// Leading coefficient of `|r|^{-p-1}` in the large-`r` expansion; zero at `p = 2`.
pub fn asymptotic_coeff(p: f64) -> f64 {
    if p >= 2.0 {
        return 0.0;
    }
    let pi = std::f64::consts::PI;
    -pi.powf(-p - 0.5) * gamma((p + 1.0) / 2.0) / gamma(-p / 2.0)
}

/// One transform value and its derivative, each to absolute accuracy `tol`.
pub fn transform_point(p: f64, r: f64, tol: f64) -> Result<(f64, f64)> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let omega = two_pi * r.abs();
    let g = |t: f64| (-t.powf(p)).exp();
    // int_T^inf t^k e^{-t^p} dt = Gamma((k+1)/p, T^p) / p
    let mass0 = |t: f64| gamma((1.0) / p) * gamma_q(1.0 / p, t.powf(p)) / p;
    let (value, _) = fourier_half_line(&g, &mass0, omega, Oscillation::Cos, 0.0, tol / 4.0)?;
    let gt = |t: f64| t * (-t.powf(p)).exp();
    let mass1 = |t: f64| gamma(2.0 / p) * gamma_q(2.0 / p, t.powf(p)) / p;
    let peak = (1.0 / p).powf(1.0 / p);
    let slope_tol = tol / (4.0 * two_pi);
    let (s, _) = fourier_half_line(&gt, &mass1, omega, Oscillation::Sin, peak, slope_tol)?;
    Ok((2.0 * value, -2.0 * two_pi * s * r.signum()))
}

impl Transform1DTable {
    pub fn build(p: f64, r_max: f64, tol: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 2.0) {
            return Err(Error::Domain(format!("exponent p = {p} outside (0, 2]")));
        }
        if !(r_max > 0.0 && r_max.is_finite()) || !(tol > 0.0) {
            return Err(Error::Domain(format!(
                "table needs r_max > 0 and tol > 0 (got {r_max}, {tol})"
            )));
        }
        let theory = asymptotic_coeff(p);
        let mut r_end = r_max;
        let mut end_point = transform_point(p, r_end, tol)?;
        let mut doublings = 0;
        loop {
            let (series, err) = tail_series(p, r_end);
            let gap = (end_point.0 - series).abs();
            if err <= SERIES_SHARE * tol && gap <= 2.0 * tol {
                break;
            }
            doublings += 1;
            if doublings > MAX_DOUBLINGS {
                return Err(Error::ToleranceUnreached { requested: tol, achieved: gap.max(err) });
            }
            r_end *= 2.0;
            end_point = transform_point(p, r_end, tol)?;
        }

        let mut done: Vec<(f64, f64, f64)> = Vec::new();
        const START: usize = 32;
        let mut grid = Vec::with_capacity(START + 1);
        for i in 0..=START {
            let r = r_end * i as f64 / START as f64;
            let (v, s) = if i == START { end_point } else { transform_point(p, r, tol)? };
            grid.push((r, v, s));
        }
        let min_width = r_end * 1e-12;
        let mut stack: Vec<(Node, Node)> =
            grid.windows(2).rev().map(|w| (w[0], w[1])).collect();
        done.push(grid[0]);
        while let Some((a, b)) = stack.pop() {
            let m = 0.5 * (a.0 + b.0);
            let (vm, sm) = transform_point(p, m, tol)?;
            let interp = hermite(a, b, m);
            if (interp - vm).abs() > tol && b.0 - a.0 > min_width {
                let mid = (m, vm, sm);
                stack.push((mid, b));
                stack.push((a, mid));
            } else {
                done.push(b);
            }
        }
        Ok(Transform1DTable {
            p,
            tol,
            r_max,
            nodes: done.iter().map(|x| x.0).collect(),
            values: done.iter().map(|x| x.1).collect(),
            slopes: done.iter().map(|x| x.2).collect(),
            asymptotic_coeff: theory,
        })
    }

    /// Last tabulated radius; the power-law tail is used past it.
    pub fn r_end(&self) -> f64 {
        *self.nodes.last().expect("non-empty table")
    }

    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        let end = self.r_end();
        if r >= end {
            return tail_series(self.p, r).0;
        }
        let i = self.nodes.partition_point(|&x| x <= r).max(1) - 1;
        let a = (self.nodes[i], self.values[i], self.slopes[i]);
        let b = (self.nodes[i + 1], self.values[i + 1], self.slopes[i + 1]);
        hermite(a, b, r)
    }

    /// Bound on `|eval(r) - transform(r)|`.
    ///
    /// On the grid this is twice the build tolerance: quadrature error plus
    /// the Hermite error, which is checked at every cell midpoint. Past the
    /// grid it is the series truncation estimate.
    pub fn error_bound(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= self.r_end() {
            let (v, err) = tail_series(self.p, r);
            err + 4.0 * f64::EPSILON * v.abs()
        } else {
            2.0 * self.tol
        }
    }

    /// `int_y^inf transform(r) dr` for `y >= r_end()`, with an error bound.
    pub fn tail_integral(&self, y: f64) -> (f64, f64) {
        debug_assert!(y >= self.r_end());
        tail_series_integral(self.p, y)
    }

    fn cache_name(p: f64, r_max: f64, tol: f64) -> String {
        format!("transform_p{p:?}_rmax{r_max:?}_tol{tol:e}.json")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

/// On-disk cache of tables keyed by `(p, r_max, tol)`.
#[derive(Debug, Clone)]
pub struct TableCache {
    dir: PathBuf,
}

impl TableCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        TableCache { dir: dir.into() }
    }

    pub fn path_for(&self, p: f64, r_max: f64, tol: f64) -> PathBuf {
        self.dir.join(Transform1DTable::cache_name(p, r_max, tol))
    }

    /// Loads a matching table or builds and stores a fresh one.
    pub fn get(&self, p: f64, r_max: f64, tol: f64) -> Result<Transform1DTable> {
        let path = self.path_for(p, r_max, tol);
        if let Ok(t) = Transform1DTable::load(&path) {
            if t.p == p && t.r_max == r_max && t.tol == tol {
                return Ok(t);
            }
        }
        let t = Transform1DTable::build(p, r_max, tol)?;
        std::fs::create_dir_all(&self.dir)?;
        t.save(&path)?;
        Ok(t)
    }
}

/// Large-`r` series `sum_k c_k (2 pi r)^{-(kp+1)}` with
/// `c_k = (-1)^{k+1} (2/k!) Gamma(kp+1) sin(pi k p / 2)`, from integrating the
/// power series of `e^{-|t|^p}` term by term. Convergent for `p < 1` (and
/// `p = 1` once `2 pi r > 1`), asymptotic for `1 < p < 2`; at `p = 2` the
/// transform is the Gaussian itself. Returns `(value, error estimate)`, the
/// estimate being twice the first omitted term's envelope.
pub fn tail_series(p: f64, r: f64) -> (f64, f64) {
    series_with(p, r, 0.0)
}

/// `int_y^inf` of [`tail_series`], termwise.
pub fn tail_series_integral(p: f64, y: f64) -> (f64, f64) {
    if p >= 2.0 {
        // int_y^inf sqrt(pi) e^{-pi^2 r^2} dr
        let pi = std::f64::consts::PI;
        let v = statrs::function::erf::erfc(pi * y) / (2.0 * pi.sqrt());
        return (v, 4.0 * f64::EPSILON * v);
    }
    series_with(p, y, 1.0)
}

/// Shared loop: `integrate = 0` sums the terms, `1` their tails
/// `int_y^inf term_k = term_k(y) y / (k p)`.
fn series_with(p: f64, r: f64, integrate: f64) -> (f64, f64) {
    let pi = std::f64::consts::PI;
    if p >= 2.0 {
        let v = pi.sqrt() * (-pi * pi * r * r).exp();
        return (v, 4.0 * f64::EPSILON * v);
    }
    let ln_x = (2.0 * pi * r).ln();
    let mut sum = 0.0f64;
    let mut abs_sum = 0.0f64;
    let mut smallest = f64::INFINITY;
    const MAX_TERMS: usize = 400;
    for k in 1..=MAX_TERMS {
        let kp = k as f64 * p;
        let mut ln_env = 2f64.ln() - ln_gamma(k as f64 + 1.0) + ln_gamma(kp + 1.0) - (kp + 1.0) * ln_x;
        if integrate > 0.0 {
            ln_env += r.ln() - kp.ln();
        }
        let env = ln_env.exp();
        if env > smallest {
            // asymptotic series started diverging: stop at the smallest term
            break;
        }
        smallest = env;
        if env <= 1e-18 * abs_sum || env == 0.0 {
            break;
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * env * (0.5 * pi * kp).sin();
        sum += term;
        abs_sum += term.abs();
    }
    (sum, 2.0 * smallest + 4.0 * f64::EPSILON * abs_sum)
}

fn hermite(a: (f64, f64, f64), b: (f64, f64, f64), r: f64) -> f64 {
    let h = b.0 - a.0;
    let s = (r - a.0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * a.1 + h10 * h * a.2 + h01 * b.1 + h11 * h * b.2
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn pointwise_matches_closed_forms() {
        let (v, s) = transform_point(1.0, 1.0, 1e-12).unwrap();
        let d = 1.0 + 4.0 * PI * PI;
        assert!((v - 2.0 / d).abs() < 1e-11);
        assert!((s + 16.0 * PI * PI / (d * d)).abs() < 1e-10, "{s}");
        let (v, _) = transform_point(2.0, 1.0, 1e-12).unwrap();
        assert!((v - PI.sqrt() * (-PI * PI).exp()).abs() < 1e-11);
    }

    #[test]
    fn p1_table_against_closed_form() {
        let t = Transform1DTable::build(1.0, 8.0, 1e-10).unwrap();
        for i in 0..=400 {
            let r = i as f64 * 0.02;
            let exact = 2.0 / (1.0 + 4.0 * PI * PI * r * r);
            assert!((t.eval(r) - exact).abs() < 1e-9, "r = {r}");
        }
        // Past the grid the series is essentially exact.
        for r in [9.0, 20.0, 100.0] {
            let exact = 2.0 / (1.0 + 4.0 * PI * PI * r * r);
            assert!((t.eval(r) - exact).abs() < 1e-14 * exact);
            assert!(t.error_bound(r) < 1e-14);
        }
        let (tail, _) = t.tail_integral(t.r_end());
        let exact = (1.0 / (2.0 * PI * t.r_end())).atan() / PI;
        assert!((tail - exact).abs() < 1e-14);
        assert!((t.eval(1.0) - 0.049409).abs() < 1e-6);
    }

    #[test]
    fn p2_table_against_gaussian() {
        let t = Transform1DTable::build(2.0, 4.0, 1e-10).unwrap();
        assert_eq!(t.asymptotic_coeff, 0.0);
        for i in 0..200 {
            let r = i as f64 * 0.021;
            let exact = PI.sqrt() * (-PI * PI * r * r).exp();
            assert!((t.eval(r) - exact).abs() < 1e-9);
        }
        assert!((t.eval(0.0) - PI.sqrt()).abs() < 1e-8 * PI.sqrt());
    }

    #[test]
    fn half_exponent_table() {
        let tol = 1e-10;
        let t = Transform1DTable::build(0.5, 8.0, tol).unwrap();
        let norm = 2.0 * gamma(3.0);
        assert!((t.eval(0.0) - norm).abs() < 1e-8 * norm);
        for r in [0.0, 5.0, 50.0] {
            assert!(t.eval(r) >= -tol);
        }
        // Junction with the power-law tail is continuous.
        let end = t.r_end();
        let below = t.eval(end * (1.0 - 1e-12));
        let above = t.eval(end * (1.0 + 1e-12));
        assert!((below - above).abs() <= 20.0 * tol);
        // Random interior points against fresh quadrature.
        for r in [0.013, 0.31, 1.7, 3.3, 7.9] {
            let (v, _) = transform_point(0.5, r, 1e-12).unwrap();
            assert!((t.eval(r) - v).abs() <= 10.0 * tol, "r = {r}");
        }
    }

    #[test]
    fn asymptote_p1() {
        assert!((asymptotic_coeff(1.0) - 1.0 / (2.0 * PI * PI)).abs() < 1e-12);
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = TableCache::new(dir.path());
        let a = cache.get(1.5, 2.0, 1e-9).unwrap();
        assert!(cache.path_for(1.5, 2.0, 1e-9).exists());
        let b = cache.get(1.5, 2.0, 1e-9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_exponent() {
        assert!(matches!(Transform1DTable::build(2.5, 1.0, 1e-8), Err(Error::Domain(_))));
        assert!(matches!(Transform1DTable::build(0.0, 1.0, 1e-8), Err(Error::Domain(_))));
    }
}
