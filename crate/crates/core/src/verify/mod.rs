//! Certified lattice sums and empirical checks of the inequalities.

use serde::Serialize;

use crate::bounds::{self, NuBound};
use crate::error::{Error, Result};
use crate::lattice::{BodySpec, Budgets, Lattice};
use crate::scalar::Scalar;
use crate::testfn::TestFunctionSpec;

mod sum;

pub use sum::{certify, certify_at_radius, CertifiedSum, Side, SumOutput, SumQuery, Target};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Worst of two verdicts (FAIL over INCONCLUSIVE over PASS).
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }
}

/// Decides `lhs <= rhs` from enclosures: `(margin, verdict)` with
/// `margin = rhs.lo - lhs.hi`.
pub fn compare_le<T: Scalar>(lhs: (T, T), rhs: (T, T)) -> (T, Verdict) {
    let margin = rhs.0 - lhs.1;
    let verdict = if margin >= T::zero() {
        Verdict::Pass
    } else if lhs.0 > rhs.1 {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    (margin, verdict)
}

/// Flattened view of any check for batch reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub lhs_interval: Option<[f64; 2]>,
    pub rhs_interval: Option<[f64; 2]>,
    pub margin: f64,
    pub verdict: Verdict,
    pub notes: Vec<String>,
    pub details: serde_json::Value,
}

fn iv<T: Scalar>(x: (T, T)) -> Option<[f64; 2]> {
    Some([x.0.f64(), x.1.f64()])
}

fn to_json<S: Serialize>(s: &S) -> serde_json::Value {
    serde_json::to_value(s).unwrap_or(serde_json::Value::Null)
}

fn check_vec<T: Scalar>(name: &str, v: &[T], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::Precondition(format!("{name} has length {} but dimension is {n}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Precondition(format!("{name} has non-finite entries")));
    }
    Ok(())
}

fn check_t<T: Scalar>(t: T) -> Result<()> {
    if !(t > T::zero()) || !t.is_finite() {
        return Err(Error::Precondition(format!("t > 0 required (got t = {t})")));
    }
    Ok(())
}

/// `sum_{lambda in L} f((lambda + v) / t)` to relative accuracy `tol`.
pub fn certified_sum<T: Scalar>(
    lattice: &Lattice<T>,
    spec: &TestFunctionSpec<T>,
    v: &[T],
    t: T,
    tol: T,
    budgets: &Budgets,
) -> Result<CertifiedSum<T>> {
    check_t(t)?;
    check_vec("v", v, lattice.dim())?;
    let m = lattice.scaled(t.recip())?;
    let shift: Vec<T> = v.iter().map(|x| *x / t).collect();
    let q = SumQuery {
        lattice: &m,
        shift: &shift,
        freq: None,
        spec,
        side: Side::Function,
        exclude: None,
        budget: budgets.nodes,
    };
    Ok(certify(&q, Target::Relative(tol))?.sum)
}

/// `sum_{mu in L*} fhat(mu + v)` to relative accuracy `tol`.
pub fn certified_dual_sum<T: Scalar>(
    lattice: &Lattice<T>,
    spec: &TestFunctionSpec<T>,
    v: &[T],
    tol: T,
    budgets: &Budgets,
) -> Result<CertifiedSum<T>> {
    check_vec("v", v, lattice.dim())?;
    let dual = lattice.dual()?;
    let q = SumQuery {
        lattice: &dual,
        shift: v,
        freq: None,
        spec,
        side: Side::Transform,
        exclude: None,
        budget: budgets.nodes,
    };
    Ok(certify(&q, Target::Relative(tol))?.sum)
}

#[derive(Debug, Clone, Serialize)]
pub struct PsfReport<T> {
    /// `sum f((lambda + v)/t)`
    pub lhs: CertifiedSum<T>,
    /// `(t^n / covol) sum_{mu in L*} fhat(t mu) cos(2 pi mu . v)`
    pub rhs: CertifiedSum<T>,
    /// `|lhs - rhs| / |rhs|` from the partial sums.
    pub residual: T,
    /// Worst case of the same ratio over both enclosures.
    pub residual_bound: T,
    /// Imaginary part of the transform side (zero by symmetry).
    pub imaginary: T,
}

impl<T: Scalar> PsfReport<T> {
    pub fn record(&self, max_residual: f64) -> Record {
        let r = self.residual.f64();
        let verdict = if r <= max_residual && self.imaginary.abs().f64() <= 1e-12 {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Record {
            lhs_interval: iv(self.lhs.interval()),
            rhs_interval: iv(self.rhs.interval()),
            margin: max_residual - r,
            verdict,
            notes: vec![],
            details: to_json(&serde_json::json!({
                "residual": r,
                "residual_bound": self.residual_bound.f64(),
                "imaginary": self.imaginary.f64(),
                "lhs_terms": self.lhs.terms,
                "rhs_terms": self.rhs.terms,
            })),
        }
    }
}

/// Both sides of the Poisson summation formula, each to relative accuracy `tol`.
pub fn psf_residual<T: Scalar>(
    lattice: &Lattice<T>,
    spec: &TestFunctionSpec<T>,
    v: &[T],
    t: T,
    tol: T,
    budgets: &Budgets,
) -> Result<PsfReport<T>> {
    let lhs = certified_sum(lattice, spec, v, t, tol, budgets)?;
    let n = lattice.dim();
    let dual = lattice.dual()?.scaled(t)?;
    let freq: Vec<T> = v.iter().map(|x| *x / t).collect();
    let zero = vec![T::zero(); n];
    let prefactor = t.powi(n as i32) / lattice.covolume();
    let goal = tol * lhs.partial.abs() / prefactor;
    let q = SumQuery {
        lattice: &dual,
        shift: &zero,
        freq: Some(&freq),
        spec,
        side: Side::Transform,
        exclude: None,
        budget: budgets.nodes,
    };
    let out = certify(&q, Target::Absolute(goal))?;
    let rhs = out.sum.scale(prefactor);
    let diff = (lhs.partial - rhs.partial).abs();
    let residual = diff / rhs.partial.abs();
    let spread = (lhs.upper() - lhs.lower()) + (rhs.upper() - rhs.lower());
    let residual_bound = (diff + spread) / rhs.lower().abs().max(T::min_positive_value());
    Ok(PsfReport { lhs, rhs, residual, residual_bound, imaginary: out.imaginary * prefactor })
}

/// `lhs` versus `factor * rhs` with the resulting verdict.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport<T> {
    pub lhs: CertifiedSum<T>,
    pub rhs: CertifiedSum<T>,
    pub rhs_factor: T,
    pub lhs_interval: (T, T),
    pub rhs_interval: (T, T),
    pub margin: T,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl<T: Scalar> InequalityReport<T> {
    pub fn record(&self) -> Record {
        Record {
            lhs_interval: iv(self.lhs_interval),
            rhs_interval: iv(self.rhs_interval),
            margin: self.margin.f64(),
            verdict: self.verdict,
            notes: self.notes.clone(),
            details: to_json(&serde_json::json!({
                "rhs_factor": self.rhs_factor.f64(),
                "lhs_terms": self.lhs.terms,
                "rhs_terms": self.rhs.terms,
            })),
        }
    }
}

fn scaled_interval<T: Scalar>(s: &CertifiedSum<T>, c: T) -> (T, T) {
    (s.lower() * c, s.upper() * c)
}

/// `sum f((lambda + v)/t) <= t^n sum f(lambda)` for `t >= 1`.
pub fn check_part1<T: Scalar>(
    lattice: &Lattice<T>,
    spec: &TestFunctionSpec<T>,
    v: &[T],
    t: T,
    tol: T,
    budgets: &Budgets,
) -> Result<InequalityReport<T>> {
    if !(t >= T::one()) {
        return Err(Error::Precondition(format!("t >= 1 required (got t = {t})")));
    }
    let n = lattice.dim();
    let lhs = certified_sum(lattice, spec, v, t, tol, budgets)?;
    let rhs = certified_sum(lattice, spec, &vec![T::zero(); n], T::one(), tol, budgets)?;
    let factor = t.powi(n as i32);
    let lhs_interval = lhs.interval();
    let rhs_interval = scaled_interval(&rhs, factor);
    let mut notes = Vec::new();
    let (margin, verdict) = if t == T::one() && lattice.contains(v, T::lit(1e-12)) {
        // Translating by a lattice vector permutes the terms: equality.
        notes.push("identity case: t = 1 and v in the lattice".to_string());
        let m = rhs.partial * factor - lhs.partial;
        let ok = m.abs() <= T::lit(1e-12) * rhs.partial.abs().max(T::one());
        (m, if ok { Verdict::Pass } else { Verdict::Fail })
    } else {
        compare_le(lhs_interval, rhs_interval)
    };
    Ok(InequalityReport { lhs, rhs, rhs_factor: factor, lhs_interval, rhs_interval, margin, verdict, notes })
}

#[derive(Debug, Clone, Serialize)]
pub struct TailBoundReport<T> {
    /// `sum_{lambda + v outside K} f(lambda + v)`
    pub lhs: CertifiedSum<T>,
    pub rhs_factor: NuBound<T>,
    /// `sum_{lambda} f(lambda)`
    pub rhs_sum: CertifiedSum<T>,
    /// `nu * rhs_sum.lower - lhs.upper`
    pub margin: T,
    pub verdict: Verdict,
}

impl<T: Scalar> TailBoundReport<T> {
    pub fn record(&self) -> Record {
        let nu = self.rhs_factor.value;
        Record {
            lhs_interval: iv(self.lhs.interval()),
            rhs_interval: iv(scaled_interval(&self.rhs_sum, nu)),
            margin: self.margin.f64(),
            verdict: self.verdict,
            notes: vec![],
            details: to_json(&serde_json::json!({
                "nu": nu.f64(),
                "nu_method": self.rhs_factor.method,
                "u_star": self.rhs_factor.u_star.map(|u| u.f64()),
                "truncation_radius": self.lhs.truncation_radius.f64(),
                "lhs_terms": self.lhs.terms,
            })),
        }
    }
}

/// `sum_{lambda + v not in K} f(lambda + v) <= nu * sum_lambda f(lambda)`.
pub fn check_tail_inequality<T: Scalar>(
    lattice: &Lattice<T>,
    spec: &TestFunctionSpec<T>,
    body: &BodySpec<T>,
    v: &[T],
    nu: NuBound<T>,
    budgets: &Budgets,
) -> Result<TailBoundReport<T>> {
    let n = lattice.dim();
    check_vec("v", v, n)?;
    let rhs_sum =
        certified_sum(lattice, spec, &vec![T::zero(); n], T::one(), T::lit(1e-10), budgets)?;
    let floor = T::lit(1e-300);
    let goal = (T::lit(1e-4) * nu.value * rhs_sum.lower()).max(floor);
    let q = SumQuery {
        lattice,
        shift: v,
        freq: None,
        spec,
        side: Side::Function,
        exclude: Some(*body),
        budget: budgets.nodes,
    };
    let lhs = certify(&q, Target::Absolute(goal))?.sum;
    let (margin, verdict) = compare_le(lhs.interval(), scaled_interval(&rhs_sum, nu.value));
    Ok(TailBoundReport { lhs, rhs_factor: nu, rhs_sum, margin, verdict })
}

/// `sum_{L*} fhat(mu + v) >= (1 - 2 nu) sum_{L*} fhat(mu)` when `K` holds no
/// nonzero vector of `L`.
pub fn check_part3<T: Scalar>(
    lattice: &Lattice<T>,
    spec: &TestFunctionSpec<T>,
    body: &BodySpec<T>,
    v: &[T],
    nu: NuBound<T>,
    budgets: &Budgets,
) -> Result<InequalityReport<T>> {
    let n = lattice.dim();
    check_vec("v", v, n)?;
    let zero = vec![T::zero(); n];
    let inside = lattice.enumerate_in_ball_budget(&zero, body.radius, body.p, budgets.nodes)?;
    if let Some(pt) = inside.iter().find(|pt| !pt.is_zero()) {
        return Err(Error::Domain(format!(
            "body contains the nonzero lattice vector with coordinates {:?} (embedding {:?})",
            pt.coords, pt.embedding
        )));
    }
    let tol = T::lit(1e-10);
    let lhs = certified_dual_sum(lattice, spec, v, tol, budgets)?;
    let rhs = certified_dual_sum(lattice, spec, &zero, tol, budgets)?;
    let factor = T::one() - T::lit(2.0) * nu.value;
    let lhs_interval = lhs.interval();
    let rhs_interval = if factor >= T::zero() {
        scaled_interval(&rhs, factor)
    } else {
        (rhs.upper() * factor, rhs.lower() * factor)
    };
    let mut notes = Vec::new();
    if factor <= T::zero() {
        notes.push(format!("trivial: nu = {} >= 1/2", nu.value));
    }
    let dual = lattice.dual()?;
    let (margin, verdict) = if dual.contains(v, T::lit(1e-12)) {
        notes.push("identity case: v in the dual lattice".to_string());
        let m = lhs.partial - factor * rhs.partial;
        let ok = m >= -T::lit(1e-12) * rhs.partial.abs().max(T::one());
        (m, if ok { Verdict::Pass } else { Verdict::Fail })
    } else {
        // lhs >= rhs  <=>  rhs <= lhs
        compare_le(rhs_interval, lhs_interval)
    };
    Ok(InequalityReport { lhs, rhs, rhs_factor: factor, lhs_interval, rhs_interval, margin, verdict, notes })
}

#[derive(Debug, Clone, Serialize)]
pub struct HandshakeReport<T> {
    pub sigma: T,
    pub count: usize,
    pub bound: T,
    pub even: bool,
    pub verdict: Verdict,
}

impl<T: Scalar> HandshakeReport<T> {
    pub fn record(&self) -> Record {
        Record {
            lhs_interval: Some([self.count as f64; 2]),
            rhs_interval: Some([self.bound.f64(); 2]),
            margin: self.bound.f64() - self.count as f64,
            verdict: self.verdict,
            notes: vec![],
            details: to_json(&serde_json::json!({
                "sigma": self.sigma.f64(),
                "count": self.count,
                "even": self.even,
            })),
        }
    }
}

/// Counts nonzero vectors with `||lambda||_p <= u sigma_p` against the bound.
pub fn handshake_census<T: Scalar>(
    lattice: &Lattice<T>,
    p: T,
    u: T,
    budgets: &Budgets,
) -> Result<HandshakeReport<T>> {
    let n = lattice.dim();
    let bound = bounds::handshake_bound(n, p, u)?;
    let sv = lattice.shortest_vector_budget(p, budgets.nodes)?;
    let zero = vec![T::zero(); n];
    let radius = u * sv.sigma * (T::one() + T::lit(crate::lattice::TIE_TOLERANCE));
    let mut count = 0usize;
    lattice.for_each_in_ball(&zero, radius, p, budgets.nodes, |c, _| {
        if c.iter().any(|&x| x != 0) {
            count += 1;
        }
    })?;
    let verdict = if T::from_usize_lossy(count) <= bound { Verdict::Pass } else { Verdict::Fail };
    Ok(HandshakeReport { sigma: sv.sigma, count, bound, even: count.is_multiple_of(2), verdict })
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferenceReport<T> {
    pub p: T,
    pub sigma: T,
    pub rho_bracket: (T, T),
    pub product_lower: T,
    pub product_upper: T,
    pub bound: T,
    pub verdict: Verdict,
}

impl<T: Scalar> TransferenceReport<T> {
    pub fn record(&self) -> Record {
        Record {
            lhs_interval: iv((self.product_lower, self.product_upper)),
            rhs_interval: Some([self.bound.f64(); 2]),
            margin: (self.bound - self.product_upper).f64(),
            verdict: self.verdict,
            notes: vec!["covering radius is a certified bracket, not a point value".into()],
            details: to_json(&serde_json::json!({
                "sigma": self.sigma.f64(),
                "rho_lower": self.rho_bracket.0.f64(),
                "rho_upper": self.rho_bracket.1.f64(),
            })),
        }
    }
}

/// `sigma_p(L) rho_p(L*)` against the l2 or l1 transference bound.
pub fn transference_check<T: Scalar>(
    lattice: &Lattice<T>,
    p: T,
    resolution: usize,
    budgets: &Budgets,
) -> Result<TransferenceReport<T>> {
    let n = lattice.dim();
    let bound = if p == T::lit(2.0) {
        bounds::transference_bound_l2(n)
    } else if p == T::one() {
        bounds::transference_bound_l1::<T>(n).exact
    } else {
        return Err(Error::Domain(format!("transference check needs p in {{1, 2}} (got {p})")));
    };
    let sigma = lattice.shortest_vector_budget(p, budgets.nodes)?.sigma;
    let rho = lattice.dual()?.covering_radius_estimate_budget(p, resolution, budgets)?;
    let product_lower = sigma * rho.0;
    let product_upper = sigma * rho.1;
    let (_, verdict) = compare_le((product_lower, product_upper), (bound, bound));
    Ok(TransferenceReport { p, sigma, rho_bracket: rho, product_lower, product_upper, bound, verdict })
}

/// One row of radius / tail sum / bound data.
#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub radius: f64,
    pub tail_upper: f64,
    pub bound: f64,
}

/// Tail sums outside `radius * B_p` against `nu(radius) * sum f` over a
/// list of radii.
pub fn tail_curve<T: Scalar>(
    lattice: &Lattice<T>,
    spec: &TestFunctionSpec<T>,
    p: T,
    v: &[T],
    radii: &[T],
    budgets: &Budgets,
) -> Result<Vec<CurvePoint>> {
    let n = lattice.dim();
    radii
        .iter()
        .map(|&r| {
            let nu = bounds::nu_bound(spec, p, r, n)?;
            let body = BodySpec::new(p, r)?;
            let rep = check_tail_inequality(lattice, spec, &body, v, nu, budgets)?;
            Ok(CurvePoint {
                radius: r.f64(),
                tail_upper: rep.lhs.upper().f64(),
                bound: (nu.value * rep.rhs_sum.lower()).f64(),
            })
        })
        .collect()
}
