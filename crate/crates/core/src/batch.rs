//! Manifest-driven batch verification with deterministic JSON reports.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{Error, Result};
use crate::lattice::{generate, io, BodySpec, Budgets, Lattice};
use crate::scalar::sig12;
use crate::testfn::{self, Family, TestFunctionSpec, Transform1DTable};
use crate::verify::{self, Record, Verdict};

/// Where a check's lattice comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LatticeRef {
    /// `Z^n`
    Integer(usize),
    /// `D_n`
    Checkerboard(usize),
    /// `Z^n` under a seeded unimodular change of basis.
    Unimodular { dim: usize, seed: u64 },
    /// Generic seeded lattice (unimodular times a perturbed triangle).
    Seeded { dim: usize, seed: u64 },
    File(PathBuf),
    Basis(Vec<Vec<f64>>),
    Scaled { lattice: Box<LatticeRef>, by: f64 },
}

impl LatticeRef {
    pub fn id(&self) -> String {
        match self {
            LatticeRef::Integer(n) => format!("Z^{n}"),
            LatticeRef::Checkerboard(n) => format!("D_{n}"),
            LatticeRef::Unimodular { dim, seed } => format!("unimodular(n={dim}, seed={seed})"),
            LatticeRef::Seeded { dim, seed } => format!("seeded(n={dim}, seed={seed})"),
            LatticeRef::File(p) => p.display().to_string(),
            LatticeRef::Basis(b) => format!("basis{b:?}"),
            LatticeRef::Scaled { lattice, by } => format!("{by}*{}", lattice.id()),
        }
    }

    pub fn resolve(&self, base: &Path) -> Result<Lattice<f64>> {
        match self {
            LatticeRef::Integer(n) => {
                if *n == 0 {
                    return Err(Error::InvalidLattice("dimension must be positive".into()));
                }
                Ok(Lattice::integer(*n))
            }
            LatticeRef::Checkerboard(n) => generate::checkerboard(*n),
            LatticeRef::Unimodular { dim, seed } => generate::unimodular(*dim, *seed),
            LatticeRef::Seeded { dim, seed } => generate::seeded(*dim, *seed),
            LatticeRef::File(p) => io::read_lattice(&base.join(p)),
            LatticeRef::Basis(b) => Lattice::new(b.clone()),
            LatticeRef::Scaled { lattice, by } => lattice.resolve(base)?.scaled(*by),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionRef {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

/// An explicit vector, or `"zero"` / `"random"` (seeded per check).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorRef {
    Explicit(Vec<f64>),
    Named(String),
}

impl Default for VectorRef {
    fn default() -> Self {
        VectorRef::Named("zero".into())
    }
}

/// `K = radius * B_p`, with the radius given directly or derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyRef {
    pub p: f64,
    /// Explicit radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Gaussian parameter: radius `sqrt(tau n / pi)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Supergaussian scale: radius `t (n/p)^{1/p}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// l1 scale for the cosh product: radius `(1 + C*) alpha n`;
    /// `alpha = 0` picks `sqrt(3)/(2 pi) + 3/sqrt(n)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Fraction of the shortest nonzero vector's `l_p` length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_fraction: Option<f64>,
}

impl BodyRef {
    fn resolve(&self, lattice: &Lattice<f64>, budgets: &Budgets) -> Result<BodySpec<f64>> {
        let n = lattice.dim();
        let given = [self.radius, self.tau, self.t, self.alpha, self.sigma_fraction]
            .iter()
            .filter(|x| x.is_some())
            .count();
        if given != 1 {
            return Err(Error::Parse(
                "body needs exactly one of radius, tau, t, alpha, sigma_fraction".into(),
            ));
        }
        let radius = if let Some(r) = self.radius {
            r
        } else if let Some(tau) = self.tau {
            bounds::gaussian_radius(tau, n)
        } else if let Some(t) = self.t {
            t * (n as f64 / self.p).powf(1.0 / self.p)
        } else if let Some(a) = self.alpha {
            let a = if a == 0.0 { bounds::l1_alpha(n) } else { a };
            bounds::cosh_ball_radius(a, n)
        } else {
            let f = self.sigma_fraction.unwrap_or(1.0);
            f * lattice.shortest_vector_budget(self.p, budgets.nodes)?.sigma
        };
        BodySpec::new(self.p, radius)
    }
}

fn default_t() -> f64 {
    1.0
}

fn default_tol() -> f64 {
    1e-12
}

fn default_samples() -> usize {
    10_000
}

fn default_resolution() -> usize {
    16
}

fn default_max_residual() -> f64 {
    1e-8
}

fn default_dim() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    /// Certified `sum f((lambda + v)/t)`.
    Theta {
        #[serde(default)]
        lattice: Option<LatticeRef>,
        function: FunctionRef,
        #[serde(default)]
        v: VectorRef,
        #[serde(default = "default_t")]
        t: f64,
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default)]
        group: Option<String>,
    },
    Psf {
        #[serde(default)]
        lattice: Option<LatticeRef>,
        function: FunctionRef,
        #[serde(default)]
        v: VectorRef,
        #[serde(default = "default_t")]
        t: f64,
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default = "default_max_residual")]
        max_residual: f64,
        #[serde(default)]
        group: Option<String>,
    },
    Part1 {
        #[serde(default)]
        lattice: Option<LatticeRef>,
        function: FunctionRef,
        #[serde(default)]
        v: VectorRef,
        #[serde(default = "default_t")]
        t: f64,
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default)]
        group: Option<String>,
    },
    Tail {
        #[serde(default)]
        lattice: Option<LatticeRef>,
        function: FunctionRef,
        body: BodyRef,
        #[serde(default)]
        v: VectorRef,
        #[serde(default)]
        group: Option<String>,
    },
    Part3 {
        #[serde(default)]
        lattice: Option<LatticeRef>,
        function: FunctionRef,
        body: BodyRef,
        #[serde(default)]
        v: VectorRef,
        #[serde(default)]
        group: Option<String>,
    },
    Transference {
        #[serde(default)]
        lattice: Option<LatticeRef>,
        p: f64,
        #[serde(default = "default_resolution")]
        resolution: usize,
        #[serde(default)]
        group: Option<String>,
    },
    #[serde(alias = "kissing")]
    Handshake {
        #[serde(default)]
        lattice: Option<LatticeRef>,
        p: f64,
        u: f64,
        #[serde(default)]
        expect_count: Option<usize>,
        #[serde(default)]
        group: Option<String>,
    },
    Hypotheses {
        function: FunctionRef,
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default)]
        group: Option<String>,
    },
    /// `C*` inside `[0.424785, 0.424795]`.
    Cstar {
        #[serde(default)]
        group: Option<String>,
    },
    /// `(1 + C*)^2 3 / (4 pi^2) < 0.154264`.
    L1Constant {
        #[serde(default)]
        group: Option<String>,
    },
    /// Closed forms against the optimizer on the standard grid.
    ClosedForms {
        #[serde(default)]
        group: Option<String>,
    },
}

impl CheckSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CheckSpec::Theta { .. } => "theta",
            CheckSpec::Psf { .. } => "psf",
            CheckSpec::Part1 { .. } => "part1",
            CheckSpec::Tail { .. } => "tail",
            CheckSpec::Part3 { .. } => "part3",
            CheckSpec::Transference { .. } => "transference",
            CheckSpec::Handshake { .. } => "handshake",
            CheckSpec::Hypotheses { .. } => "hypotheses",
            CheckSpec::Cstar { .. } => "cstar",
            CheckSpec::L1Constant { .. } => "l1_constant",
            CheckSpec::ClosedForms { .. } => "closed_forms",
        }
    }

    pub fn group(&self) -> Option<&str> {
        match self {
            CheckSpec::Theta { group, .. }
            | CheckSpec::Psf { group, .. }
            | CheckSpec::Part1 { group, .. }
            | CheckSpec::Tail { group, .. }
            | CheckSpec::Part3 { group, .. }
            | CheckSpec::Transference { group, .. }
            | CheckSpec::Handshake { group, .. }
            | CheckSpec::Hypotheses { group, .. }
            | CheckSpec::Cstar { group }
            | CheckSpec::L1Constant { group }
            | CheckSpec::ClosedForms { group } => group.as_deref(),
        }
    }

    fn lattice(&self) -> Option<&Option<LatticeRef>> {
        match self {
            CheckSpec::Theta { lattice, .. }
            | CheckSpec::Psf { lattice, .. }
            | CheckSpec::Part1 { lattice, .. }
            | CheckSpec::Tail { lattice, .. }
            | CheckSpec::Part3 { lattice, .. }
            | CheckSpec::Transference { lattice, .. }
            | CheckSpec::Handshake { lattice, .. } => Some(lattice),
            _ => None,
        }
    }

    fn function(&self) -> Option<&FunctionRef> {
        match self {
            CheckSpec::Theta { function, .. }
            | CheckSpec::Psf { function, .. }
            | CheckSpec::Part1 { function, .. }
            | CheckSpec::Tail { function, .. }
            | CheckSpec::Part3 { function, .. }
            | CheckSpec::Hypotheses { function, .. } => Some(function),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    /// Default lattice for checks that do not name one.
    #[serde(default)]
    pub lattice_file: Option<PathBuf>,
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// CSV of radius / tail sum / bound rows for every tail check.
    #[serde(default)]
    pub plot_data: Option<PathBuf>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("manifest: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Keeps only the checks labelled `group`.
    pub fn only_group(&self, group: &str) -> Manifest {
        Manifest {
            checks: self.checks.iter().filter(|c| c.group() == Some(group)).cloned().collect(),
            ..self.clone()
        }
    }
}

/// A check with everything resolved and validated.
struct Prepared {
    index: usize,
    spec: CheckSpec,
    lattice: Option<(String, Lattice<f64>)>,
    function: Option<TestFunctionSpec<f64>>,
    v: Option<Vec<f64>>,
}

fn check_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (index as u64).wrapping_add(0xA076_1D64_78BD_642F)
}

fn resolve_vector(v: &VectorRef, n: usize, seed: u64) -> Result<Vec<f64>> {
    match v {
        VectorRef::Explicit(x) if x.len() == n => Ok(x.clone()),
        VectorRef::Explicit(x) => Err(Error::Parse(format!(
            "vector has length {} but the lattice has dimension {n}",
            x.len()
        ))),
        VectorRef::Named(s) if s == "zero" => Ok(vec![0.0; n]),
        VectorRef::Named(s) if s == "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        }
        VectorRef::Named(s) => {
            Err(Error::Parse(format!("vector '{s}' must be an array, \"zero\" or \"random\"")))
        }
    }
}

/// Validates every check and resolves lattices, functions and vectors.
/// Nothing expensive beyond table construction happens here.
fn prepare(m: &Manifest, base: &Path) -> Result<Vec<Prepared>> {
    if m.checks.is_empty() {
        return Err(Error::Parse("manifest has no checks".into()));
    }
    let default_lattice = match &m.lattice_file {
        Some(p) => Some((p.display().to_string(), io::read_lattice(&base.join(p))?)),
        None => None,
    };
    let mut tables: HashMap<u64, Arc<Transform1DTable>> = HashMap::new();
    let mut out = Vec::with_capacity(m.checks.len());
    for (index, spec) in m.checks.iter().enumerate() {
        let ctx = |e: Error| match e {
            Error::Parse(msg) => Error::Parse(format!("check {index} ({}): {msg}", spec.name())),
            Error::Domain(msg) => Error::Domain(format!("check {index} ({}): {msg}", spec.name())),
            Error::Precondition(msg) => {
                Error::Precondition(format!("check {index} ({}): {msg}", spec.name()))
            }
            other => other,
        };
        let lattice = match spec.lattice() {
            Some(Some(r)) => Some((r.id(), r.resolve(base).map_err(ctx)?)),
            Some(None) => Some(default_lattice.clone().ok_or_else(|| {
                ctx(Error::Parse("no lattice given and no lattice_file in the manifest".into()))
            })?),
            None => None,
        };
        let dim = match (spec, &lattice) {
            (CheckSpec::Hypotheses { dim, .. }, _) => *dim,
            (_, Some((_, l))) => l.dim(),
            _ => 0,
        };
        let function = match spec.function() {
            Some(f) => {
                let mut s = match f.family {
                    Family::Supergaussian => {
                        let p = f.p.ok_or_else(|| ctx(Error::Parse("supergaussian needs p".into())))?;
                        TestFunctionSpec::supergaussian(p, dim).map_err(ctx)?
                    }
                    fam => {
                        if f.p.is_some() {
                            return Err(ctx(Error::Parse(format!("{} takes no p", fam.name()))));
                        }
                        TestFunctionSpec::new(fam, dim).map_err(ctx)?
                    }
                };
                if let Some(p) = f.p {
                    let table = match tables.get(&p.to_bits()) {
                        Some(t) => t.clone(),
                        None => {
                            let t = Arc::new(Transform1DTable::build(
                                p,
                                testfn::DEFAULT_R_MAX,
                                testfn::DEFAULT_TOL,
                            )?);
                            tables.insert(p.to_bits(), t.clone());
                            t
                        }
                    };
                    s = s.with_table(table)?;
                }
                Some(s)
            }
            None => None,
        };
        let seed = check_seed(m.seed, index);
        let v = match spec {
            CheckSpec::Theta { v, .. }
            | CheckSpec::Psf { v, .. }
            | CheckSpec::Part1 { v, .. }
            | CheckSpec::Tail { v, .. }
            | CheckSpec::Part3 { v, .. } => Some(resolve_vector(v, dim, seed).map_err(ctx)?),
            _ => None,
        };
        validate_params(spec).map_err(ctx)?;
        out.push(Prepared { index, spec: spec.clone(), lattice, function, v });
    }
    Ok(out)
}

fn validate_params(spec: &CheckSpec) -> Result<()> {
    let positive = |name: &str, x: f64| {
        if x > 0.0 && x.is_finite() {
            Ok(())
        } else {
            Err(Error::Precondition(format!("{name} > 0 required (got {name} = {x})")))
        }
    };
    match spec {
        CheckSpec::Theta { t, tol, .. } | CheckSpec::Psf { t, tol, .. } => {
            positive("t", *t)?;
            positive("tol", *tol)
        }
        CheckSpec::Part1 { t, tol, .. } => {
            if !(*t >= 1.0) {
                return Err(Error::Precondition(format!("t >= 1 required (got t = {t})")));
            }
            positive("tol", *tol)
        }
        CheckSpec::Tail { body, .. } | CheckSpec::Part3 { body, .. } => positive("body p", body.p),
        CheckSpec::Transference { p, resolution, .. } => {
            if *p != 1.0 && *p != 2.0 {
                return Err(Error::Precondition(format!("transference needs p in {{1, 2}} (got {p})")));
            }
            if *resolution < 2 {
                return Err(Error::Precondition("resolution >= 2 required".into()));
            }
            Ok(())
        }
        CheckSpec::Handshake { p, u, .. } => {
            if !(*p > 0.0 && *p <= 2.0) {
                return Err(Error::Precondition(format!("p in (0, 2] required (got {p})")));
            }
            if !(*u >= 1.0) {
                return Err(Error::Precondition(format!("u >= 1 required (got {u})")));
            }
            Ok(())
        }
        CheckSpec::Hypotheses { samples, dim, .. } => {
            if *samples == 0 || *dim == 0 {
                return Err(Error::Precondition("samples and dim must be positive".into()));
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Outcome label of one record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
    Error,
}

impl From<Verdict> for Outcome {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Pass => Outcome::Pass,
            Verdict::Fail => Outcome::Fail,
            Verdict::Inconclusive => Outcome::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRecord {
    pub index: usize,
    pub check: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice_id: Option<String>,
    pub params: serde_json::Value,
    pub lhs_interval: Option<[f64; 2]>,
    pub rhs_interval: Option<[f64; 2]>,
    pub margin: Option<f64>,
    pub verdict: Outcome,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub details: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Set for errors: `"budget"`, `"tolerance"` or `"input"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_kind: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    pub error: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchReport {
    pub seed: u64,
    pub budgets: Budgets,
    pub summary: Summary,
    pub records: Vec<ReportRecord>,
}

/// Exit status: 0 all PASS, 1 any FAIL, 2 inconclusive, 3 bad input, 4 budget.
pub fn exit_code_for(records: &[ReportRecord]) -> i32 {
    let has = |f: &dyn Fn(&ReportRecord) -> bool| records.iter().any(f);
    if has(&|r| r.verdict == Outcome::Fail) {
        1
    } else if has(&|r| r.error_kind.as_deref() == Some("input")) {
        3
    } else if has(&|r| r.error_kind.as_deref() == Some("budget")) {
        4
    } else if has(&|r| r.verdict != Outcome::Pass) {
        2
    } else {
        0
    }
}

/// Exit status for an error outside any check.
pub fn exit_code_for_error(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded { .. } => 4,
        Error::ToleranceUnreached { .. } => 2,
        _ => 3,
    }
}

impl BatchReport {
    pub fn exit_code(&self) -> i32 {
        exit_code_for(&self.records)
    }

    /// Pretty JSON with every number at 12 significant digits.
    pub fn to_json(&self) -> String {
        let v = round_json(serde_json::to_value(self).expect("report serializes"));
        serde_json::to_string_pretty(&v).expect("report serializes") + "\n"
    }
}

/// Rounds every float in a JSON tree to 12 significant digits.
pub fn round_json(v: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = sig12(n.as_f64().unwrap_or(f64::NAN));
            serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// Runs all checks (in parallel) and returns records in manifest order.
///
/// `base` resolves relative lattice paths. Validation failures abort
/// before any check runs.
pub fn run_manifest(m: &Manifest, base: &Path) -> Result<BatchReport> {
    let prepared = prepare(m, base)?;
    let budgets = m.budgets;
    let records: Vec<ReportRecord> =
        prepared.par_iter().map(|p| run_one(p, &budgets)).collect();
    let mut summary = Summary { total: records.len(), ..Summary::default() };
    for r in &records {
        match r.verdict {
            Outcome::Pass => summary.pass += 1,
            Outcome::Fail => summary.fail += 1,
            Outcome::Inconclusive => summary.inconclusive += 1,
            Outcome::Error => summary.error += 1,
        }
    }
    Ok(BatchReport { seed: m.seed, budgets, summary, records })
}

fn run_one(p: &Prepared, budgets: &Budgets) -> ReportRecord {
    let params = serde_json::to_value(&p.spec).unwrap_or(serde_json::Value::Null);
    let mut rec = ReportRecord {
        index: p.index,
        check: p.spec.name().to_string(),
        group: p.spec.group().map(str::to_string),
        lattice_id: p.lattice.as_ref().map(|(id, _)| id.clone()),
        params,
        lhs_interval: None,
        rhs_interval: None,
        margin: None,
        verdict: Outcome::Error,
        notes: vec![],
        details: serde_json::Value::Null,
        error: None,
        error_kind: None,
    };
    match evaluate(p, budgets) {
        Ok(r) => {
            rec.lhs_interval = r.lhs_interval;
            rec.rhs_interval = r.rhs_interval;
            rec.margin = Some(r.margin);
            rec.verdict = r.verdict.into();
            rec.notes = r.notes;
            rec.details = r.details;
        }
        Err(e) => {
            rec.error_kind = Some(
                match e {
                    Error::BudgetExceeded { .. } => "budget",
                    Error::ToleranceUnreached { .. } => "tolerance",
                    _ => "input",
                }
                .to_string(),
            );
            if let Error::ToleranceUnreached { .. } = e {
                rec.verdict = Outcome::Inconclusive;
            }
            rec.error = Some(e.to_string());
        }
    }
    rec
}

fn simple(margin: f64, verdict: Verdict, details: serde_json::Value) -> Record {
    Record { lhs_interval: None, rhs_interval: None, margin, verdict, notes: vec![], details }
}

fn evaluate(p: &Prepared, budgets: &Budgets) -> Result<Record> {
    let lat = || &p.lattice.as_ref().expect("resolved lattice").1;
    let fun = || p.function.as_ref().expect("resolved function");
    let v = || p.v.as_deref().expect("resolved vector");
    match &p.spec {
        CheckSpec::Theta { t, tol, .. } => {
            let s = verify::certified_sum(lat(), fun(), v(), *t, *tol, budgets)?;
            Ok(Record {
                lhs_interval: Some([s.lower(), s.upper()]),
                rhs_interval: None,
                margin: 0.0,
                verdict: Verdict::Pass,
                notes: vec![],
                details: serde_json::json!({
                    "partial": s.partial,
                    "remainder_bound": s.remainder_bound,
                    "truncation_radius": s.truncation_radius,
                    "norm_p": s.norm_p,
                    "terms": s.terms,
                }),
            })
        }
        CheckSpec::Psf { t, tol, max_residual, .. } => {
            Ok(verify::psf_residual(lat(), fun(), v(), *t, *tol, budgets)?.record(*max_residual))
        }
        CheckSpec::Part1 { t, tol, .. } => {
            Ok(verify::check_part1(lat(), fun(), v(), *t, *tol, budgets)?.record())
        }
        CheckSpec::Tail { body, .. } => {
            let l = lat();
            let k = body.resolve(l, budgets)?;
            let nu = bounds::nu_bound(fun(), k.p, k.radius, l.dim())?;
            let mut r = verify::check_tail_inequality(l, fun(), &k, v(), nu, budgets)?.record();
            r.notes.push(format!("K = {} * B_{}", k.radius, k.p));
            Ok(r)
        }
        CheckSpec::Part3 { body, .. } => {
            let l = lat();
            let k = body.resolve(l, budgets)?;
            let nu = bounds::nu_bound(fun(), k.p, k.radius, l.dim())?;
            let mut r = verify::check_part3(l, fun(), &k, v(), nu, budgets)?.record();
            r.notes.push(format!("K = {} * B_{}, nu = {}", k.radius, k.p, nu.value));
            Ok(r)
        }
        CheckSpec::Transference { p, resolution, .. } => {
            Ok(verify::transference_check(lat(), *p, *resolution, budgets)?.record())
        }
        CheckSpec::Handshake { p, u, expect_count, .. } => {
            let h = verify::handshake_census(lat(), *p, *u, budgets)?;
            let reduced = lat().lll_reduce(crate::lattice::DEFAULT_DELTA)?;
            let again = verify::handshake_census(&reduced, *p, *u, budgets)?;
            let mut r = h.record();
            let mut verdict = h.verdict;
            if again.count != h.count || !h.even {
                r.notes.push(format!("count {} after reduction (before {})", again.count, h.count));
                verdict = Verdict::Fail;
            }
            if let Some(c) = expect_count {
                if *c != h.count {
                    r.notes.push(format!("expected count {c}"));
                    verdict = Verdict::Fail;
                }
            }
            r.verdict = verdict;
            Ok(r)
        }
        CheckSpec::Hypotheses { samples, .. } => {
            let seed = check_seed(0, p.index);
            let rep = testfn::check_hypotheses(fun(), *samples, seed)?;
            let worst = rep
                .fhat_nonnegative
                .worst_margin
                .min(rep.ray_monotone.worst_margin)
                .min(rep.ratio_concave.worst_margin);
            let verdict = if rep.total_violations() == 0 { Verdict::Pass } else { Verdict::Fail };
            Ok(simple(worst, verdict, serde_json::to_value(&rep).unwrap_or_default()))
        }
        CheckSpec::Cstar { .. } => {
            let (z, c) = bounds::cstar_argmax::<f64>();
            let (lo, hi) = (0.424785, 0.424795);
            let verdict = if (lo..=hi).contains(&c) { Verdict::Pass } else { Verdict::Fail };
            let mut r = simple(
                (c - lo).min(hi - c),
                verdict,
                serde_json::json!({ "cstar": c, "argmax": z }),
            );
            r.lhs_interval = Some([c, c]);
            r.rhs_interval = Some([lo, hi]);
            Ok(r)
        }
        CheckSpec::L1Constant { .. } => {
            let c = bounds::l1_leading_constant::<f64>();
            let gap = bounds::L1_CONSTANT - c;
            let verdict = if gap > 0.0 { Verdict::Pass } else { Verdict::Fail };
            let mut r = simple(gap, verdict, serde_json::json!({ "exact": c, "ceiling": bounds::L1_CONSTANT, "gap": gap }));
            r.lhs_interval = Some([c, c]);
            r.rhs_interval = Some([bounds::L1_CONSTANT; 2]);
            Ok(r)
        }
        CheckSpec::ClosedForms { .. } => {
            let (worst, points) = closed_form_grid()?;
            let verdict = if worst <= 1e-9 { Verdict::Pass } else { Verdict::Fail };
            Ok(simple(1e-9 - worst, verdict, serde_json::json!({ "points": points, "max_relative_error": worst })))
        }
    }
}

/// Largest relative gap between closed forms and the optimizer over
/// `n in {1,2,4,8}`, `tau in {0.5,1,2}`, and `p in {0.5,1,1.5,2}` x
/// `t in {1,1.5,2}`. Returns `(max error, number of points)`.
pub fn closed_form_grid() -> Result<(f64, usize)> {
    let mut worst = 0.0f64;
    let mut points = 0;
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    for n in [1usize, 2, 4, 8] {
        let g = TestFunctionSpec::<f64>::new(Family::Gaussian, n)?;
        for tau in [0.5, 1.0, 2.0] {
            let a = bounds::mu_norm(&g, bounds::gaussian_radius(tau, n), n)?.value;
            worst = worst.max(rel(a, bounds::gaussian_nu_closed_form(tau, n)?));
            points += 1;
        }
        for p in [0.5, 1.0, 1.5, 2.0] {
            let s = TestFunctionSpec::<f64>::supergaussian(p, n)?;
            for t in [1.0, 1.5, 2.0] {
                let r = t * (n as f64 / p).powf(1.0 / p);
                let a = bounds::mu_norm(&s, r, n)?.value;
                worst = worst.max(rel(a, bounds::supergaussian_mu_closed_form(p, r, n)?));
                points += 1;
            }
        }
    }
    Ok((worst, points))
}

/// CSV rows `index,lattice,radius,tail_upper,bound` for each tail check,
/// at radii `{0.5, 0.75, 1, 1.25, 1.5, 2}` times the check's body radius.
pub fn plot_data(m: &Manifest, base: &Path) -> Result<String> {
    let prepared = prepare(m, base)?;
    let mut out = String::from("index,lattice,radius,tail_upper,bound\n");
    for p in &prepared {
        if let CheckSpec::Tail { body, .. } = &p.spec {
            let (id, l) = p.lattice.as_ref().expect("resolved lattice");
            let k = body.resolve(l, &m.budgets)?;
            let radii: Vec<f64> =
                [0.5, 0.75, 1.0, 1.25, 1.5, 2.0].iter().map(|f| f * k.radius).collect();
            let rows = verify::tail_curve(
                l,
                p.function.as_ref().expect("function"),
                k.p,
                p.v.as_deref().expect("vector"),
                &radii,
                &m.budgets,
            )?;
            for r in rows {
                out.push_str(&format!(
                    "{},\"{}\",{},{},{}\n",
                    p.index,
                    id,
                    sig12(r.radius),
                    sig12(r.tail_upper),
                    sig12(r.bound)
                ));
            }
        }
    }
    Ok(out)
}
