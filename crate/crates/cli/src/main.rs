//! `thetabound` command-line front end.
//!
//! Single-check subcommands build a one-entry manifest and go through the
//! same batch runner as `verify`, so output format and exit codes agree.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thetabound::batch::{
    self, BatchReport, BodyRef, CheckSpec, FunctionRef, LatticeRef, Manifest, VectorRef,
};
use thetabound::bounds;
use thetabound::lattice::{generate, io, Budgets};
use thetabound::testfn::Family;
use thetabound::{Error, Lattice64};

#[derive(Parser)]
#[command(name = "thetabound", version, about = "Certified lattice sums and tail bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certified sum of f((x + v)/t) over the lattice.
    Theta {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[command(flatten)]
        function: FunctionArgs,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Poisson summation residual.
    Psf {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[command(flatten)]
        function: FunctionArgs,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 1e-8)]
        max_residual: f64,
    },
    /// Tail sum outside a scaled l_p ball against the mass bound.
    Tail {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[command(flatten)]
        function: FunctionArgs,
        #[command(flatten)]
        body: BodyArgs,
        /// Shift, comma separated (or "zero" / "random").
        #[arg(long, default_value = "zero")]
        v: String,
    },
    /// sigma_p(L) times the covering radius of the dual against the bound.
    Transference {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 16)]
        resolution: usize,
    },
    /// Count of vectors with norm at most u times the minimum.
    Kissing {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        u: f64,
    },
    /// Table of C*, the l1 constant and bound values.
    Constants {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,8,16")]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1,1.5")]
        u: Vec<f64>,
    },
    /// Run every check of a manifest.
    Verify {
        manifest: PathBuf,
        /// Report path; overrides the manifest's `output`. `-` for stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// CSV plot data path; overrides the manifest's `plot_data`.
        #[arg(long)]
        plot_data: Option<PathBuf>,
        /// Only run checks with this group label.
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Lattice points in a ball.
    Enumerate {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Center, comma separated.
        #[arg(long)]
        center: Option<String>,
    },
    /// Write a generated lattice to a file.
    Lattice {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Integer,
    Checkerboard,
    Unimodular,
    Seeded,
}

#[derive(Args)]
struct LatticeArgs {
    /// Lattice file (JSON with `dim` and `basis`).
    #[arg(long, conflicts_with_all = ["integer", "checkerboard"])]
    lattice: Option<PathBuf>,
    /// Use Z^n.
    #[arg(long, conflicts_with = "checkerboard")]
    integer: Option<usize>,
    /// Use D_n.
    #[arg(long)]
    checkerboard: Option<usize>,
    #[arg(long, default_value_t = 100_000_000)]
    node_budget: u64,
    #[arg(long, default_value_t = 10_000_000)]
    grid_budget: u64,
}

impl LatticeArgs {
    fn reference(&self) -> Result<LatticeRef, Error> {
        match (&self.lattice, self.integer, self.checkerboard) {
            (Some(p), _, _) => Ok(LatticeRef::File(p.clone())),
            (_, Some(n), _) => Ok(LatticeRef::Integer(n)),
            (_, _, Some(n)) => Ok(LatticeRef::Checkerboard(n)),
            _ => Err(Error::Parse("one of --lattice, --integer, --checkerboard is required".into())),
        }
    }

    fn budgets(&self) -> Budgets {
        Budgets { nodes: self.node_budget, grid: self.grid_budget }
    }

    fn resolve(&self) -> Result<Lattice64, Error> {
        self.reference()?.resolve(Path::new("."))
    }
}

#[derive(Args)]
struct FunctionArgs {
    /// gaussian, sech_product, inv_cosh_product, supergaussian, exp_l1
    #[arg(long, default_value = "gaussian")]
    family: String,
    /// Supergaussian exponent.
    #[arg(long = "fp")]
    function_p: Option<f64>,
}

impl FunctionArgs {
    fn reference(&self) -> Result<FunctionRef, Error> {
        Ok(FunctionRef { family: Family::parse(&self.family)?, p: self.function_p })
    }
}

#[derive(Args)]
struct PointArgs {
    /// Shift, comma separated (or "zero" / "random").
    #[arg(long, default_value = "zero")]
    v: String,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
}

#[derive(Args)]
struct BodyArgs {
    /// Exponent of the ball.
    #[arg(long = "body-p", default_value_t = 2.0)]
    body_p: f64,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long = "body-t")]
    body_t: Option<f64>,
    /// 0 picks the default scale for the dimension.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    sigma_fraction: Option<f64>,
}

impl BodyArgs {
    fn reference(&self) -> BodyRef {
        BodyRef {
            p: self.body_p,
            radius: self.radius,
            tau: self.tau,
            t: self.body_t,
            alpha: self.alpha,
            sigma_fraction: self.sigma_fraction,
        }
    }
}

fn parse_vector(s: &str) -> Result<VectorRef, Error> {
    if s == "zero" || s == "random" {
        return Ok(VectorRef::Named(s.to_string()));
    }
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| Error::Parse(format!("vector entry '{x}': {e}"))))
        .collect::<Result<Vec<_>, _>>()
        .map(VectorRef::Explicit)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(3),
            };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(batch::exit_code_for_error(&e) as u8)
        }
    }
}

fn single(check: CheckSpec, budgets: Budgets) -> Result<i32, Error> {
    let m = Manifest {
        lattice_file: None,
        checks: vec![check],
        budgets,
        seed: 0,
        output: None,
        plot_data: None,
    };
    let report = batch::run_manifest(&m, Path::new("."))?;
    emit(&report.to_json());
    if let Some(e) = &report.records[0].error {
        eprintln!("error: {e}");
    }
    Ok(report.exit_code())
}

fn run(cmd: Command) -> Result<i32, Error> {
    match cmd {
        Command::Theta { lattice, function, point, tol } => single(
            CheckSpec::Theta {
                lattice: Some(lattice.reference()?),
                function: function.reference()?,
                v: parse_vector(&point.v)?,
                t: point.t,
                tol,
                group: None,
            },
            lattice.budgets(),
        ),
        Command::Psf { lattice, function, point, tol, max_residual } => single(
            CheckSpec::Psf {
                lattice: Some(lattice.reference()?),
                function: function.reference()?,
                v: parse_vector(&point.v)?,
                t: point.t,
                tol,
                max_residual,
                group: None,
            },
            lattice.budgets(),
        ),
        Command::Tail { lattice, function, body, v } => single(
            CheckSpec::Tail {
                lattice: Some(lattice.reference()?),
                function: function.reference()?,
                body: body.reference(),
                v: parse_vector(&v)?,
                group: None,
            },
            lattice.budgets(),
        ),
        Command::Transference { lattice, p, resolution } => single(
            CheckSpec::Transference { lattice: Some(lattice.reference()?), p, resolution, group: None },
            lattice.budgets(),
        ),
        Command::Kissing { lattice, p, u } => single(
            CheckSpec::Handshake {
                lattice: Some(lattice.reference()?),
                p,
                u,
                expect_count: None,
                group: None,
            },
            lattice.budgets(),
        ),
        Command::Constants { n, p, u } => constants(&n, &p, &u),
        Command::Verify { manifest, output, plot_data, group, seed } => {
            verify(&manifest, output, plot_data, group, seed)
        }
        Command::Enumerate { lattice, radius, p, center } => {
            let l = lattice.resolve()?;
            let c = match center {
                Some(s) => match parse_vector(&s)? {
                    VectorRef::Explicit(x) if x.len() == l.dim() => x,
                    _ => return Err(Error::Parse(format!("center needs {} coordinates", l.dim()))),
                },
                None => vec![0.0; l.dim()],
            };
            let pts = l.enumerate_in_ball_budget(&c, radius, p, lattice.node_budget)?;
            let rows: Vec<_> = pts
                .iter()
                .map(|q| serde_json::json!({ "coords": q.coords, "vector": q.embedding, "norm": q.norm(p) }))
                .collect();
            let out = batch::round_json(serde_json::json!({ "count": rows.len(), "points": rows }));
            emit(&(serde_json::to_string_pretty(&out).expect("json") + "\n"));
            Ok(0)
        }
        Command::Lattice { kind, dim, seed, out } => {
            let l: Lattice64 = match kind {
                Kind::Integer => Lattice64::integer(dim),
                Kind::Checkerboard => generate::checkerboard(dim)?,
                Kind::Unimodular => generate::unimodular(dim, seed)?,
                Kind::Seeded => generate::seeded(dim, seed)?,
            };
            io::write_lattice(&out, &l)?;
            Ok(0)
        }
    }
}

fn constants(ns: &[usize], ps: &[f64], us: &[f64]) -> Result<i32, Error> {
    if ns.is_empty() || ps.is_empty() || us.is_empty() {
        return Err(Error::Parse("n, p and u lists must be nonempty".into()));
    }
    let (argmax, cstar) = bounds::cstar_argmax::<f64>();
    let exact = bounds::l1_leading_constant::<f64>();
    let transference: Vec<_> = ns
        .iter()
        .map(|&n| {
            let l1 = bounds::transference_bound_l1::<f64>(n);
            serde_json::json!({
                "n": n,
                "l2": bounds::transference_bound_l2::<f64>(n),
                "l1": l1.exact,
                "l1_ceiling": l1.ceiling,
            })
        })
        .collect();
    let mut handshake = vec![];
    for &n in ns {
        for &p in ps {
            for &u in us {
                handshake.push(serde_json::json!({
                    "n": n, "p": p, "u": u,
                    "bound": bounds::handshake_bound::<f64>(n, p, u)?,
                }));
            }
        }
    }
    let table = serde_json::json!({
        "cstar": cstar,
        "cstar_argmax": argmax,
        "l1_constant": { "exact": exact, "ceiling": bounds::L1_CONSTANT, "gap": bounds::L1_CONSTANT - exact },
        "transference": transference,
        "handshake": handshake,
    });
    emit(&(serde_json::to_string_pretty(&batch::round_json(table)).expect("json") + "\n"));
    Ok(0)
}

fn verify(
    path: &Path,
    output: Option<PathBuf>,
    plot_data: Option<PathBuf>,
    group: Option<String>,
    seed: Option<u64>,
) -> Result<i32, Error> {
    let mut m = Manifest::read(path)?;
    if let Some(g) = group {
        m = m.only_group(&g);
    }
    if let Some(s) = seed {
        m.seed = s;
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let report: BatchReport = batch::run_manifest(&m, base)?;
    let text = report.to_json();
    match output.or_else(|| m.output.as_ref().map(|p| base.join(p))) {
        Some(p) if p.as_os_str() != "-" => write(&p, &text)?,
        _ => emit(&text),
    }
    if let Some(p) = plot_data.or_else(|| m.plot_data.as_ref().map(|p| base.join(p))) {
        write(&p, &batch::plot_data(&m, base)?)?;
    }
    let s = &report.summary;
    eprintln!(
        "{} checks: {} pass, {} fail, {} inconclusive, {} error",
        s.total, s.pass, s.fail, s.inconclusive, s.error
    );
    for r in report.records.iter().filter(|r| r.verdict != batch::Outcome::Pass) {
        eprintln!(
            "  #{} {} {}: {:?}{}",
            r.index,
            r.check,
            r.lattice_id.as_deref().unwrap_or("-"),
            r.verdict,
            r.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default()
        );
    }
    Ok(report.exit_code())
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}
