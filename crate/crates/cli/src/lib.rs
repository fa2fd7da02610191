//! Command-line driver: loads a surface file, runs one computation, and
//! renders the result as text or as a JSON document.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};

use segrejet_core::document::SeriesDocument;
use segrejet_core::expr::{parse_point, parse_surface_file, ParseError};
use segrejet_core::hypersurface::{Hypersurface, Point};
use segrejet_core::pde::{associated_pde, contact_residual, integrability_residual, JetPoint};
use segrejet_core::reflection::{involution_check, ReflectionConfig};
use segrejet_core::scalar::fraction_string;
use segrejet_core::segre::{phi_determinant_at, phi_determinant_on_surface, phi_oracle, phi_oracle_series, segre_graph};
use segrejet_core::series::linalg::{self, Matrix};
use segrejet_core::{Error, GaussianRational, TruncatedSeries};

pub const DEFAULT_ORDER: u32 = 8;

/// Exit statuses. Success is 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Validation,
    Convergence,
    Internal,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Parse => 2,
            ErrorKind::Validation => 3,
            ErrorKind::Convergence => 4,
            ErrorKind::Internal => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::Parse => "parse",
            ErrorKind::Validation => "validation",
            ErrorKind::Convergence => "convergence",
            ErrorKind::Internal => "internal",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    /// The machine-readable record written to stderr.
    pub fn record(&self) -> Value {
        json!({
            "error": {
                "kind": self.kind.name(),
                "exit_code": self.kind.exit_code(),
                "message": self.message,
            }
        })
    }
}

/// Where an engine error lands among the exit statuses.
pub fn classify(e: &Error) -> ErrorKind {
    match e {
        Error::Reality { .. }
        | Error::LeviDegenerate { .. }
        | Error::NotOnSurface { .. }
        | Error::BadCoordinates(_)
        | Error::NotStrictlyPseudoconvex(_)
        | Error::Contract(_)
        | Error::IndexOutOfRange { .. }
        | Error::Truncation(_) => ErrorKind::Validation,
        Error::Convergence { .. } | Error::DegenerateConfiguration(_) => ErrorKind::Convergence,
        Error::RingMismatch | Error::UnknownVariable(_) | Error::InvalidRing(_) | Error::NotExactlySolvable(_) => {
            ErrorKind::Internal
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::new(classify(&e), e.to_string())
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        Self::new(ErrorKind::Parse, e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Parser, Debug)]
#[command(name = "segrejet", version, about = "Exact jet-level CR invariants of real hypersurfaces")]
pub struct Cli {
    /// Surface file: a header line `n = <k>` and one real defining expression.
    #[arg(long, global = true)]
    pub surface: Option<PathBuf>,
    /// Truncation order N (at least 2).
    #[arg(long, global = true, default_value_t = DEFAULT_ORDER, value_parser = clap::value_parser!(u32).range(2..))]
    pub order: u32,
    /// Tolerance for the reflection checks.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Clone, Debug, PartialEq)]
pub enum Command {
    /// Levi form at the base point.
    Levi,
    /// Polynomial coordinate change to a quadric model.
    Normalize,
    /// Segre graph of a point.
    Segre {
        #[arg(long)]
        point: String,
    },
    /// Φ by the bordered determinant and by the Segre oracle.
    Phi {
        #[arg(long)]
        point: Option<String>,
    },
    /// The associated second-order system on the 1-jet chart.
    Pde,
    /// Frobenius integrability residual of that system.
    Integrability,
    /// Contact-form pullbacks along the Segre graph of a point.
    Contact {
        #[arg(long)]
        point: String,
    },
    /// Numeric checks of the reflection involution.
    Reflect {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub surface: PathBuf,
    pub order: u32,
    pub command: Command,
    pub format: Format,
    pub reflection: ReflectionConfig,
}

impl TryFrom<Cli> for RunConfig {
    type Error = CliError;

    fn try_from(cli: Cli) -> Result<Self, CliError> {
        let surface = cli
            .surface
            .ok_or_else(|| CliError::new(ErrorKind::Parse, "missing required flag --surface <path>"))?;
        let mut reflection = ReflectionConfig::default();
        if let Some(tol) = cli.tol {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(CliError::new(ErrorKind::Parse, format!("--tol must be a positive number, got {tol}")));
            }
            reflection.tol = tol;
        }
        Ok(Self {
            surface,
            order: cli.order,
            command: cli.command,
            format: cli.format,
            reflection,
        })
    }
}

/// A finished run: the two renderings of one result.
#[derive(Clone, Debug)]
pub struct Report {
    pub text: String,
    pub structured: Value,
    /// Set when the result itself is a failed check.
    pub failure: Option<CliError>,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.clone(),
            Format::Structured => serde_json::to_string_pretty(&self.structured).expect("json values serialize") + "\n",
        }
    }
}

/// Reads and validates the surface: it must parse, be real, and be
/// Levi-nondegenerate at the origin.
pub fn load_surface(text: &str, order: u32) -> Result<Hypersurface, CliError> {
    let file = parse_surface_file(text)?;
    let lowered = file.expr.lower(file.n, order)?;
    let m = Hypersurface::new(file.n, -&lowered)?;
    let det = linalg::determinant(&m.levi_form());
    if det.is_zero() {
        return Err(Error::LeviDegenerate { determinant: det }.into());
    }
    Ok(m)
}

/// `z1, .., zn, w` (checked to lie on `M`) or `z1, .., zn` (then `Re w = 0`).
pub fn point_arg(m: &Hypersurface, text: &str) -> Result<Point, CliError> {
    let v = parse_point(text)?;
    let n = m.n();
    if v.len() == n + 1 {
        let q = Point {
            z: v[..n].to_vec(),
            w: v[n].clone(),
        };
        let r = m.residual_at(&q)?;
        if !r.is_zero() {
            return Err(Error::NotOnSurface { residual: r }.into());
        }
        Ok(q)
    } else if v.len() == n {
        Ok(m.point_on(v, BigRational::zero())?)
    } else {
        Err(CliError::new(
            ErrorKind::Validation,
            format!("--point needs {n} or {} coordinates, got {}", n + 1, v.len()),
        ))
    }
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let text = std::fs::read_to_string(&cfg.surface)
        .map_err(|e| CliError::new(ErrorKind::Parse, format!("cannot read {}: {e}", cfg.surface.display())))?;
    let m = load_surface(&text, cfg.order)?;
    let mut report = run_on(&m, cfg)?;
    // echo the input in canonical form; it re-parses to itself
    let canonical = canonical_surface(&text)?;
    report.text = format!("surface: {}\n{}", canonical.replace('\n', "; "), report.text);
    report.structured["surface"] = Value::String(canonical);
    Ok(report)
}

/// The surface file pretty-printed: header line, then the expression.
pub fn canonical_surface(text: &str) -> Result<String, CliError> {
    let file = parse_surface_file(text)?;
    Ok(format!("n = {}\n{}", file.n, file.expr))
}

pub fn run_on(m: &Hypersurface, cfg: &RunConfig) -> Result<Report, CliError> {
    match &cfg.command {
        Command::Levi => levi(m),
        Command::Normalize => normalize(m),
        Command::Segre { point } => segre(m, &point_arg(m, point)?),
        Command::Phi { point } => {
            let q = point.as_deref().map(|p| point_arg(m, p)).transpose()?;
            phi(m, q.as_ref())
        }
        Command::Pde => pde(m),
        Command::Integrability => integrability(m),
        Command::Contact { point } => contact(m, &point_arg(m, point)?),
        Command::Reflect { samples, seed } => reflect(m, *samples, *seed, &cfg.reflection),
    }
}

pub fn series_value(s: &TruncatedSeries) -> Value {
    serde_json::to_value(SeriesDocument::from_series(s)).expect("documents serialize")
}

fn scalar_value(c: &GaussianRational) -> Value {
    json!({ "re": fraction_string(&c.re), "im": fraction_string(&c.im) })
}

fn matrix_value(a: &Matrix) -> Value {
    Value::Array(a.iter().map(|row| Value::Array(row.iter().map(scalar_value).collect())).collect())
}

fn matrix_text(a: &Matrix) -> String {
    let mut out = String::new();
    for row in a {
        let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "  [{}]", cells.join(", "));
    }
    out
}

fn point_value(q: &Point) -> Value {
    json!({ "z": q.z.iter().map(scalar_value).collect::<Vec<_>>(), "w": scalar_value(&q.w) })
}

fn jet_point_value(p: &JetPoint) -> Value {
    json!({
        "z": p.z.iter().map(scalar_value).collect::<Vec<_>>(),
        "w": scalar_value(&p.w),
        "xi": p.xi.iter().map(scalar_value).collect::<Vec<_>>(),
    })
}

fn grid_value(g: &[Vec<TruncatedSeries>]) -> Value {
    Value::Array(g.iter().map(|row| Value::Array(row.iter().map(series_value).collect())).collect())
}

fn ok(text: String, structured: Value) -> Result<Report, CliError> {
    Ok(Report {
        text,
        structured,
        failure: None,
    })
}

fn levi(m: &Hypersurface) -> Result<Report, CliError> {
    let l = m.levi_form();
    let det = linalg::determinant(&l);
    let text = format!("Levi form at the base point:\n{}determinant: {det}\nnondegenerate\n", matrix_text(&l));
    ok(
        text,
        json!({ "command": "levi", "levi_form": matrix_value(&l), "determinant": scalar_value(&det), "nondegenerate": true }),
    )
}

fn normalize(m: &Hypersurface) -> Result<Report, CliError> {
    let nz = m.normalize_to_quadric()?;
    let ev: Vec<String> = nz.levi_eigenvalues().iter().map(|e| format!("{e:.6}")).collect();
    let text = format!(
        "normalized rho = {}\nnew w = {}\nsign = {}\nLevi form:\n{}eigenvalues: {}\n",
        nz.surface.rho(),
        nz.map.w_image,
        nz.sign,
        matrix_text(&nz.levi_form),
        ev.join(", ")
    );
    ok(
        text,
        json!({
            "command": "normalize",
            "rho": series_value(nz.surface.rho()),
            "w_image": series_value(&nz.map.w_image),
            "sign": nz.sign,
            "levi_form": matrix_value(&nz.levi_form),
        }),
    )
}

fn segre(m: &Hypersurface, q: &Point) -> Result<Report, CliError> {
    let g = segre_graph(m, q)?;
    ok(
        format!("Segre graph w(z), z centered at the point:\n{}\n", g.graph),
        json!({ "command": "segre", "point": point_value(q), "graph": series_value(&g.graph) }),
    )
}

fn phi(m: &Hypersurface, q: Option<&Point>) -> Result<Report, CliError> {
    let det = phi_determinant_on_surface(m)?;
    let oracle = phi_oracle_series(m)?;
    let agree = det == oracle;
    let verdict = if agree { "exact" } else { "disagree" };
    let mut text = format!("verdict: {verdict}\n");
    for i in 0..m.n() {
        for j in 0..m.n() {
            let _ = writeln!(text, "Phi[{}][{}] = {}", i + 1, j + 1, det.entries[i][j]);
        }
    }
    let mut structured = json!({
        "command": "phi",
        "verdict": verdict,
        "determinant": grid_value(&det.entries),
        "oracle": grid_value(&oracle.entries),
    });
    let mut failure = None;
    if let Some(q) = q {
        let a = phi_determinant_at(m, q)?;
        let b = phi_oracle(m, q)?;
        let pv = if a == b { "exact" } else { "disagree" };
        let _ = write!(text, "at the point ({pv}):\n{}", matrix_text(&a));
        structured["point"] = json!({ "point": point_value(q), "determinant": matrix_value(&a), "oracle": matrix_value(&b), "verdict": pv });
        if a != b {
            failure = Some(CliError::new(ErrorKind::Internal, "determinant and oracle disagree at the point"));
        }
    }
    if !agree {
        failure = Some(CliError::new(ErrorKind::Internal, "determinant and oracle series disagree"));
    }
    Ok(Report {
        text,
        structured,
        failure,
    })
}

fn pde(m: &Hypersurface) -> Result<Report, CliError> {
    let s = associated_pde(m)?;
    let mut text = format!("w_(z_k z_l) = Phi_kl(z, w, xi), trusted through degree {}\n", s.order());
    for k in 0..s.n {
        for l in 0..s.n {
            let _ = writeln!(text, "Phi[{}][{}] = {}", k + 1, l + 1, s.phi[k][l]);
        }
    }
    ok(
        text,
        json!({ "command": "pde", "center": jet_point_value(&s.center), "order": s.order(), "phi": grid_value(&s.phi) }),
    )
}

fn integrability(m: &Hypersurface) -> Result<Report, CliError> {
    let r = integrability_residual(&associated_pde(m)?)?;
    let zero = r.is_zero();
    let text = match r.first_nonzero() {
        None => format!("integrability residual vanishes through degree {}\n", r.order),
        Some(((j, k, l), c)) => format!(
            "integrability residual is nonzero: (j, k, l) = ({}, {}, {}), {c}\n",
            j + 1,
            k + 1,
            l + 1
        ),
    };
    let residuals: Vec<Value> = r.residuals.iter().map(|a| grid_value(a)).collect();
    ok(
        text,
        json!({ "command": "integrability", "order": r.order, "zero": zero, "residuals": residuals }),
    )
}

fn contact(m: &Hypersurface, q: &Point) -> Result<Report, CliError> {
    let c = contact_residual(m, q)?;
    let zero = c.is_zero();
    let text = if zero {
        "contact residuals vanish: the Segre graph solves the system\n".to_string()
    } else {
        let mut t = String::from("contact residuals are nonzero:\n");
        for (k, row) in c.omega.iter().enumerate() {
            for (l, s) in row.iter().enumerate() {
                if !s.is_zero() {
                    let _ = writeln!(t, "omega[{}][{}] = {s}", k + 1, l + 1);
                }
            }
        }
        t
    };
    let omega0: Vec<Value> = c.omega0.iter().map(series_value).collect();
    let structured = json!({
        "command": "contact",
        "point": point_value(q),
        "zero": zero,
        "omega0": omega0,
        "omega": grid_value(&c.omega),
    });
    Ok(Report {
        text,
        structured,
        failure: (!zero).then(|| CliError::new(ErrorKind::Internal, "the Segre graph does not solve the system")),
    })
}

fn reflect(m: &Hypersurface, samples: usize, seed: u64, cfg: &ReflectionConfig) -> Result<Report, CliError> {
    let r = involution_check(m, samples, seed, cfg)?;
    let passed = r.passed();
    let text = format!(
        "samples: {}\nroot failures: {}\nmax |tau(tau(p)) - p|: {:e}\nmax |tau(p) - p| on M_J: {:e}\nmax holomorphic part: {:e}\n{}\n",
        r.samples,
        r.failures.len(),
        r.max_involution,
        r.max_fixed,
        r.max_holomorphic_part,
        if passed { "pass" } else { "fail" }
    );
    let structured = json!({
        "command": "reflect",
        "samples": r.samples,
        "tol": r.tol,
        "failures": r.failures.iter().map(|(_, e)| e.clone()).collect::<Vec<_>>(),
        "max_involution": r.max_involution,
        "max_fixed": r.max_fixed,
        "max_holomorphic_part": r.max_holomorphic_part,
        "passed": passed,
    });
    Ok(Report {
        text,
        structured,
        failure: (!passed).then(|| {
            CliError::new(
                ErrorKind::Convergence,
                format!("reflection checks did not reach tolerance {:e}", r.tol),
            )
        }),
    })
}
