//! Command-line front end. JSON reports go to `out`, human-readable tables and
//! diagnostics to `err`.
//!
//! Exit codes: `0` success, `1` a verification assertion failed, `2` the input
//! could not be parsed or has invalid parameters.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{logcone_graph_residual, logcone_pullback_metric, CatalogSurface};
use crate::commute::{simultaneous_diagonalize_seeded, SymFamily};
use crate::error::{Error, Result};
use crate::function::{self, eval_jet, FunctionSpec};
use crate::geometry::{extremal_residual, parallel_rhs_checks, TensorBundle};
use crate::normal_form::normal_form;
use crate::reconstruct::{
    closed_form, integrate_frames, normalizing_map, ray_from_base_point, recovered_surface, traced_function,
    FlatParallelData,
};
use crate::VERSION;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const DEFAULT_TOL: f64 = 1e-8;

/// Box used to sample points for functions given as expressions.
const EXPR_SAMPLE_RANGE: (f64, f64) = (0.5, 2.5);

#[derive(Debug, Parser)]
#[command(
    name = "calabi",
    version,
    about = "Invariants and classification checks for Calabi graph hypersurfaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Tolerance for verdict flags and assertions.
    #[arg(long, global = true, env = "CALABI_TOL", default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Seed of every random choice.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args, Clone)]
pub struct PointSource {
    /// Number of seeded random sample points.
    #[arg(long, conflicts_with = "points")]
    pub random: Option<usize>,
    /// JSON file holding an array of points.
    #[arg(long)]
    pub points: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Invariants at sample points of a catalog id or expression.
    Invariants {
        spec: String,
        #[command(flatten)]
        source: PointSource,
        #[command(flatten)]
        common: Common,
    },
    /// Normal form and case label at sample points.
    Classify {
        spec: String,
        #[command(flatten)]
        source: PointSource,
        #[command(flatten)]
        common: Common,
    },
    /// Runs the property suite on catalog surfaces.
    VerifyCatalog {
        /// Catalog id; omit together with `--all`.
        id: Option<String>,
        #[arg(long, conflicts_with = "id")]
        all: bool,
        /// Sample points per surface.
        #[arg(long, default_value_t = 20)]
        random: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Rebuilds the hypersurface of constant diagonal cubic data.
    Reconstruct {
        /// Positive diagonal values, comma separated; empty for the zero form.
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long)]
        n: usize,
        /// Ray endpoints, each comma separated; defaults to the unit ray.
        #[arg(long)]
        v: Vec<String>,
        /// Runge-Kutta steps.
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Simultaneously diagonalizes commuting symmetric matrices from a JSON file.
    Diag {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `args` (program name first) and runs the selected command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli.command, err) {
        Ok((report, code)) => {
            let _ = writeln!(out, "{report}");
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cmd: Command, err: &mut dyn Write) -> Result<(String, i32)> {
    match cmd {
        Command::Invariants { spec, source, common } => {
            let f = function::parse(&spec)?;
            let points = resolve_points(&f, &source, common.seed)?;
            let report = invariants_report(&f, &points, &common);
            print_invariants_table(err, &report);
            Ok((to_json(&report)?, EXIT_OK))
        }
        Command::Classify { spec, source, common } => {
            let f = function::parse(&spec)?;
            let points = resolve_points(&f, &source, common.seed)?;
            let report = classify_report(&f, &points, &common);
            for r in &report.records {
                let _ = writeln!(
                    err,
                    "{:>4} {:>4} {}",
                    r.index,
                    r.case.as_deref().unwrap_or("-"),
                    fmt_vec(&r.spectrum)
                );
            }
            Ok((to_json(&report)?, EXIT_OK))
        }
        Command::VerifyCatalog {
            id,
            all,
            random,
            common,
        } => {
            let surfaces = match (id, all) {
                (Some(id), _) => vec![parse_catalog(&id)?],
                (None, true) => standard_catalog(),
                (None, false) => {
                    return Err(Error::InvalidParameter("give a catalog id or --all".into()));
                }
            };
            let report = verify_catalog(&surfaces, random, &common)?;
            print_verify_table(err, &report);
            let code = if report.passed { EXIT_OK } else { EXIT_FAILED };
            if let Some(w) = &report.worst_failure {
                let _ = writeln!(
                    err,
                    "worst offender: {} {} = {:e} (limit {:e})",
                    w.surface, w.check, w.value, w.limit
                );
            }
            Ok((to_json(&report)?, code))
        }
        Command::Reconstruct { a, n, v, steps, common } => {
            let diag = parse_list(&a)?;
            let rays = if v.is_empty() {
                vec![vec![1.0; n]]
            } else {
                v.iter().map(|s| parse_list(s)).collect::<Result<_>>()?
            };
            let report = reconstruct_report(diag, n, &rays, steps, &common)?;
            let _ = writeln!(err, "recovered {} (c = {})", report.recovered, fmt_vec(&report.c));
            for r in &report.rays {
                let _ = writeln!(
                    err,
                    "  v = {}  |rk4 - exact| = {:.3e}",
                    fmt_vec(&r.v),
                    r.integration_residual
                );
            }
            let code = if report.passed { EXIT_OK } else { EXIT_FAILED };
            Ok((to_json(&report)?, code))
        }
        Command::Diag { file, common } => {
            let matrices = read_matrices(&file)?;
            let report = diag_report(matrices, &common)?;
            let _ = writeln!(
                err,
                "orthogonality {:.3e}  off-diagonal {:.3e}",
                report.orthogonality, report.off_diagonal
            );
            Ok((to_json(&report)?, EXIT_OK))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    if has_null_number(&v) {
        // serde_json writes non-finite floats as null
        return Err(Error::InvalidParameter("report contains a non-finite number".into()));
    }
    serde_json::to_string_pretty(&v).map_err(|e| Error::InvalidParameter(e.to_string()))
}

fn has_null_number(v: &serde_json::Value) -> bool {
    match v {
        serde_json::Value::Array(a) => a.iter().any(has_null_number),
        serde_json::Value::Object(o) => o
            .iter()
            .any(|(k, v)| !is_optional_field(k) && v.is_null() || has_null_number(v)),
        _ => false,
    }
}

/// Fields that are legitimately absent.
fn is_optional_field(key: &str) -> bool {
    matches!(key, "case" | "error" | "worst_failure")
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("not a number: {s:?}")))
        })
        .collect()
}

fn parse_catalog(id: &str) -> Result<CatalogSurface> {
    CatalogSurface::parse_id(id)?.ok_or_else(|| Error::InvalidParameter(format!("unknown catalog id {id:?}")))
}

/// Surfaces covered by `verify-catalog --all`.
pub fn standard_catalog() -> Vec<CatalogSurface> {
    CatalogSurface::standard()
}

fn resolve_points(f: &FunctionSpec, source: &PointSource, seed: u64) -> Result<Vec<Vec<f64>>> {
    if let Some(path) = &source.points {
        let points = read_points(path)?;
        for p in &points {
            if p.len() != f.dim() {
                return Err(Error::DimensionMismatch {
                    expected: f.dim(),
                    got: p.len(),
                });
            }
        }
        return Ok(points);
    }
    let count = source.random.unwrap_or(10);
    Ok(match f {
        FunctionSpec::Catalog(s) => s.sample_points(count, seed),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (lo, hi) = EXPR_SAMPLE_RANGE;
            (0..count)
                .map(|_| (0..f.dim()).map(|_| rng.gen_range(lo..hi)).collect())
                .collect()
        }
    })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))
}

fn read_points(path: &Path) -> Result<Vec<Vec<f64>>> {
    read_json(path)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixFile {
    Bare(Vec<Vec<Vec<f64>>>),
    Wrapped { matrices: Vec<Vec<Vec<f64>>> },
}

fn read_matrices(path: &Path) -> Result<Vec<DMatrix<f64>>> {
    let rows = match read_json::<MatrixFile>(path)? {
        MatrixFile::Bare(m) | MatrixFile::Wrapped { matrices: m } => m,
    };
    rows.into_iter()
        .map(|m| {
            let n = m.len();
            if m.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidParameter("matrices must be square".into()));
            }
            Ok(DMatrix::from_fn(n, n, |i, j| m[i][j]))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub index: usize,
    pub point: Vec<f64>,
    pub pick: f64,
    pub scalar: f64,
    pub tchebychev_sq: f64,
    pub cov_a_norm: f64,
    pub riem_norm: f64,
    pub extremal_residual: f64,
    pub case: Option<String>,
    pub spectrum: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejection {
    pub index: usize,
    pub point: Vec<f64>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub max_cov_a_norm: f64,
    pub max_riem_norm: f64,
    pub max_extremal_residual: f64,
    pub flat: bool,
    pub parallel: bool,
    pub extremal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub surface: String,
    pub dim: usize,
    pub seed: u64,
    pub tol: f64,
    pub records: Vec<PointRecord>,
    pub rejected: Vec<Rejection>,
    pub summary: Summary,
}

fn point_record(f: &FunctionSpec, index: usize, x: &[f64]) -> Result<PointRecord> {
    let jet = eval_jet(f, x, 4)?;
    let b = TensorBundle::from_jet(&jet)?;
    let nf = normal_form(&b)?;
    let c = &b.curvature;
    let rec = PointRecord {
        index,
        point: x.to_vec(),
        pick: c.pick,
        scalar: c.scalar,
        tchebychev_sq: c.t_norm_sq,
        cov_a_norm: c.cov_a_norm.unwrap_or(0.0),
        riem_norm: c.riem_norm,
        extremal_residual: extremal_residual(&jet)?,
        case: nf.case.map(|l| l.to_string()),
        spectrum: nf.spectrum,
    };
    let numbers = [
        rec.pick,
        rec.scalar,
        rec.tchebychev_sq,
        rec.cov_a_norm,
        rec.riem_norm,
        rec.extremal_residual,
    ];
    if numbers.iter().chain(&rec.spectrum).any(|v| !v.is_finite()) {
        return Err(Error::Domain {
            expr: f.to_string(),
            reason: "non-finite invariant".into(),
        });
    }
    Ok(rec)
}

/// Invariant report over the given points; points where evaluation fails are
/// listed as rejections.
pub fn invariants_report(f: &FunctionSpec, points: &[Vec<f64>], common: &Common) -> Report {
    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for (index, x) in points.iter().enumerate() {
        match point_record(f, index, x) {
            Ok(r) => records.push(r),
            Err(e) => rejected.push(Rejection {
                index,
                point: x.clone(),
                error: e.to_string(),
            }),
        }
    }
    let max = |g: fn(&PointRecord) -> f64| records.iter().map(g).fold(0.0, f64::max);
    let (cov, riem, ext) = (
        max(|r| r.cov_a_norm),
        max(|r| r.riem_norm),
        max(|r| r.extremal_residual.abs()),
    );
    let any = !records.is_empty();
    Report {
        tool: "calabi".into(),
        version: VERSION.into(),
        surface: f.to_string(),
        dim: f.dim(),
        seed: common.seed,
        tol: common.tol,
        summary: Summary {
            max_cov_a_norm: cov,
            max_riem_norm: riem,
            max_extremal_residual: ext,
            flat: any && riem <= common.tol,
            parallel: any && cov <= common.tol,
            extremal: any && ext <= common.tol,
        },
        records,
        rejected,
    }
}

fn print_invariants_table(err: &mut dyn Write, r: &Report) {
    let _ = writeln!(err, "{} (n = {}, seed {})", r.surface, r.dim, r.seed);
    let _ = writeln!(
        err,
        "{:>4} {:>14} {:>14} {:>14} {:>10} {:>10} {:>4}",
        "pt", "J", "R", "|T|^2", "|DA|", "|Riem|", "case"
    );
    for p in &r.records {
        let _ = writeln!(
            err,
            "{:>4} {:>14.8} {:>14.8} {:>14.8} {:>10.2e} {:>10.2e} {:>4}",
            p.index,
            p.pick,
            p.scalar,
            p.tchebychev_sq,
            p.cov_a_norm,
            p.riem_norm,
            p.case.as_deref().unwrap_or("-")
        );
    }
    for p in &r.rejected {
        let _ = writeln!(err, "{:>4} rejected: {}", p.index, p.error);
    }
    let s = &r.summary;
    let _ = writeln!(err, "flat {}  parallel {}  extremal {}", s.flat, s.parallel, s.extremal);
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifyRecord {
    pub index: usize,
    pub point: Vec<f64>,
    pub case: Option<String>,
    pub spectrum: Vec<f64>,
    /// `Abar_iii` in the normal-form basis.
    pub frame_diagonal: Vec<f64>,
    pub off_diagonality: f64,
    pub lagrange_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifyReport {
    pub tool: String,
    pub version: String,
    pub surface: String,
    pub dim: usize,
    pub seed: u64,
    pub tol: f64,
    pub records: Vec<ClassifyRecord>,
    pub rejected: Vec<Rejection>,
    /// Label shared by every record, if any.
    pub case: Option<String>,
}

pub fn classify_report(f: &FunctionSpec, points: &[Vec<f64>], common: &Common) -> ClassifyReport {
    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for (index, x) in points.iter().enumerate() {
        let res = TensorBundle::compute(f, x).and_then(|b| normal_form(&b));
        match res {
            Ok(nf) => records.push(ClassifyRecord {
                index,
                point: x.clone(),
                case: nf.case.map(|l| l.to_string()),
                frame_diagonal: (0..f.dim()).map(|i| nf.frame_cubic[[i, i, i]]).collect(),
                spectrum: nf.spectrum,
                off_diagonality: nf.off_diagonality,
                lagrange_residual: nf.lagrange_residual,
            }),
            Err(e) => rejected.push(Rejection {
                index,
                point: x.clone(),
                error: e.to_string(),
            }),
        }
    }
    let case = match records.first() {
        Some(first) if records.iter().all(|r| r.case == first.case) => first.case.clone(),
        _ => None,
    };
    ClassifyReport {
        tool: "calabi".into(),
        version: VERSION.into(),
        surface: f.to_string(),
        dim: f.dim(),
        seed: common.seed,
        tol: common.tol,
        records,
        rejected,
        case,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckLine {
    pub surface: String,
    pub check: String,
    /// Worst residual over the sample.
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub tol: f64,
    pub points_per_surface: usize,
    pub checks: Vec<CheckLine>,
    pub passed: bool,
    pub worst_failure: Option<CheckLine>,
}

/// Limit multipliers relative to the configured tolerance. Quantities that
/// pass through a fourth derivative or an iterative maximization get more
/// room than closed-form residuals.
const COV_A_FACTOR: f64 = 10.0;
const SPECTRUM_FACTOR: f64 = 100.0;
const PARAM_FACTOR: f64 = 0.01;

struct Checker<'a> {
    surface: String,
    lines: &'a mut Vec<CheckLine>,
}

impl Checker<'_> {
    fn push(&mut self, check: &str, value: f64, limit: f64) {
        self.lines.push(CheckLine {
            surface: self.surface.clone(),
            check: check.into(),
            value,
            limit,
            passed: value.is_finite() && value <= limit,
        });
    }
}

fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / (1.0 + want.abs())
}

pub fn verify_catalog(surfaces: &[CatalogSurface], count: usize, common: &Common) -> Result<VerifyReport> {
    let tol = common.tol;
    let mut lines = Vec::new();
    for (k, s) in surfaces.iter().enumerate() {
        let f = s.as_function();
        let exp = s.expected_invariants();
        let points = s.sample_points(count, common.seed.wrapping_add(k as u64));
        let mut ch = Checker {
            surface: s.to_string(),
            lines: &mut lines,
        };
        let mut worst = [0.0f64; 11];
        let mut case_errors = 0usize;
        for x in &points {
            let jet = eval_jet(&f, x, 4)?;
            let b = TensorBundle::from_jet(&jet)?;
            let c = &b.curvature;
            let nf = normal_form(&b)?;
            let (rhs_t, rhs_j) = parallel_rhs_checks(&b);
            let spec_dev = nf
                .spectrum
                .iter()
                .zip(&exp.spectrum)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let values = [
                rel(c.pick, exp.pick),
                (c.scalar - exp.scalar).abs(),
                rel(c.t_norm_sq, exp.tchebychev_sq),
                c.cov_a_norm.unwrap_or(f64::INFINITY),
                if exp.flat { c.riem_norm } else { 0.0 },
                extremal_residual(&jet)?.abs(),
                rhs_t,
                rhs_j,
                spec_dev,
                c.scalar_discrepancy(),
                nf.off_diagonality,
            ];
            for (w, v) in worst.iter_mut().zip(values) {
                *w = if v.is_nan() { f64::INFINITY } else { w.max(v) };
            }
            if nf.case != Some(exp.case) {
                case_errors += 1;
            }
        }
        ch.push("pick J (relative)", worst[0], tol);
        ch.push("scalar curvature R", worst[1], tol);
        ch.push("|T|^2 (relative)", worst[2], tol);
        ch.push("parallel |DA|", worst[3], COV_A_FACTOR * tol);
        if exp.flat {
            ch.push("flat |Riem|", worst[4], tol);
        }
        ch.push("extremal residual", worst[5], tol);
        ch.push("Ric(T,T) residual", worst[6], tol);
        ch.push("|Riem|^2 + Ric.AA residual", worst[7], tol);
        ch.push("spectrum", worst[8], SPECTRUM_FACTOR * tol);
        ch.push("R from J and |T|^2", worst[9], tol);
        ch.push("normal-form off-diagonality", worst[10], SPECTRUM_FACTOR * tol);
        ch.push(&format!("case {}", exp.case), case_errors as f64, 0.0);

        if let CatalogSurface::LogCone { c } = s {
            let mut rng = ChaCha8Rng::seed_from_u64(common.seed.wrapping_add(1000 + k as u64));
            let (mut graph, mut metric) = (0.0f64, 0.0f64);
            for _ in 0..count.max(1) * 10 {
                let y = [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.1..3.0),
                    rng.gen_range(-3.0..3.0),
                ];
                graph = graph.max(logcone_graph_residual(*c, y)?.abs());
                let m = logcone_pullback_metric(*c, y)?;
                let sh = (c * y[1]).sinh();
                let want = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, sh * sh]));
                metric = metric.max((m - &want).amax() / (1.0 + sh * sh));
            }
            ch.push("parametrization graph residual", graph, PARAM_FACTOR * tol);
            ch.push("parametrization metric", metric, tol);
        }
    }
    let passed = lines.iter().all(|l| l.passed);
    let worst_failure = lines
        .iter()
        .filter(|l| !l.passed)
        .max_by(|a, b| ratio(a).total_cmp(&ratio(b)))
        .cloned();
    Ok(VerifyReport {
        tool: "calabi".into(),
        version: VERSION.into(),
        seed: common.seed,
        tol: common.tol,
        points_per_surface: count,
        checks: lines,
        passed,
        worst_failure,
    })
}

fn ratio(l: &CheckLine) -> f64 {
    if l.limit > 0.0 {
        l.value / l.limit
    } else {
        l.value
    }
}

fn print_verify_table(err: &mut dyn Write, r: &VerifyReport) {
    let _ = writeln!(
        err,
        "{:<20} {:<32} {:>11} {:>11}  result",
        "surface", "check", "worst", "limit"
    );
    for l in &r.checks {
        let _ = writeln!(
            err,
            "{:<20} {:<32} {:>11.3e} {:>11.3e}  {}",
            l.surface,
            l.check,
            l.value,
            l.limit,
            if l.passed { "pass" } else { "FAIL" }
        );
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayRecord {
    pub v: Vec<f64>,
    pub position: Vec<f64>,
    pub closed_form: Vec<f64>,
    pub integration_residual: f64,
    pub error_estimate: f64,
    /// `|traced graph(x) - x_{n+1}|` at the endpoint.
    pub graph_residual: f64,
    /// Normalized endpoint checked against the recovered function.
    pub recovered_graph_residual: f64,
    /// Ray recovered from the endpoint, compared with `v`.
    pub ray_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructReport {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub tol: f64,
    pub n: usize,
    pub a: Vec<f64>,
    pub steps: usize,
    pub recovered: String,
    pub c: Vec<f64>,
    /// Frame diagonal of the recovered surface at a sample point.
    pub recovered_a: Vec<f64>,
    pub recovered_a_residual: f64,
    pub rays: Vec<RayRecord>,
    pub passed: bool,
}

pub fn reconstruct_report(
    diag: Vec<f64>,
    n: usize,
    rays: &[Vec<f64>],
    steps: usize,
    common: &Common,
) -> Result<ReconstructReport> {
    let base = FlatParallelData::unit_ray(n, diag.clone())?;
    let surface = recovered_surface(&base)?;
    let c = match &surface {
        CatalogSurface::Q { c, .. } => c.clone(),
        _ => Vec::new(),
    };
    let point = surface.sample_points(1, common.seed).remove(0);
    let nf = normal_form(&TensorBundle::compute(&surface.as_function(), &point)?)?;
    let recovered_a: Vec<f64> = (0..n).map(|i| nf.frame_cubic[[i, i, i]]).collect();
    let recovered_a_residual = recovered_a
        .iter()
        .zip(base.full_diag())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));

    let phi = normalizing_map(&base);
    let traced = traced_function(&base);
    let q = surface.as_function();
    let mut records = Vec::new();
    for v in rays {
        let data = base.with_ray(v.clone())?;
        let run = integrate_frames(&data, steps)?;
        let exact = closed_form(&data);
        let residual = run
            .position
            .iter()
            .zip(&exact)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let graph = (traced.value(&exact[..n])? - exact[n]).abs();
        let lifted = phi.apply(&nalgebra::DVector::from_column_slice(&exact));
        let recovered = (q.value(&lifted.as_slice()[..n])? - lifted[n]).abs();
        let back = ray_from_base_point(&data, &exact);
        let ray_res = back.iter().zip(v).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        records.push(RayRecord {
            v: v.clone(),
            position: run.position,
            closed_form: exact,
            integration_residual: residual,
            error_estimate: run.error_estimate,
            graph_residual: graph,
            recovered_graph_residual: recovered,
            ray_residual: ray_res,
        });
    }
    let tol = common.tol;
    let passed = recovered_a_residual <= SPECTRUM_FACTOR * tol
        && records.iter().all(|r| {
            r.integration_residual <= 0.1 * tol
                && r.graph_residual <= tol
                && r.recovered_graph_residual <= tol
                && r.ray_residual <= tol
        });
    Ok(ReconstructReport {
        tool: "calabi".into(),
        version: VERSION.into(),
        seed: common.seed,
        tol,
        n,
        a: diag,
        steps,
        recovered: surface.to_string(),
        c,
        recovered_a,
        recovered_a_residual,
        rays: records,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagReport {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub tol: f64,
    /// Rows are the common eigenvectors.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `eigenvalues[k][i]` of matrix `k` on eigenvector `i`.
    pub eigenvalues: Vec<Vec<f64>>,
    pub orthogonality: f64,
    pub off_diagonal: f64,
}

pub fn diag_report(matrices: Vec<DMatrix<f64>>, common: &Common) -> Result<DiagReport> {
    let fam = SymFamily::new(matrices)?;
    let d = simultaneous_diagonalize_seeded(&fam, common.seed)?;
    let n = fam.dim();
    let orth = (&d.p * d.p.transpose() - DMatrix::<f64>::identity(n, n)).amax();
    Ok(DiagReport {
        tool: "calabi".into(),
        version: VERSION.into(),
        seed: common.seed,
        tol: common.tol,
        eigenvectors: (0..n).map(|i| d.p.row(i).iter().copied().collect()).collect(),
        eigenvalues: d.eigenvalues,
        orthogonality: orth,
        off_diagonal: d.worst_offdiag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["calabi"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn parse_lists() {
        assert_eq!(parse_list("").unwrap(), Vec::<f64>::new());
        assert_eq!(parse_list("2, 1").unwrap(), vec![2.0, 1.0]);
        assert!(parse_list("2,x").is_err());
    }

    #[test]
    fn bad_spec_exits_with_usage_code() {
        let (code, out, err) = call(&["invariants", "ln(", "--random", "2"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(out.is_empty());
        assert!(err.contains("error"));
    }

    #[test]
    fn paraboloid_report() {
        let (code, out, _) = call(&["invariants", "paraboloid:2", "--random", "5", "--seed", "1"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["records"].as_array().unwrap().len(), 5);
        assert_eq!(v["records"][0]["case"], "C0");
        assert_eq!(v["summary"]["flat"], true);
    }

    #[test]
    fn rejected_points_are_listed() {
        let dir = std::env::temp_dir().join(format!("calabi-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("pts.json");
        std::fs::write(&path, "[[1.0, 0.5], [-1.0, 0.5]]").unwrap();
        let (code, out, _) = call(&["invariants", "q:1:2", "--points", path.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["records"].as_array().unwrap().len(), 1);
        assert_eq!(v["rejected"][0]["index"], 1);
    }
}
