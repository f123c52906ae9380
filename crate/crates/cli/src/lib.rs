//! The `finsler` command-line tool.

pub mod report;
pub mod specfile;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use finsler_core::classify;
use finsler_core::decomp::{self, DecompOutcome, DecompSpec};
use finsler_core::expr::EvalError;
use finsler_core::finsler::PointGeometry;
use finsler_core::geodesics;
use finsler_core::{Error, Mode, Rational, RationalFn, Scalar, Tolerance};
use serde_json::{json, Value};

use specfile::{MetricKind, SpecFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "finsler", version, about = "Classify and integrate m-th root Finsler metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Riemannian / Berwald / Landsberg verdicts at each base point.
    Classify(CommonArgs),
    /// Berwald <=> parallel-b check and identities for a decomposable metric.
    VerifyDecomp(CommonArgs),
    /// Integrate a geodesic and report the drift of F.
    Geodesic(GeodesicArgs),
    /// Print G^i, N^i_j, G^i_jk and L^i_jk at one base point.
    Spray(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Spec file (TOML).
    pub spec: PathBuf,
    /// Arithmetic mode; overrides the spec file.
    #[arg(long)]
    pub mode: Option<Mode>,
    /// Absolute float tolerance; overrides the spec file.
    #[arg(long)]
    pub eps_abs: Option<f64>,
    /// Relative float tolerance; overrides the spec file.
    #[arg(long)]
    pub eps_rel: Option<f64>,
    /// Base point "v1,...,vn" with rational entries; repeatable. Overrides
    /// the spec file's points.
    #[arg(long = "point")]
    pub points: Vec<String>,
    /// Rescale b to unit norm instead of rejecting it.
    #[arg(long)]
    pub normalize_b: bool,
    /// Emit JSON.
    #[arg(long)]
    pub json: bool,
    /// Include full residual polynomials in witnesses.
    #[arg(long)]
    pub dump_witness: bool,
}

#[derive(Debug, Args)]
pub struct GeodesicArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Initial position "v1,...,vn".
    #[arg(long)]
    pub x0: String,
    /// Initial velocity "v1,...,vn".
    #[arg(long)]
    pub y0: String,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Write the trajectory table (t, x, y, F) here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also integrate the Riemannian geodesic of gamma and report the
    /// deviation (decomposable, parallel b only).
    #[arg(long)]
    pub compare_riemannian: bool,
}

/// A failed command with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::InvariantViolation(_)) { EXIT_INVARIANT } else { EXIT_INPUT };
        Failure { code, message: e.to_string() }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INPUT, message: message.into() }
}

/// Rendered output and whether any point was degenerate.
pub struct Output {
    pub body: String,
    pub degenerate: bool,
}

struct Context {
    spec: SpecFile,
    mode: Mode,
    tol: Tolerance,
    points: Vec<Vec<Rational>>,
}

fn load(args: &CommonArgs) -> Result<Context, Failure> {
    let text = fs::read_to_string(&args.spec).map_err(|e| input_error(format!("{}: {e}", args.spec.display())))?;
    let mut spec = specfile::parse(&text).map_err(|e| input_error(format!("{}: {e}", args.spec.display())))?;
    if args.normalize_b {
        match &spec.metric {
            MetricKind::Decomposable(d) => spec.metric = MetricKind::Decomposable(d.normalized()),
            MetricKind::MthRoot(_) => return Err(input_error("--normalize-b applies to decomposable specs only")),
        }
    }
    let n = spec.dimension();
    let points = if args.points.is_empty() {
        spec.points.clone()
    } else {
        args.points.iter().map(|p| specfile::parse_point(p, n)).collect::<Result<_, _>>().map_err(input_error)?
    };
    let points = if points.is_empty() { vec![vec![Rational::from_integer(0.into()); n]] } else { points };
    let mode = args.mode.or(spec.mode).unwrap_or(Mode::Exact);
    let base = spec.tolerance.unwrap_or_default();
    let tol = Tolerance::new(args.eps_abs.unwrap_or(base.abs), args.eps_rel.unwrap_or(base.rel));
    if let MetricKind::Decomposable(d) = &spec.metric {
        for p in &points {
            check_unit_norm(d, p, mode, tol)?;
        }
    }
    Ok(Context { spec, mode, tol, points })
}

fn check_unit_norm(d: &DecompSpec, p: &[Rational], mode: Mode, tol: Tolerance) -> Result<(), Failure> {
    let exact = match mode {
        Mode::Exact => d.check_unit_norm::<Rational>(p, tol),
        Mode::Float => Err(Error::Eval(EvalError::NonFinite)),
    };
    let result = match exact {
        Err(Error::Eval(_)) => d.check_unit_norm::<f64>(&p.iter().map(Scalar::to_f64).collect::<Vec<_>>(), tol),
        other => other,
    };
    result.map_err(|e| input_error(format!("at {}: {e} (use --normalize-b to rescale)", report::point_text(p))))
}

fn render(json: bool, value: Value, text: String) -> String {
    if json {
        serde_json::to_string_pretty(&value).expect("serializable report")
    } else {
        text
    }
}

pub fn cmd_classify(args: &CommonArgs) -> Result<Output, Failure> {
    let ctx = load(args)?;
    let metric = ctx.spec.metric_spec().compile();
    let report = classify::classify(&metric, &ctx.points, ctx.mode, ctx.tol)?;
    let kind = ctx.spec.kind_name();
    let body = render(
        args.json,
        report::classification_json(kind, &report, args.dump_witness),
        report::classification_text(kind, &report, args.dump_witness),
    );
    Ok(Output { body, degenerate: report.has_degenerate_points() })
}

pub fn cmd_verify_decomp(args: &CommonArgs) -> Result<Output, Failure> {
    let ctx = load(args)?;
    let MetricKind::Decomposable(spec) = &ctx.spec.metric else {
        return Err(input_error("verify-decomp needs a decomposable spec"));
    };
    let outcomes = decomp::theorem_check(spec, &ctx.points, ctx.mode, ctx.tol)?;
    let degenerate = outcomes.iter().any(|o| matches!(o, DecompOutcome::Degenerate { .. }));
    let body = render(
        args.json,
        report::decomp_json(&outcomes, args.dump_witness),
        report::decomp_text(&outcomes, args.dump_witness),
    );
    Ok(Output { body, degenerate })
}

fn rational_text<S: Scalar>(f: &RationalFn<S>) -> String {
    match f.polynomial_quotient() {
        Ok(Some(p)) => p.to_string(),
        _ => f.to_string(),
    }
}

fn spray_tables<S: Scalar>(ctx: &Context, point: &[Rational]) -> Result<(Value, String), Error> {
    let metric = ctx.spec.metric_spec().compile();
    let x0: Vec<S> = point.iter().map(S::from_rational).collect();
    let geom = PointGeometry::new(&metric.at::<S>(&x0, ctx.tol)?)?;
    let metrical = geom.metrical();
    let n = geom.tensors.n;
    let mut lines = vec![format!("point {} [{}]", report::point_text(point), S::MODE)];
    let g: Vec<String> = geom.spray.g.iter().map(rational_text).collect();
    lines.extend(g.iter().enumerate().map(|(i, v)| format!("G^{} = {v}", i + 1)));
    let nl: Vec<Vec<String>> = geom.spray.n.iter().map(|r| r.iter().map(rational_text).collect()).collect();
    for (i, row) in nl.iter().enumerate() {
        lines.extend(row.iter().enumerate().map(|(j, v)| format!("N^{}_{} = {v}", i + 1, j + 1)));
    }
    let triple = |t: &Vec<Vec<Vec<RationalFn<S>>>>, name: &str, lines: &mut Vec<String>| -> Vec<Vec<Vec<String>>> {
        let table: Vec<Vec<Vec<String>>> =
            t.iter().map(|a| a.iter().map(|b| b.iter().map(rational_text).collect()).collect()).collect();
        for i in 0..n {
            for j in 0..n {
                for k in j..n {
                    lines.push(format!("{name}^{}_{}{} = {}", i + 1, j + 1, k + 1, table[i][j][k]));
                }
            }
        }
        table
    };
    let gjk = triple(&geom.spray.gjk, "G", &mut lines);
    let l = triple(&metrical.l, "L", &mut lines);
    let value = json!({
        "schema_version": report::SCHEMA_VERSION,
        "command": "spray",
        "point": report::point_strings(point),
        "mode": S::MODE.to_string(),
        "G": g,
        "N": nl,
        "G_jk": gjk,
        "L_jk": l,
    });
    Ok((value, lines.join("\n")))
}

pub fn cmd_spray(args: &CommonArgs) -> Result<Output, Failure> {
    let ctx = load(args)?;
    let point = ctx.points[0].clone();
    let tables = match ctx.mode {
        Mode::Exact => match spray_tables::<Rational>(&ctx, &point) {
            Err(Error::Eval(EvalError::Transcendental(_))) => spray_tables::<f64>(&ctx, &point),
            other => other,
        },
        Mode::Float => spray_tables::<f64>(&ctx, &point),
    };
    let (value, text) = tables?;
    Ok(Output { body: render(args.json, value, text), degenerate: false })
}

fn write_table(path: &Path, traj: &geodesics::Trajectory, ctx: &Context) -> Result<(), Failure> {
    let metric = ctx.spec.metric_spec().compile();
    let mut file = fs::File::create(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    geodesics::write_table(traj, &metric, ctx.tol, &mut file)
        .and_then(|_| file.flush())
        .map_err(|e| input_error(format!("{}: {e}", path.display())))
}

pub fn cmd_geodesic(args: &GeodesicArgs) -> Result<Output, Failure> {
    let ctx = load(&args.common)?;
    let n = ctx.spec.dimension();
    let x0 = specfile::parse_point(&args.x0, n).map_err(input_error)?;
    let y0 = specfile::parse_point(&args.y0, n).map_err(input_error)?;
    if let MetricKind::Decomposable(d) = &ctx.spec.metric {
        check_unit_norm(d, &x0, ctx.mode, ctx.tol)?;
    }
    let xf: Vec<f64> = x0.iter().map(Scalar::to_f64).collect();
    let yf: Vec<f64> = y0.iter().map(Scalar::to_f64).collect();
    let metric = ctx.spec.metric_spec().compile();

    let (traj, deviation) = if args.compare_riemannian {
        let MetricKind::Decomposable(d) = &ctx.spec.metric else {
            return Err(input_error("--compare-riemannian needs a decomposable spec"));
        };
        let cmp = geodesics::compare_riemannian(d, &x0, &yf, args.dt, args.steps, ctx.mode, ctx.tol)?;
        (cmp.finsler, Some(cmp.max_deviation))
    } else {
        (geodesics::integrate(&metric, &xf, &yf, args.dt, args.steps, ctx.tol)?, None)
    };
    let drift = geodesics::invariant_drift(&traj, &metric, ctx.tol);
    if let Some(path) = &args.out {
        write_table(path, &traj, &ctx)?;
    }
    let (x_end, y_end) = traj.last();
    let t_end = *traj.times.last().expect("initial sample");
    let value = json!({
        "schema_version": report::SCHEMA_VERSION,
        "command": "geodesic",
        "integrator": traj.integrator,
        "dt": traj.dt,
        "steps": args.steps,
        "t_end": t_end,
        "x_end": x_end,
        "y_end": y_end,
        "f_drift": drift.as_ref().ok(),
        "f_drift_error": drift.as_ref().err().map(ToString::to_string),
        "riemannian_deviation": deviation,
        "table": args.out.as_ref().map(|p| p.display().to_string()),
    });
    let fmt_vec = |v: &[f64]| v.iter().map(|c| format!("{c:.12}")).collect::<Vec<_>>().join(", ");
    let mut lines = vec![
        format!("integrator: {}, dt = {}, steps = {}, t_end = {t_end}", traj.integrator, traj.dt, args.steps),
        format!("x(t_end) = ({})", fmt_vec(x_end)),
        format!("y(t_end) = ({})", fmt_vec(y_end)),
        match &drift {
            Ok(d) => format!("F drift: {d:.3e}"),
            Err(e) => format!("F drift unavailable: {e}"),
        },
    ];
    if let Some(d) = deviation {
        lines.push(format!("max deviation from Riemannian geodesic: {d:.3e}"));
    }
    if let Some(p) = &args.out {
        lines.push(format!("trajectory written to {}", p.display()));
    }
    Ok(Output { body: render(args.common.json, value, lines.join("\n")), degenerate: false })
}

/// Runs a parsed command line, printing to stdout/stderr; returns the exit
/// code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Classify(a) => cmd_classify(a),
        Command::VerifyDecomp(a) => cmd_verify_decomp(a),
        Command::Geodesic(a) => cmd_geodesic(a),
        Command::Spray(a) => cmd_spray(a),
    };
    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{}", out.body);
            if out.degenerate {
                EXIT_INPUT
            } else {
                EXIT_OK
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
