//! Command-line driver.
//!
//! Two commands produce JSON reports: `curvature` summarizes the curvature of
//! a catalog model at seeded points and checks the model's declared
//! invariants, and `verify` runs one equation suite through
//! [`crate::verify::run`]. A third, `models`, lists the catalog.
//!
//! Exit codes are part of the interface:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | every applicable check passed |
//! | 1 | an invariant or equation failed |
//! | 2 | configuration error (bad flag, unknown model, invalid parameter) |
//! | 3 | domain failure (point outside a chart, singular metric) |
//!
//! The worker-pool size can be set with `KKFLAT_THREADS`; nothing else is
//! read from the environment.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geom::{curvature_bundle, Convention, CurvatureBundle, GeomError, MetricField};
use crate::kk::{load_spec, KKLocal, KKSpec};
use crate::models::{self, Params, Provides};
use crate::rng::XorShift64Star;
use crate::verify::{self, ConventionMode, Metadata, RunConfig, Subject, Suite, Tolerance, VerifyError};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "KKFLAT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "kkflat", version, about = "Conformal-flatness checks for non-Abelian Kaluza-Klein spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curvature summary of a catalog model at seeded points.
    Curvature(CurvatureArgs),
    /// Residual report for an equation suite.
    Verify(VerifyArgs),
    /// List the model catalog with default parameters.
    Models,
}

#[derive(Debug, Args)]
pub struct CurvatureArgs {
    #[arg(long)]
    pub model: String,
    /// Shorthand for `--param dim=N`.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Shorthand for `--param scalar=X` (curvature magnitude).
    #[arg(long, allow_negative_numbers = true)]
    pub scalar: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value_t = ConventionArg::Paper)]
    pub convention: ConventionArg,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: SuiteArg,
    /// Catalog model name.
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    pub model: Option<String>,
    /// Spec document path, or `random` for the seeded random spec.
    #[arg(long)]
    pub spec: Option<String>,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = verify::report::DEFAULT_TOL_REL)]
    pub tol_rel: f64,
    #[arg(long, default_value_t = verify::report::DEFAULT_TOL_ABS)]
    pub tol_abs: f64,
    #[arg(long, value_enum, default_value_t = ConventionArg::Both)]
    pub convention: ConventionArg,
    /// Multiply the internal radius of the instanton model (sensitivity check).
    #[arg(long)]
    pub detune_internal_radius: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Model parameter override, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Flatness,
    Integrability,
    Reduction,
    Qk,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::Flatness => Suite::Flatness,
            SuiteArg::Integrability => Suite::Integrability,
            SuiteArg::Reduction => Suite::Reduction,
            SuiteArg::Qk => Suite::Qk,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Paper,
    Standard,
    Both,
}

impl From<ConventionArg> for ConventionMode {
    fn from(c: ConventionArg) -> ConventionMode {
        match c {
            ConventionArg::Paper => ConventionMode::Paper,
            ConventionArg::Standard => ConventionMode::Standard,
            ConventionArg::Both => ConventionMode::Both,
        }
    }
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("`{v}` is not a number: {e}"))?;
    Ok((k.trim().to_string(), v))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain failure: {0}")]
    Domain(#[source] GeomError),
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output { .. } => EXIT_CONFIG,
            CliError::Domain(_) => EXIT_DOMAIN,
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> CliError {
        match e {
            VerifyError::Config(m) => CliError::Config(m),
            VerifyError::Domain(g) => CliError::Domain(g),
        }
    }
}

/// Errors while building a model are configuration errors; errors while
/// evaluating one are domain failures.
fn config(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// A finished command: the JSON text and whether everything passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub json: String,
    pub pass: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }
}

/// Parses `args` (program name first), runs the command, writes the report
/// and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("kkflat: {e}");
        return e.exit_code();
    }
    let out = match &cli.command {
        Command::Curvature(a) => a.common.out.clone(),
        Command::Verify(a) => a.common.out.clone(),
        Command::Models => None,
    };
    match execute(&cli).and_then(|o| emit(&o, out.as_ref()).map(|_| o)) {
        Ok(o) => o.exit_code(),
        Err(e) => {
            eprintln!("kkflat: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .map_err(|_| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    if n == 0 {
        return Err(CliError::Config(format!("{THREADS_ENV} must be positive")));
    }
    // A second initialization in the same process is harmless.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn emit(o: &Outcome, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, format!("{}\n", o.json)).map_err(|source| CliError::Output {
            path: path.display().to_string(),
            source,
        }),
        None => {
            println!("{}", o.json);
            Ok(())
        }
    }
}

/// Runs a parsed command without touching stdout or the filesystem.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Curvature(a) => cmd_curvature(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Models => Ok(Outcome {
            json: serde_json::to_string_pretty(&models::catalog()).expect("catalog serializes"),
            pass: true,
        }),
    }
}

fn collect_params(pairs: &[(String, f64)]) -> Result<Params, CliError> {
    let mut p = Params::new();
    for (k, v) in pairs {
        if p.insert(k.clone(), *v).is_some() {
            return Err(CliError::Config(format!("parameter `{k}` given twice")));
        }
    }
    Ok(p)
}

fn check_points(points: usize) -> Result<(), CliError> {
    if points == 0 {
        return Err(CliError::Config("--points must be at least 1".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------- verify

fn cmd_verify(a: &VerifyArgs) -> Result<Outcome, CliError> {
    check_points(a.common.points)?;
    if !(a.tol_rel > 0.0 && a.tol_abs > 0.0) {
        return Err(CliError::Config("tolerances must be positive".into()));
    }
    let mut params = collect_params(&a.common.params)?;
    if let Some(f) = a.detune_internal_radius {
        params.insert("detune_internal_radius".into(), f);
    }
    let (name, subject) = resolve_subject(a, &mut params)?;
    let cfg = RunConfig {
        suite: a.suite.into(),
        model: name,
        params,
        points: a.common.points,
        seed: a.common.seed,
        tol: Tolerance {
            rel: a.tol_rel,
            abs: a.tol_abs,
        },
        convention: a.convention.into(),
    };
    let report = verify::run(&subject, &cfg)?;
    Ok(Outcome {
        json: report.to_json(),
        pass: report.body.verdict.pass,
    })
}

fn resolve_subject(a: &VerifyArgs, params: &mut Params) -> Result<(String, Subject), CliError> {
    if let Some(spec) = &a.spec {
        if spec == "random" {
            params.entry("seed".into()).or_insert(a.common.seed as f64);
            let s = models::kk_model("random", params).map_err(config)?;
            return Ok(("random".into(), Subject::KaluzaKlein(s)));
        }
        if !params.is_empty() {
            return Err(CliError::Config("--param applies to catalog models, not spec files".into()));
        }
        let s = load_spec(std::path::Path::new(spec)).map_err(config)?;
        return Ok((s.name.clone(), Subject::KaluzaKlein(s)));
    }
    let name = a.model.as_deref().expect("clap requires --model or --spec");
    let desc = models::descriptor_by_name(name).ok_or_else(|| CliError::Config(format!("unknown model `{name}`")))?;
    let subject = if desc.provides.contains(&Provides::KkSpec) {
        Subject::KaluzaKlein(models::kk_model(name, params).map_err(config)?)
    } else if desc.provides.contains(&Provides::QkStructure) {
        Subject::Quaternionic(models::qk_structure_model(name, params).map_err(config)?)
    } else {
        return Err(CliError::Config(format!(
            "model `{name}` provides neither a Kaluza-Klein spec nor a quaternionic structure"
        )));
    };
    Ok((name.to_string(), subject))
}

// ------------------------------------------------------------- curvature

/// Curvature at one sampled point.
#[derive(Debug, Clone, Serialize)]
pub struct PointCurvature {
    pub point: Vec<f64>,
    pub scalar: f64,
    pub ricci_eigenvalue_min: f64,
    pub ricci_eigenvalue_max: f64,
    pub max_weyl: f64,
    pub max_cotton: f64,
}

/// One declared model invariant: the worst observed value over all points
/// against its threshold.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub observed: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureBody {
    pub model: String,
    pub params: Params,
    pub dim: usize,
    pub convention: String,
    pub seed: u64,
    pub points: Vec<PointCurvature>,
    pub invariants: Vec<InvariantCheck>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub schema_version: u32,
    pub body: CurvatureBody,
    pub metadata: Metadata,
}

/// Maximum Weyl component allowed where a model is conformally flat.
const FLAT_WEYL: f64 = 1e-10;
const FLAT_COTTON: f64 = 1e-9;
/// Relative accuracy of a closed-form scalar curvature.
const SCALAR_REL: f64 = 1e-9;
/// Conformal flatness of an assembled Kaluza-Klein solution.
const KK_WEYL: f64 = 1e-7;

enum Geometry {
    Metric(std::sync::Arc<dyn MetricField>),
    KaluzaKlein(KKSpec),
}

impl Geometry {
    fn dim(&self) -> usize {
        match self {
            Geometry::Metric(m) => m.dim(),
            Geometry::KaluzaKlein(s) => s.total_dim(),
        }
    }

    fn sample(&self, points: usize, seed: u64) -> Vec<Vec<f64>> {
        match self {
            Geometry::Metric(m) => {
                let dom = m.domain();
                let mut rng = XorShift64Star::new(seed);
                (0..points).map(|_| dom.sample(&mut rng)).collect()
            }
            Geometry::KaluzaKlein(s) => s.sample_points(points, seed).iter().map(|p| p.concat()).collect(),
        }
    }

    fn bundle(&self, p: &[f64], conv: Convention) -> Result<CurvatureBundle, GeomError> {
        match self {
            Geometry::Metric(m) => curvature_bundle(m.as_ref(), p, conv),
            Geometry::KaluzaKlein(s) => {
                let d = s.d();
                let point = crate::kk::KKPoint {
                    x: p[..d].to_vec(),
                    y: p[d..].to_vec(),
                };
                let geo = KKLocal::new(s, &point)?.total_geometry()?;
                let jets = geo.curvature()?;
                Ok(CurvatureBundle::from_jets(p, &geo, &jets, conv))
            }
        }
    }
}

/// Expected values a model declares about its own curvature.
#[derive(Debug, Default)]
struct Declared {
    /// Signed scalar curvature in the `Paper` convention.
    paper_scalar: Option<f64>,
    weyl: Option<f64>,
    cotton: Option<f64>,
}

fn declared(name: &str, p: &Params, dim: usize) -> Declared {
    let flat = Declared {
        paper_scalar: None,
        weyl: Some(FLAT_WEYL),
        cotton: Some(FLAT_COTTON),
    };
    match name {
        "flat" => Declared {
            paper_scalar: Some(0.0),
            ..flat
        },
        "sphere" => Declared {
            paper_scalar: Some(-p["scalar"]),
            ..flat
        },
        "hyperbolic" => Declared {
            paper_scalar: Some(p["scalar"]),
            ..flat
        },
        "s3-frame" => Declared {
            paper_scalar: Some(-6.0 / (p["radius"] * p["radius"])),
            ..flat
        },
        // S⁴: Ricci eigenvalue 3k, scalar 12k.
        "qk-space-form" => Declared {
            paper_scalar: Some(-12.0 * p["k"]),
            weyl: Some(1e-8),
            cotton: Some(1e-8),
        },
        // Three dimensions force the Weyl tensor to vanish.
        "berger" => Declared {
            weyl: Some(FLAT_WEYL),
            ..Declared::default()
        },
        "trivial-solution" if p["rex_scale"] == 1.0 => Declared {
            weyl: Some(KK_WEYL),
            ..Declared::default()
        },
        "hopf-instanton" if p["detune_internal_radius"] == 1.0 => Declared {
            weyl: Some(KK_WEYL),
            ..Declared::default()
        },
        _ if dim == 3 => Declared {
            weyl: Some(FLAT_WEYL),
            ..Declared::default()
        },
        _ => Declared::default(),
    }
}

fn check(name: &str, observed: f64, threshold: f64) -> InvariantCheck {
    InvariantCheck {
        name: name.to_string(),
        observed,
        threshold,
        pass: observed <= threshold,
    }
}

fn cmd_curvature(a: &CurvatureArgs) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let c = &a.common;
    check_points(c.points)?;
    let conv = match a.convention {
        ConventionArg::Paper => Convention::Paper,
        ConventionArg::Standard => Convention::Standard,
        ConventionArg::Both => return Err(CliError::Config("curvature takes a single convention".into())),
    };
    let mut params = collect_params(&c.params)?;
    if let Some(d) = a.dim {
        params.insert("dim".into(), d as f64);
    }
    if let Some(s) = a.scalar {
        params.insert("scalar".into(), s);
    }
    let desc = models::descriptor_by_name(&a.model)
        .ok_or_else(|| CliError::Config(format!("unknown model `{}`", a.model)))?;
    let geometry = if desc.provides.contains(&Provides::Metric) {
        Geometry::Metric(models::metric_model(&a.model, &params).map_err(config)?)
    } else {
        Geometry::KaluzaKlein(models::kk_model(&a.model, &params).map_err(config)?)
    };
    let resolved = models::resolve_params(&a.model, &params).map_err(config)?;

    let pts = geometry.sample(c.points, c.seed);
    let bundles: Vec<CurvatureBundle> = pts
        .par_iter()
        .map(|p| geometry.bundle(p, conv))
        .collect::<Result<_, _>>()
        .map_err(CliError::Domain)?;
    let points: Vec<PointCurvature> = bundles
        .iter()
        .map(|b| {
            let ev = b.ricci_eigenvalues().unwrap_or_default();
            PointCurvature {
                point: b.point.clone(),
                scalar: b.scalar,
                ricci_eigenvalue_min: ev.first().copied().unwrap_or(f64::NAN),
                ricci_eigenvalue_max: ev.last().copied().unwrap_or(f64::NAN),
                max_weyl: b.max_weyl(),
                max_cotton: b.max_cotton(),
            }
        })
        .collect();

    let dim = geometry.dim();
    let decl = declared(&a.model, &resolved, dim);
    let mut invariants = Vec::new();
    if let Some(s) = decl.paper_scalar {
        let want = conv.sigma() * s;
        let worst = points.iter().map(|p| (p.scalar - want).abs()).fold(0.0, f64::max);
        invariants.push(check("scalar", worst, SCALAR_REL * want.abs().max(1.0)));
    }
    if let Some(t) = decl.weyl {
        invariants.push(check("weyl", points.iter().map(|p| p.max_weyl).fold(0.0, f64::max), t));
    }
    if let Some(t) = decl.cotton {
        invariants.push(check("cotton", points.iter().map(|p| p.max_cotton).fold(0.0, f64::max), t));
    }
    let pass = invariants.iter().all(|i| i.pass);
    let report = CurvatureReport {
        schema_version: verify::SCHEMA_VERSION,
        body: CurvatureBody {
            model: a.model.clone(),
            params: resolved,
            dim,
            convention: conv.name().to_string(),
            seed: c.seed,
            points,
            invariants,
            pass,
        },
        metadata: Metadata {
            timestamp_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            elapsed_seconds: start.elapsed().as_secs_f64(),
            threads: rayon::current_num_threads(),
        },
    };
    Ok(Outcome {
        json: serde_json::to_string_pretty(&report).expect("curvature report serializes"),
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> Result<Outcome, CliError> {
        let mut full = vec!["kkflat"];
        full.extend_from_slice(args);
        execute(&Cli::try_parse_from(full).expect("arguments parse"))
    }

    #[test]
    fn params_parse() {
        assert_eq!(parse_param("k=4").unwrap(), ("k".to_string(), 4.0));
        assert_eq!(parse_param(" radius = 1.5").unwrap(), ("radius".to_string(), 1.5));
        assert!(parse_param("k").is_err());
        assert!(parse_param("k=x").is_err());
    }

    #[test]
    fn flat_curvature_passes() {
        let o = run(&["curvature", "--model", "flat", "--dim", "4", "--points", "3"]).unwrap();
        assert!(o.pass);
        let v: serde_json::Value = serde_json::from_str(&o.json).unwrap();
        assert_eq!(v["body"]["points"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn sphere_scalar_matches_magnitude() {
        let o = run(&["curvature", "--model", "sphere", "--dim", "3", "--scalar", "6", "--points", "4"]).unwrap();
        assert!(o.pass);
        let v: serde_json::Value = serde_json::from_str(&o.json).unwrap();
        for p in v["body"]["points"].as_array().unwrap() {
            assert!((p["scalar"].as_f64().unwrap() + 6.0).abs() < 1e-9);
        }
    }

    #[test]
    fn negative_magnitude_is_a_config_error() {
        let e = run(&["curvature", "--model", "sphere", "--dim", "3", "--scalar", "-1"]).unwrap_err();
        assert_eq!(e.exit_code(), EXIT_CONFIG);
    }

    #[test]
    fn unknown_flags_and_models_are_config_errors() {
        assert_eq!(main_with_args(["kkflat", "verify", "all", "--model", "flat", "--colour", "red"]), EXIT_CONFIG);
        assert_eq!(main_with_args(["kkflat", "verify", "all", "--model", "nope"]), EXIT_CONFIG);
        assert_eq!(main_with_args(["kkflat", "verify", "all", "--model", "flat"]), EXIT_CONFIG);
        assert_eq!(main_with_args(["kkflat", "verify", "all", "--model", "hopf-instanton", "--points", "0"]), EXIT_CONFIG);
    }

    #[test]
    fn verify_detuned_instanton_fails() {
        let o = run(&[
            "verify",
            "flatness",
            "--model",
            "hopf-instanton",
            "--detune-internal-radius",
            "1.1",
            "--points",
            "2",
            "--convention",
            "paper",
        ])
        .unwrap();
        assert!(!o.pass);
        assert_eq!(o.exit_code(), EXIT_FAIL);
    }

    #[test]
    fn random_spec_reduction_runs() {
        let o = run(&["verify", "reduction", "--spec", "random", "--seed", "3", "--points", "1"]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&o.json).unwrap();
        assert_eq!(v["body"]["model"], "random");
        assert_eq!(v["body"]["params"]["seed"], 3.0);
    }
}
