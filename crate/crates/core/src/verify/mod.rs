//! Residuals of every displayed equation system, evaluated pointwise and
//! folded into a deterministic report.
//!
//! Each equation is written as a [`Balance`] of named terms. A point passes
//! when the residual is below the absolute threshold or small relative to
//! the largest term. Equations that only follow on the solution branch count
//! toward the verdict only when every defining equation (the flatness system
//! and its integrability conditions) passed in the same run, in its literal
//! or its sign-corrected form.

mod fields;
mod qk;
pub mod report;
mod system;

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Convention, GeomError, MetricField};
use crate::kk::KKSpec;
use crate::models::{Params, QKStructure};
use crate::rng::XorShift64Star;
use crate::tensor::linalg::generalized_eigenvalues;

pub use fields::Reduced;
pub use qk::{eval_gbar_relations, eval_qk, QKData};
pub use report::{
    aggregate, Balance, ComparisonRow, Constancy, Entry, EquationId, Family, Measure, Metadata, PointResidual,
    ReportBody, ResidualReport, Tolerance, Verdict, SCHEMA_VERSION,
};
pub use system::{eval_curvature_forms, eval_integrability9, eval_system8, f2_nondegenerate};
pub(crate) use system::{g_wedge, gg_bracket};

/// Internal points checked by the Killing/closure validation before a run.
pub const SPEC_VALIDATION_POINTS: usize = 8;

/// Spread allowed for scalars that must be constant on a solution.
pub const CONSTANCY_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Flatness,
    Integrability,
    Reduction,
    Qk,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Flatness => "flatness",
            Suite::Integrability => "integrability",
            Suite::Reduction => "reduction",
            Suite::Qk => "qk",
            Suite::All => "all",
        }
    }

    fn flatness(self) -> bool {
        matches!(self, Suite::Flatness | Suite::All)
    }
    fn integrability(self) -> bool {
        matches!(self, Suite::Integrability | Suite::All)
    }
    fn reduction(self) -> bool {
        matches!(self, Suite::Reduction | Suite::All)
    }
    fn qk(self) -> bool {
        matches!(self, Suite::Qk | Suite::All)
    }
    /// Whether the suite reports solution-branch consequences.
    fn has_branch(self) -> bool {
        self.flatness() || self.qk()
    }
}

/// Which sign convention(s) to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConventionMode {
    Paper,
    Standard,
    Both,
}

impl ConventionMode {
    pub fn name(self) -> &'static str {
        match self {
            ConventionMode::Paper => "paper",
            ConventionMode::Standard => "standard",
            ConventionMode::Both => "both",
        }
    }

    /// Conventions to run; the first one decides the verdict.
    pub fn conventions(self) -> Vec<Convention> {
        match self {
            ConventionMode::Paper => vec![Convention::Paper],
            ConventionMode::Standard => vec![Convention::Standard],
            ConventionMode::Both => vec![Convention::Paper, Convention::Standard],
        }
    }
}

/// What a run is evaluated on.
#[derive(Debug, Clone)]
pub enum Subject {
    KaluzaKlein(KKSpec),
    Quaternionic(QKStructure),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub suite: Suite,
    pub model: String,
    pub params: Params,
    pub points: usize,
    pub seed: u64,
    pub tol: Tolerance,
    pub convention: ConventionMode,
}

impl RunConfig {
    pub fn new(suite: Suite, model: impl Into<String>) -> RunConfig {
        RunConfig {
            suite,
            model: model.into(),
            params: Params::new(),
            points: 20,
            seed: 0,
            tol: Tolerance::default(),
            convention: ConventionMode::Both,
        }
    }
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Domain(#[from] GeomError),
}

/// Per-point scalars kept for constancy and the derived-value summary.
#[derive(Debug, Clone, Default)]
struct Scalars {
    r_ex: f64,
    r_in: f64,
    f2: f64,
    gbar: Vec<f64>,
    ricci_eigs: Vec<f64>,
    total_weyl: Option<f64>,
    total_cotton: Option<f64>,
}

struct PointOut {
    /// Indexed like the convention list.
    residuals: Vec<Vec<PointResidual>>,
    /// Defining-equation residuals used only to decide the solution branch.
    gate: Vec<Vec<PointResidual>>,
    scalars: Scalars,
}

fn eval_kk_point(
    spec: &KKSpec,
    point: &crate::kk::KKPoint,
    cfg: &RunConfig,
    convs: &[Convention],
) -> Result<PointOut, GeomError> {
    let r = Reduced::new(spec, point)?;
    let suite = cfg.suite;
    let mut residuals = Vec::with_capacity(convs.len());
    let mut gate = Vec::with_capacity(convs.len());
    for &conv in convs {
        let mut out = Vec::new();
        let mut g = Vec::new();
        if suite.has_branch() || suite.flatness() {
            let s8 = eval_system8(&r, conv);
            if suite.flatness() {
                out.extend(s8.iter().cloned());
            }
            g.extend(s8);
        }
        if suite.flatness() {
            out.extend(eval_curvature_forms(&r, conv));
        }
        if suite.has_branch() || suite.integrability() {
            let s9 = eval_integrability9(&r, conv);
            if suite.integrability() {
                out.extend(s9.iter().cloned());
            }
            g.extend(s9);
        }
        if suite.qk() {
            match QKData::from_reduced(&r) {
                Ok(q) => out.extend(eval_qk(&q)),
                Err(reason) => {
                    for id in [
                        EquationId::Qk1a,
                        EquationId::Qk1b,
                        EquationId::Qk2a,
                        EquationId::Qk2b,
                        EquationId::Qk3a,
                        EquationId::Qk3b,
                    ] {
                        out.push(PointResidual::not_applicable(id, None, reason.clone()));
                    }
                }
            }
            out.extend(eval_gbar_relations(&r));
        }
        if suite.reduction() {
            out.extend(crate::reduce::reduction_residuals(&r, conv)?);
        }
        residuals.push(out);
        gate.push(g);
    }

    let primary = convs[0];
    let ric = r.ricci_ext(primary);
    let g = r.g();
    let mut scalars = Scalars {
        r_ex: r.r_ex(primary),
        r_in: r.r_in(primary),
        f2: r.f2_value(),
        gbar: r.local.gbar().values().comps().to_vec(),
        ricci_eigs: generalized_eigenvalues(r.d(), ric.comps(), g.comps()).unwrap_or_default(),
        ..Scalars::default()
    };
    if suite.flatness() {
        let curv = r.local.total_geometry()?.curvature()?;
        scalars.total_weyl = curv.weyl.as_ref().map(|w| w.max_abs());
        scalars.total_cotton = curv.cotton.as_ref().map(|c| c.max_abs());
    }
    Ok(PointOut {
        residuals,
        gate,
        scalars,
    })
}

fn spread(xs: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

/// Failing literal equations, and tags that fail in every reading.
///
/// A variant that fails while the literal form holds is an alternative
/// reading ruled out by the data, not a failure. A literal form that fails
/// always counts, even when a sign-corrected variant holds.
fn verdict_lists(entries: &[Entry]) -> (Vec<String>, Vec<String>) {
    let counted: Vec<&Entry> = entries.iter().filter(|e| e.in_verdict).collect();
    let failing = counted
        .iter()
        .filter(|e| e.variant.is_none() && !e.pass)
        .map(|e| e.tag.clone())
        .collect();
    let mut by_tag: BTreeMap<&str, bool> = BTreeMap::new();
    for e in &counted {
        *by_tag.entry(e.tag.as_str()).or_insert(false) |= e.pass;
    }
    let unresolved = by_tag.into_iter().filter(|(_, ok)| !ok).map(|(t, _)| t.to_string()).collect();
    (failing, unresolved)
}

/// Whether every defining equation holds at every point. An equation holds
/// when its literal form or its sign-corrected variant passes, so a known
/// sign slip does not hide the branch from the consequences.
fn branch_passes(gate: &[&Vec<PointResidual>], tol: &Tolerance) -> bool {
    gate.iter().all(|rs| {
        let mut by_tag: BTreeMap<&str, bool> = BTreeMap::new();
        for r in rs.iter() {
            let ok = r.outcome.as_ref().map_or(true, |m| m.passes(tol));
            *by_tag.entry(r.tag.as_str()).or_insert(false) |= ok;
        }
        by_tag.values().all(|&ok| ok)
    })
}

/// Entries with verdict flags for one convention.
fn finalize(per_point: &[Vec<PointResidual>], tol: &Tolerance, branch_ok: bool) -> Vec<Entry> {
    aggregate(per_point, tol)
        .into_iter()
        .map(|(mut e, branch)| {
            e.in_verdict = e.applicable && (!branch || branch_ok);
            e
        })
        .collect()
}

fn comparison(paper: &[Entry], standard: &[Entry]) -> Vec<ComparisonRow> {
    paper
        .iter()
        .filter_map(|p| {
            let s = standard.iter().find(|s| s.tag == p.tag && s.variant == p.variant)?;
            Some(ComparisonRow {
                tag: p.tag.clone(),
                variant: p.variant.clone(),
                paper_pass: p.pass,
                standard_pass: s.pass,
                paper_max_rel: p.max_rel,
                standard_max_rel: s.max_rel,
                agree: p.pass == s.pass,
            })
        })
        .collect()
}

fn metadata(start: Instant) -> Metadata {
    let timestamp_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Metadata {
        timestamp_unix,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
    }
}

fn check_config(cfg: &RunConfig) -> Result<(), VerifyError> {
    if cfg.points == 0 {
        return Err(VerifyError::Config("at least one sample point is required".into()));
    }
    if !(cfg.tol.rel > 0.0 && cfg.tol.abs > 0.0) {
        return Err(VerifyError::Config("tolerances must be positive".into()));
    }
    Ok(())
}

/// Runs a suite on a subject.
pub fn run(subject: &Subject, cfg: &RunConfig) -> Result<ResidualReport, VerifyError> {
    check_config(cfg)?;
    match subject {
        Subject::KaluzaKlein(spec) => run_kk(spec, cfg),
        Subject::Quaternionic(s) => run_qk(s, cfg),
    }
}

fn run_kk(spec: &KKSpec, cfg: &RunConfig) -> Result<ResidualReport, VerifyError> {
    let start = Instant::now();
    let validation = spec.validate(SPEC_VALIDATION_POINTS, cfg.seed)?;
    if !validation.passes() {
        return Err(VerifyError::Config(format!(
            "spec `{}` fails its Killing/closure validation: {validation:?}",
            spec.name
        )));
    }
    let convs = cfg.convention.conventions();
    let pts = spec.sample_points(cfg.points, cfg.seed);
    let outs: Vec<PointOut> = pts
        .par_iter()
        .map(|p| eval_kk_point(spec, p, cfg, &convs))
        .collect::<Result<_, _>>()?;

    let mut entries_by_conv = Vec::new();
    let mut branch_by_conv = Vec::new();
    for ci in 0..convs.len() {
        let per: Vec<Vec<PointResidual>> = outs.iter().map(|o| o.residuals[ci].clone()).collect();
        let gate: Vec<&Vec<PointResidual>> = outs.iter().map(|o| &o.gate[ci]).collect();
        let branch_ok = branch_passes(&gate, &cfg.tol);
        entries_by_conv.push(finalize(&per, &cfg.tol, branch_ok));
        branch_by_conv.push(branch_ok);
    }
    let mut entries = entries_by_conv[0].clone();
    let solution_branch = cfg.suite.has_branch().then_some(branch_by_conv[0]);

    let n = outs.len();
    let gbar_len = outs[0].scalars.gbar.len();
    let gbar_spread = (0..gbar_len)
        .map(|k| spread(outs.iter().map(|o| o.scalars.gbar[k])))
        .fold(0.0, f64::max);
    if gbar_spread > CONSTANCY_THRESHOLD {
        for e in entries.iter_mut().filter(|e| e.tag.starts_with("GBAR")) {
            e.note = Some(format!("𝗀_ab is not constant over the sample (spread {gbar_spread:e})"));
        }
    }
    let constancy = (cfg.suite != Suite::Reduction).then(|| {
        let r_ex = spread(outs.iter().map(|o| o.scalars.r_ex));
        let r_in = spread(outs.iter().map(|o| o.scalars.r_in));
        let f2 = spread(outs.iter().map(|o| o.scalars.f2));
        Constancy {
            r_ex,
            r_in,
            f2,
            gbar: gbar_spread,
            threshold: CONSTANCY_THRESHOLD,
            pass: [r_ex, r_in, f2, gbar_spread].iter().all(|&s| s <= CONSTANCY_THRESHOLD),
        }
    });

    let mut derived = BTreeMap::new();
    let mean = |f: &dyn Fn(&Scalars) -> f64| outs.iter().map(|o| f(&o.scalars)).sum::<f64>() / n as f64;
    derived.insert("R_ex".to_string(), mean(&|s| s.r_ex));
    derived.insert("R_in".to_string(), mean(&|s| s.r_in));
    derived.insert("F2".to_string(), mean(&|s| s.f2));
    let eig_min = outs
        .iter()
        .flat_map(|o| o.scalars.ricci_eigs.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let eig_max = outs
        .iter()
        .flat_map(|o| o.scalars.ricci_eigs.iter().copied())
        .fold(f64::NEG_INFINITY, f64::max);
    if eig_min.is_finite() {
        derived.insert("ext_ricci_eigenvalue_min".to_string(), eig_min);
        derived.insert("ext_ricci_eigenvalue_max".to_string(), eig_max);
    }
    let structure_scale = spec.structure.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    derived.insert("structure_constant_scale".to_string(), structure_scale);
    let f2 = derived["F2"];
    if f2 > system::F_ZERO {
        let cd = (spec.c() * spec.d()) as f64;
        derived.insert("normalized_structure_scale".to_string(), (cd / f2).sqrt() * structure_scale);
    }
    if cfg.suite.flatness() {
        let w = outs.iter().filter_map(|o| o.scalars.total_weyl).fold(0.0, f64::max);
        let c = outs.iter().filter_map(|o| o.scalars.total_cotton).fold(0.0, f64::max);
        derived.insert("max_total_weyl".to_string(), w);
        derived.insert("max_total_cotton".to_string(), c);
    }

    let comparison = (convs.len() == 2).then(|| comparison(&entries_by_conv[0], &entries_by_conv[1]));
    let (mut failing, unresolved) = verdict_lists(&entries);
    if let (Some(c), Some(true)) = (&constancy, solution_branch) {
        if !c.pass {
            failing.push("constancy".to_string());
        }
    }
    let body = ReportBody {
        suite: cfg.suite.name().to_string(),
        model: cfg.model.clone(),
        params: cfg.params.clone(),
        seed: cfg.seed,
        points: cfg.points,
        tolerance: cfg.tol,
        convention: cfg.convention.name().to_string(),
        sample_points: pts.iter().map(|p| p.concat()).collect(),
        solution_branch,
        entries,
        constancy,
        derived,
        comparison,
        verdict: Verdict {
            pass: failing.is_empty(),
            failing,
            unresolved,
        },
    };
    Ok(ResidualReport {
        schema_version: SCHEMA_VERSION,
        body,
        metadata: metadata(start),
    })
}

fn run_qk(s: &QKStructure, cfg: &RunConfig) -> Result<ResidualReport, VerifyError> {
    let start = Instant::now();
    if cfg.suite != Suite::Qk && cfg.suite != Suite::All {
        return Err(VerifyError::Config(format!(
            "suite `{}` needs a Kaluza-Klein model; `{}` only provides a quaternionic structure",
            cfg.suite.name(),
            cfg.model
        )));
    }
    let mut rng = XorShift64Star::new(cfg.seed);
    let domain = s.domain();
    let pts: Vec<Vec<f64>> = (0..cfg.points).map(|_| domain.sample(&mut rng)).collect();
    let per: Vec<Vec<PointResidual>> = pts
        .par_iter()
        .map(|x| QKData::from_structure(s, x).map(|q| eval_qk(&q)))
        .collect::<Result<_, _>>()?;
    // The structure's own identities are its definition, not consequences.
    let entries: Vec<Entry> = aggregate(&per, &cfg.tol)
        .into_iter()
        .map(|(mut e, _)| {
            e.in_verdict = e.applicable;
            e
        })
        .collect();
    let comparison = (cfg.convention == ConventionMode::Both).then(|| comparison(&entries, &entries));
    let (failing, unresolved) = verdict_lists(&entries);
    let mut derived = BTreeMap::new();
    derived.insert("k".to_string(), s.k);
    derived.insert("ricci_magnitude".to_string(), s.ricci_magnitude());
    derived.insert("scalar_magnitude".to_string(), s.scalar_magnitude());
    let body = ReportBody {
        suite: cfg.suite.name().to_string(),
        model: cfg.model.clone(),
        params: cfg.params.clone(),
        seed: cfg.seed,
        points: cfg.points,
        tolerance: cfg.tol,
        convention: cfg.convention.name().to_string(),
        sample_points: pts,
        solution_branch: None,
        entries,
        constancy: None,
        derived,
        comparison,
        verdict: Verdict {
            pass: failing.is_empty(),
            failing,
            unresolved,
        },
    };
    Ok(ResidualReport {
        schema_version: SCHEMA_VERSION,
        body,
        metadata: metadata(start),
    })
}
