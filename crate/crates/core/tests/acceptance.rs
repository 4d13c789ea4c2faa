//! Acceptance criteria 1–9, one PASS/FAIL line each.
//!
//! A criterion that fails only because a printed equation carries a sign or
//! index-order slip is reported as FAIL, with the evidence that the
//! corrected form holds. The target exits non-zero if any criterion fails in
//! any other way, so regressions still break `cargo test`.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use kkflat::geom::{cotton_weyl_sides, curvature_bundle, Convention, MetricField};
use kkflat::kk::{KKLocal, KKSpec};
use kkflat::models::{
    hopf_instanton_default, quaternionic_space_form, random_spec, random_squashed_spec, trivial_solution_spec,
    trivial_solution_with_external, ConstantCurvature, PolyMetric, SpaceKind, Chart,
};
use kkflat::rng::XorShift64Star;
use kkflat::verify::{run, ConventionMode, ResidualReport, RunConfig, Subject, Suite};

/// Outcome of one criterion.
struct Outcome {
    pass: bool,
    detail: String,
    /// Set when the criterion fails exactly on documented literal-form
    /// slips while every corrected form passes.
    slip: Option<String>,
}

impl Outcome {
    fn plain(pass: bool, detail: String) -> Outcome {
        Outcome { pass, detail, slip: None }
    }
}

fn max_weyl_cotton(m: &dyn MetricField, points: usize, rng: &mut XorShift64Star) -> (f64, f64) {
    let dom = m.domain();
    (0..points).fold((0.0f64, 0.0f64), |(w, c), _| {
        let b = curvature_bundle(m, &dom.sample(rng), Convention::Paper).expect("curvature");
        (w.max(b.max_weyl()), c.max(b.max_cotton()))
    })
}

fn total_weyl(spec: &KKSpec, points: usize, seed: u64) -> f64 {
    spec.sample_points(points, seed)
        .iter()
        .map(|p| {
            let geo = KKLocal::new(spec, p).unwrap().total_geometry().unwrap();
            geo.curvature().unwrap().weyl.unwrap().max_abs()
        })
        .fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = XorShift64Star::new(1);
    let (mut w, mut c) = (0.0f64, 0.0f64);
    for dim in 3..=7 {
        let unit = (dim * (dim - 1)) as f64;
        let spaces = [
            ConstantCurvature::flat(dim),
            ConstantCurvature::new(dim, unit, SpaceKind::Sphere, Chart::Stereographic).unwrap(),
            ConstantCurvature::new(dim, unit, SpaceKind::Hyperbolic, Chart::Stereographic).unwrap(),
        ];
        for s in &spaces {
            let (sw, sc) = max_weyl_cotton(s, 20, &mut rng);
            w = w.max(sw);
            c = c.max(sc);
        }
    }
    let t = start.elapsed().as_secs_f64();
    Outcome::plain(
        w <= 1e-10 && c <= 1e-9 && t < 10.0,
        format!("max Weyl {w:.1e} (≤ 1e-10), max Cotton {c:.1e} (≤ 1e-9), {t:.2} s (< 10 s)"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = XorShift64Star::new(2);
    let mut w = 0.0f64;
    let mut cotton = 0.0f64;
    for _ in 0..10 {
        let m = PolyMetric::random_perturbation(3, 3, 0.1, 0.5, &mut rng);
        let (sw, sc) = max_weyl_cotton(&m, 5, &mut rng);
        w = w.max(sw);
        cotton = cotton.max(sc);
    }
    Outcome::plain(
        w <= 1e-10,
        format!("max Weyl {w:.1e} (≤ 1e-10); Cotton stays generic, max {cotton:.1e}"),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = XorShift64Star::new(3);
    let (mut literal, mut cyclic) = (0.0f64, 0.0f64);
    for dim in [4, 5, 7] {
        for _ in 0..3 {
            let m = PolyMetric::random_perturbation(dim, 2, 0.1, 0.5, &mut rng);
            let p = m.domain().sample(&mut rng);
            let s = cotton_weyl_sides(&m, &p).unwrap();
            literal = literal.max(s.relative(&s.literal));
            cyclic = cyclic.max(s.relative(&s.cyclic));
        }
    }
    let pass = literal <= 1e-6;
    let detail = format!("written index order: rel {literal:.2e} (≤ 1e-6); cycled free indices: rel {cyclic:.2e}");
    let slip = (!pass && cyclic <= 1e-6).then(|| {
        "the divergence lands on the Cotton tensor with its free indices cycled (C_KIJ); \
         the written order compares different components"
            .to_string()
    });
    Outcome { pass, detail, slip }
}

fn criterion_4() -> Outcome {
    let tuned = total_weyl(&trivial_solution_spec(4, 3, -6.0).unwrap(), 20, 4);
    let detuned = total_weyl(&trivial_solution_with_external(4, 3, -6.0, 13.0).unwrap(), 20, 4);
    Outcome::plain(
        tuned <= 1e-8 && detuned >= 1e-3,
        format!("|R^ex| = 12: max Weyl {tuned:.1e} (≤ 1e-8); |R^ex| = 13: {detuned:.2e} (≥ 1e-3)"),
    )
}

fn flagship() -> (ResidualReport, f64) {
    let start = Instant::now();
    let mut cfg = RunConfig::new(Suite::All, "hopf-instanton");
    cfg.seed = 7;
    cfg.points = 20;
    let rep = run(&Subject::KaluzaKlein(hopf_instanton_default()), &cfg).expect("flagship run");
    (rep, start.elapsed().as_secs_f64())
}

/// Splits the literal entries of `tags` into failures and checks that each
/// failing one has a passing sign-corrected variant.
fn literal_failures(rep: &ResidualReport, prefixes: &[&str]) -> (BTreeSet<String>, bool) {
    let mut failing = BTreeSet::new();
    let mut corrected_ok = true;
    for e in &rep.body.entries {
        if e.variant.is_some() || !e.applicable || !prefixes.iter().any(|p| e.tag.starts_with(p)) {
            continue;
        }
        if !e.pass {
            failing.insert(e.tag.clone());
            corrected_ok &= rep.entry(&e.tag, Some("sign-corrected")).is_some_and(|c| c.pass);
        }
    }
    (failing, corrected_ok)
}

fn set(tags: &[&str]) -> BTreeSet<String> {
    tags.iter().map(|s| s.to_string()).collect()
}

fn criterion_5(rep: &ResidualReport, elapsed: f64) -> Outcome {
    let d = &rep.body.derived;
    let close = |k: &str, want: f64| (d[k].abs() - want).abs() <= 1e-9 * want;
    let chain = close("F2", 48.0)
        && close("R_ex", 48.0)
        && close("ext_ricci_eigenvalue_min", 12.0)
        && close("ext_ricci_eigenvalue_max", 12.0)
        && close("structure_constant_scale", 2.0)
        && close("normalized_structure_scale", 1.0);
    let weyl = d["max_total_weyl"];
    let (failing, corrected_ok) = literal_failures(rep, &["W-8", "C-9"]);
    let pass = failing.is_empty() && weyl <= 1e-7 && chain && elapsed < 60.0;
    let detail = format!(
        "F² {:.6}, R^ex {:.6}, Ricci eigenvalues [{:.6}, {:.6}], structure scale {:.6} \
         (normalized {:.6}); 7-dim Weyl {weyl:.1e} (≤ 1e-7); {elapsed:.1} s (< 60 s); \
         failing literal equations {failing:?}",
        d["F2"],
        d["R_ex"],
        d["ext_ricci_eigenvalue_min"],
        d["ext_ricci_eigenvalue_max"],
        d["structure_constant_scale"],
        d["normalized_structure_scale"],
    );
    let slip = (!pass && failing == set(&["W-8g", "C-9a"]) && corrected_ok && weyl <= 1e-7 && chain && elapsed < 60.0)
        .then(|| "W-8g and C-9a hold with the signs fixed by the internal Ricci identity".to_string());
    Outcome { pass, detail, slip }
}

fn criterion_6() -> Outcome {
    let qk_run = |j_scale: f64| {
        let s = quaternionic_space_form(4.0, 1.0).unwrap().with_j_scale(j_scale);
        let mut cfg = RunConfig::new(Suite::Qk, "qk-space-form");
        cfg.points = 20;
        run(&Subject::Quaternionic(s), &cfg).unwrap()
    };
    let rep = qk_run(1.0);
    let tags = ["QK-1a", "QK-1b", "QK-2a", "QK-2b", "QK-3a", "QK-3b"];
    let worst: Vec<(String, f64)> = tags
        .iter()
        .map(|t| (t.to_string(), rep.entry(t, None).unwrap().max_abs))
        .collect();
    let failing: BTreeSet<String> = worst.iter().filter(|(_, a)| *a > 1e-8).map(|(t, _)| t.clone()).collect();
    let corrected = rep.entry("QK-3b", Some("sign-corrected")).unwrap().max_abs;
    let trip = qk_run(1.01).entry("QK-1a", None).unwrap().max_abs;
    let pass = failing.is_empty() && trip >= 0.03;
    let detail = format!(
        "residuals {}; QK-3b sign-corrected {corrected:.1e}; J × 1.01 trips QK-1a by {trip:.3} (≥ 0.03)",
        worst.iter().map(|(t, a)| format!("{t} {a:.1e}")).collect::<Vec<_>>().join(", ")
    );
    let slip = (!pass && failing == set(&["QK-3b"]) && corrected <= 1e-8 && trip >= 0.03)
        .then(|| "the curvature term of QK-3b enters with the opposite sign".to_string());
    Outcome { pass, detail, slip }
}

const REDUCTION_SLIPS: [&str; 5] = ["A.Cmunukappa", "A.Cinukappa", "A.Cmunuk", "B.6th", "B.Ricci"];

fn reduction_run(spec: KKSpec, seed: u64) -> ResidualReport {
    let mut cfg = RunConfig::new(Suite::Reduction, spec.name.clone());
    cfg.points = 10;
    cfg.seed = seed;
    cfg.convention = ConventionMode::Paper;
    run(&Subject::KaluzaKlein(spec), &cfg).unwrap()
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut failing = BTreeSet::new();
    let mut corrected_ok = true;
    let mut worst_passing = 0.0f64;
    for seed in 1..=5u64 {
        let rep = reduction_run(random_spec(4, seed, 0.05, 0.5).unwrap(), seed);
        let (f, ok) = literal_failures(&rep, &["A.", "B."]);
        failing.extend(f);
        corrected_ok &= ok;
        for e in rep.body.entries.iter().filter(|e| e.applicable && e.pass) {
            worst_passing = worst_passing.max(e.max_abs);
        }
    }
    // Supplementary: a squashed fibre makes the terms that vanish on the
    // round sphere nonzero.
    let mut squashed_failing = BTreeSet::new();
    for seed in 1..=2u64 {
        let rep = reduction_run(random_squashed_spec(4, seed, 0.05, 0.5, [0.7, 1.0, 1.6]).unwrap(), seed);
        let (f, ok) = literal_failures(&rep, &["A.", "B."]);
        squashed_failing.extend(f);
        corrected_ok &= ok;
    }
    let t = start.elapsed().as_secs_f64();
    let pass = failing.is_empty() && t < 300.0;
    let detail = format!(
        "5 specs × 10 points, {t:.1} s (< 300 s); worst passing residual {worst_passing:.1e}; \
         failing literal formulas {failing:?}; squashed fibre fails the same set: {}",
        squashed_failing == failing
    );
    let slip = (!pass && failing == set(&REDUCTION_SLIPS) && squashed_failing == failing && corrected_ok && t < 300.0)
        .then(|| "every flagged formula matches the direct projection once its sign slip is corrected".to_string());
    Outcome { pass, detail, slip }
}

fn criterion_8() -> Outcome {
    let mut rng = XorShift64Star::new(8);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let e = common::Expr::random(3, 4, &mut rng);
        let p: Vec<f64> = (0..3).map(|_| rng.uniform(-0.8, 0.8)).collect();
        worst = worst.max(common::jet_vs_fd(&e, &p));
    }
    Outcome::plain(worst <= 1e-5, format!("100 expressions, 19 derivatives each: worst rel {worst:.1e} (≤ 1e-5)"))
}

fn criterion_9(first: &ResidualReport) -> Outcome {
    let (again, _) = flagship();
    let same = first.body_json() == again.body_json();
    Outcome::plain(same, format!("report body {} bytes, byte-identical: {same}", first.body_json().len()))
}

type Row = (u8, &'static str, Outcome, f64);

fn timed(results: &mut Vec<Row>, id: u8, title: &'static str, f: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let o = f();
    results.push((id, title, o, start.elapsed().as_secs_f64()));
}

fn main() {
    let mut results: Vec<Row> = Vec::new();
    timed(&mut results, 1, "analytic zeros of space forms", criterion_1);
    timed(&mut results, 2, "Weyl vanishes in three dimensions", criterion_2);
    timed(&mut results, 3, "Cotton–Weyl identity", criterion_3);
    timed(&mut results, 4, "trivial solution and its detuning", criterion_4);
    let (flag, flag_time) = flagship();
    timed(&mut results, 5, "main theorem on the Hopf instanton", || criterion_5(&flag, flag_time));
    results.last_mut().unwrap().3 += flag_time;
    timed(&mut results, 6, "quaternionic-Kähler structure", criterion_6);
    timed(&mut results, 7, "two-path reduction formulas", criterion_7);
    timed(&mut results, 8, "jet derivatives vs finite differences", criterion_8);
    timed(&mut results, 9, "determinism", || criterion_9(&flag));

    let mut unexpected = Vec::new();
    for (id, title, o, t) in &results {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id}: {verdict} — {title} ({t:.2} s) — {}", o.detail);
        if let Some(why) = &o.slip {
            println!("    documented slip: {why}");
        } else if !o.pass {
            unexpected.push(*id);
        }
    }
    let passed = results.iter().filter(|r| r.2.pass).count();
    println!("{passed}/{} criteria pass", results.len());
    if !unexpected.is_empty() {
        eprintln!("criteria failing beyond the documented slips: {unexpected:?}");
        std::process::exit(1);
    }
}
