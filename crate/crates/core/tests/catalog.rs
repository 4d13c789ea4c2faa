//! Every catalog model satisfies its own declared invariants at 50 seeded
//! points.

use clap::Parser;
use kkflat::cli::{execute, Cli};
use kkflat::models::{catalog, kk_model, qk_structure_model, Params, Provides};
use kkflat::verify::{run, RunConfig, Subject, Suite};

const POINTS: &str = "50";

fn curvature(model: &str) -> serde_json::Value {
    let cli = Cli::try_parse_from(["kkflat", "curvature", "--model", model, "--points", POINTS, "--seed", "5"]).unwrap();
    let out = execute(&cli).unwrap_or_else(|e| panic!("{model}: {e}"));
    let v: serde_json::Value = serde_json::from_str(&out.json).unwrap();
    assert!(out.pass, "{model}: {}", v["body"]["invariants"]);
    v["body"].clone()
}

#[test]
fn metric_models_pass_declared_invariants() {
    for desc in catalog() {
        if desc.provides.contains(&Provides::Metric) {
            let b = curvature(&desc.name);
            assert!(!b["invariants"].as_array().unwrap().is_empty(), "{} declares nothing", desc.name);
        }
    }
}

#[test]
fn kaluza_klein_models_validate_and_solutions_are_flat() {
    for desc in catalog() {
        if !desc.provides.contains(&Provides::KkSpec) {
            continue;
        }
        let spec = kk_model(&desc.name, &Params::new()).unwrap();
        let v = spec.validate(50, 5).unwrap();
        assert!(v.passes(), "{}: {v:?}", desc.name);
        if matches!(desc.name.as_str(), "trivial-solution" | "hopf-instanton") {
            let b = curvature(&desc.name);
            let weyl = b["invariants"].as_array().unwrap().iter().find(|i| i["name"] == "weyl").unwrap();
            assert!(weyl["observed"].as_f64().unwrap() <= 1e-7);
        }
    }
}

#[test]
fn quaternionic_model_satisfies_structure_equations() {
    let s = qk_structure_model("qk-space-form", &Params::new()).unwrap();
    let mut cfg = RunConfig::new(Suite::Qk, "qk-space-form");
    cfg.points = 50;
    let rep = run(&Subject::Quaternionic(s), &cfg).unwrap();
    for tag in ["QK-1a", "QK-1b", "QK-2a", "QK-2b"] {
        let e = rep.entry(tag, None).unwrap();
        assert!(e.max_abs <= 1e-8, "{tag}: {}", e.max_abs);
    }
}

#[test]
fn cotton_weyl_identity_holds_on_assembled_total_spaces() {
    use kkflat::geom::cotton_weyl_sides_of;
    use kkflat::kk::KKLocal;
    use kkflat::models::{random_spec, random_squashed_spec};
    for spec in [
        random_spec(4, 11, 0.05, 0.5).unwrap(),
        random_squashed_spec(4, 12, 0.05, 0.5, [0.7, 1.0, 1.6]).unwrap(),
    ] {
        for p in spec.sample_points(2, 3) {
            let geo = KKLocal::new(&spec, &p).unwrap().total_geometry().unwrap();
            let s = cotton_weyl_sides_of(&geo).unwrap();
            assert!(s.cotton.max_abs() > 1e-4, "{}: Cotton is degenerate", spec.name);
            assert!(s.relative(&s.cyclic) < 1e-8, "{}: {:e}", spec.name, s.relative(&s.cyclic));
        }
    }
}
