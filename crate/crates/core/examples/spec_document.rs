//! Kaluza-Klein specs can be written as JSON. The same instanton over the
//! round and over a squashed fibre: only the first is conformally flat.

use kkflat::kk::parse_spec;
use kkflat::verify::{run, RunConfig, Subject, Suite};

fn document(name: &str, internal: &str) -> String {
    format!(
        r#"{{"custom": {{
            "name": "{name}",
            "external": {{"named": {{"name": "qk-space-form", "params": {{"k": 4.0}}}}}},
            "internal": {{"named": {internal}}},
            "killing": {{"s3": {{"radius": 1.0}}}},
            "gauge": {{"instanton": {{"k": 4.0}}}},
            "structure": {{"su2": 2.0}}
        }}}}"#
    )
}

fn main() {
    for (name, internal) in [
        ("round fibre", r#"{"name": "s3-frame"}"#),
        ("squashed fibre", r#"{"name": "berger", "params": {"lambda1": 1.0, "lambda2": 1.0, "lambda3": 1.2}}"#),
    ] {
        let spec = parse_spec(&document(name, internal)).expect("valid document");
        let v = spec.validate(10, 0).unwrap();
        let mut cfg = RunConfig::new(Suite::Flatness, spec.name.clone());
        cfg.points = 4;
        let rep = run(&Subject::KaluzaKlein(spec), &cfg).unwrap();
        println!("{}", rep.body.model);
        println!("  Killing residual {:.1e}, closure {:.1e}", v.max_killing, v.max_commutator);
        println!("  max total Weyl   {:.2e}", rep.body.derived["max_total_weyl"]);
    }
}
