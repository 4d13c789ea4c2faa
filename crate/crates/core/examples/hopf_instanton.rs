//! The flagship configuration: the quaternionic four-sphere (k = 4) with the
//! one-instanton connection over the unit S³. Runs every suite and prints
//! the derived scalar chain and the failing equations.

use kkflat::models::hopf_instanton_default;
use kkflat::verify::{run, RunConfig, Subject, Suite};

fn main() {
    let spec = hopf_instanton_default();
    let mut cfg = RunConfig::new(Suite::All, "hopf-instanton");
    cfg.seed = 7;
    let report = run(&Subject::KaluzaKlein(spec), &cfg).expect("run succeeds");
    let body = &report.body;

    println!("solution branch: {:?}", body.solution_branch);
    for (k, v) in &body.derived {
        println!("  {k:<28} {v:+.10}");
    }
    println!("\n{:<16} {:<15} {:>10} {:>6}", "tag", "variant", "max rel", "pass");
    for e in body.entries.iter().filter(|e| e.applicable) {
        println!(
            "{:<16} {:<15} {:>10.2e} {:>6}",
            e.tag,
            e.variant.as_deref().unwrap_or(""),
            e.max_rel,
            e.pass
        );
    }
    println!("\nfailing as printed: {:?}", body.verdict.failing);
    println!("failing in every reading: {:?}", body.verdict.unresolved);
    println!("elapsed {:.2} s", report.metadata.elapsed_seconds);
}
