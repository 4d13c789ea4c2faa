//! The quaternionic-Kähler equations on the shipped four-sphere, and how a
//! 1% rescaling of the complex structures shows up.

use kkflat::models::quaternionic_space_form;
use kkflat::verify::{run, RunConfig, Subject, Suite};

fn main() {
    for j_scale in [1.0, 1.01] {
        let s = quaternionic_space_form(4.0, 1.0).unwrap().with_j_scale(j_scale);
        let cfg = RunConfig::new(Suite::Qk, "qk-space-form");
        let rep = run(&Subject::Quaternionic(s), &cfg).unwrap();
        println!("J scaled by {j_scale}:");
        for e in &rep.body.entries {
            println!(
                "  {:<6} {:<15} max abs {:.2e}  max rel {:.2e}",
                e.tag,
                e.variant.as_deref().unwrap_or(""),
                e.max_abs,
                e.max_rel
            );
        }
    }
}
