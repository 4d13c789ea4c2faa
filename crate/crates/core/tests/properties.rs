//! Property-based invariants across the jet, tensor, geometry and
//! Kaluza-Klein layers.

mod common;

use kkflat::geom::{curvature_bundle, Convention, MetricField};
use kkflat::kk::{assemble_metric, KKPoint};
use kkflat::models::{random_spec, PolyMetric};
use kkflat::rng::XorShift64Star;
use kkflat::tensor::{einsum, einsum_raw, Block, Bracket, DenseTensor, Slot};
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn tensor3(n: usize, comps: &[f64]) -> DenseTensor {
    DenseTensor::new(
        vec![Slot::up(n, Block::External), Slot::down(n, Block::External), Slot::down(n, Block::External)],
        comps[..n * n * n].to_vec(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn jets_match_finite_differences(seed in any::<u64>(), x in -0.8f64..0.8, y in -0.8f64..0.8) {
        let mut rng = XorShift64Star::new(seed);
        let e = common::Expr::random(2, 3, &mut rng);
        let err = common::jet_vs_fd(&e, &[x, y]);
        prop_assert!(err < 1e-5, "{e:?} at ({x}, {y}): {err:e}");
    }

    #[test]
    fn permutation_round_trips(comps in prop::collection::vec(-5.0f64..5.0, 27)) {
        let t = tensor3(3, &comps);
        let p = t.permute(&[2, 0, 1]).unwrap();
        // Output slot k is input slot order[k], so (1 2 0) undoes (2 0 1).
        let back = p.permute(&[1, 2, 0]).unwrap();
        prop_assert_eq!(back.comps(), t.comps());
        for i in 0..3 { for j in 0..3 { for k in 0..3 {
            prop_assert_eq!(p.get(&[i, j, k]), t.get(&[j, k, i]));
        }}}
    }

    #[test]
    fn bracket_parts_sum_to_the_tensor(comps in prop::collection::vec(-5.0f64..5.0, 27)) {
        let t = tensor3(3, &comps);
        let s = t.brackets(1, 2, Bracket::Sym).unwrap();
        let a = t.brackets(1, 2, Bracket::Antisym).unwrap();
        prop_assert!(s.plus(&a).max_abs_diff(&t) < 1e-14);
        prop_assert!(a.plus(&a.permute(&[0, 2, 1]).unwrap()).max_abs() < 1e-14);
    }

    #[test]
    fn contraction_agrees_with_einsum(comps in prop::collection::vec(-5.0f64..5.0, 27)) {
        let t = tensor3(3, &comps);
        let c = t.contract(0, 1).unwrap();
        let e = einsum("aab->b", &[&t]).unwrap();
        prop_assert!(c.max_abs_diff(&e) < 1e-13);
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn riemann_symmetries_and_weyl_tracelessness(seed in any::<u64>(), dim in 3usize..6) {
        let mut rng = XorShift64Star::new(seed);
        let m = PolyMetric::random_perturbation(dim, 2, 0.1, 0.5, &mut rng);
        let p = m.domain().sample(&mut rng);
        let b = curvature_bundle(&m, &p, Convention::Standard).unwrap();
        let r = &b.riemann_lowered;
        let scale = r.max_abs().max(1e-12);
        // pair antisymmetry, pair exchange, first Bianchi
        prop_assert!(r.plus(&r.permute(&[1, 0, 2, 3]).unwrap()).max_abs() < 1e-12 * scale.max(1.0));
        prop_assert!(r.minus(&r.permute(&[2, 3, 0, 1]).unwrap()).max_abs() < 1e-12 * scale.max(1.0));
        let cyc = r.plus(&r.permute(&[0, 2, 3, 1]).unwrap()).plus(&r.permute(&[0, 3, 1, 2]).unwrap());
        prop_assert!(cyc.max_abs() < 1e-12 * scale.max(1.0));
        let w = b.weyl.as_ref().unwrap();
        let gi = &b.inverse_metric;
        // every trace of the Weyl tensor vanishes
        let tr = einsum_raw("abcd,ac->bd", &[w, gi]).unwrap();
        prop_assert!(tr.max_abs() < 1e-11 * scale.max(1.0), "{:e}", tr.max_abs());
        for expr in ["abcd,bd->ac", "abcd,ad->bc", "abcd,bc->ad"] {
            let tr = einsum_raw(expr, &[w, gi]).unwrap();
            prop_assert!(tr.max_abs() < 1e-11 * scale.max(1.0), "{expr}: {:e}", tr.max_abs());
        }
    }

    #[test]
    fn assembled_metric_is_symmetric_positive(seed in 0u64..1000) {
        let spec = random_spec(4, seed, 0.05, 0.5).unwrap();
        let p: KKPoint = spec.sample_points(1, seed)[0].clone();
        let g = assemble_metric(&spec, &p).unwrap();
        let n = spec.total_dim();
        for i in 0..n { for j in 0..n {
            prop_assert!((g.get(&[i, j]) - g.get(&[j, i])).abs() < 1e-14);
        }}
        let ev = kkflat::tensor::linalg::symmetric_eigenvalues(n, g.comps());
        prop_assert!(ev.iter().all(|e| *e > 0.0), "{ev:?}");
    }

    #[test]
    fn random_specs_pass_killing_validation(seed in 0u64..1000) {
        let spec = random_spec(4, seed, 0.05, 0.5).unwrap();
        prop_assert!(spec.validate(4, seed).unwrap().passes());
    }
}

#[test]
fn sampling_is_reproducible() {
    let spec = random_spec(4, 11, 0.05, 0.5).unwrap();
    let a = spec.sample_points(5, 3);
    let b = spec.sample_points(5, 3);
    assert_eq!(a, b);
    let mut r1 = XorShift64Star::new(42);
    let mut r2 = XorShift64Star::new(42);
    assert!((0..100).all(|_| r1.next_u64() == r2.next_u64()));
}
