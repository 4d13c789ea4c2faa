//! Dense tensors track the variance and block of every slot, and the
//! checked `einsum` refuses contractions that pair two lower indices.

use kkflat::tensor::linalg::invert;
use kkflat::tensor::{einsum, einsum_raw, Block, Bracket, DenseTensor, Slot};

fn main() {
    let n = 3;
    let ext = Block::External;
    // A constant positive-definite metric and its inverse.
    let g = DenseTensor::new(
        vec![Slot::down(n, ext); 2],
        vec![2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 1.5],
    )
    .unwrap();
    let gi = DenseTensor::new(vec![Slot::up(n, ext); 2], invert(n, g.comps()).unwrap()).unwrap();

    let v = DenseTensor::new(vec![Slot::up(n, ext)], vec![1.0, -2.0, 0.5]).unwrap();
    let v_low = einsum("ab,b->a", &[&g, &v]).unwrap();
    let norm = einsum("a,a->", &[&v, &v_low]).unwrap();
    println!("|v|² = {:.6}", norm.as_scalar());

    // Raising the index again recovers v.
    let back = v_low.raise_lower(0, &g, &gi).unwrap();
    println!("raise(lower(v)) − v = {:.1e}", back.max_abs_diff(&v));

    // g_{ab} g^{bc} = δ_a^c
    let delta = einsum("ab,bc->ac", &[&g, &gi]).unwrap();
    println!("g·g⁻¹ − 1 = {:.1e}", delta.max_abs_diff(&DenseTensor::identity(n, ext)));

    // Contracting two lower slots is refused by the checked form...
    match einsum("ab,ab->", &[&g, &g]) {
        Ok(_) => println!("unexpected: down-down contraction accepted"),
        Err(e) => println!("checked einsum: {e}"),
    }
    // ...and allowed when asked for explicitly.
    let frob = einsum_raw("ab,ab->", &[&g, &g]).unwrap();
    println!("Σ g_ab² = {:.4}", frob.as_scalar());

    // Antisymmetrization includes the ½.
    let t = v_low.outer(&DenseTensor::new(vec![Slot::down(n, ext)], vec![0.0, 1.0, 0.0]).unwrap());
    let a = t.brackets(0, 1, Bracket::Antisym).unwrap();
    println!("t_[01] = {:.4} = ½(t_01 − t_10) = {:.4}", a.get(&[0, 1]), 0.5 * (t.get(&[0, 1]) - t.get(&[1, 0])));
}
