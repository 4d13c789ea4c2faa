//! Index-notation contraction of several tensors, e.g. `"ab,bc->ac"`.
//!
//! In checked mode every summed label must appear exactly twice, once on an
//! up slot and once on a down slot of compatible blocks. That turns most index
//! placement mistakes in long formulas into errors instead of wrong numbers.

use super::{strides, DenseTensor, Scalar, Slot, TensorError};

struct Parsed {
    inputs: Vec<Vec<char>>,
    output: Vec<char>,
}

fn parse(expr: &str, n_inputs: usize) -> Result<Parsed, TensorError> {
    let bad = |reason: &str| TensorError::BadEinsum {
        expr: expr.to_string(),
        reason: reason.to_string(),
    };
    let (lhs, rhs) = expr.split_once("->").ok_or_else(|| bad("missing `->`"))?;
    let inputs: Vec<Vec<char>> = lhs
        .split(',')
        .map(|s| s.trim().chars().collect())
        .collect();
    if inputs.len() != n_inputs {
        return Err(bad(&format!(
            "{} operand specs for {} tensors",
            inputs.len(),
            n_inputs
        )));
    }
    let output: Vec<char> = rhs.trim().chars().collect();
    Ok(Parsed { inputs, output })
}

/// Checked contraction; the zero prototype is taken from the first non-empty input.
pub fn einsum<S: Scalar>(
    expr: &str,
    inputs: &[&DenseTensor<S>],
) -> Result<DenseTensor<S>, TensorError> {
    run(expr, inputs, true, None)
}

/// Checked contraction with an explicit zero prototype (needed when some
/// slots have dimension zero).
pub fn einsum_in<S: Scalar>(
    expr: &str,
    inputs: &[&DenseTensor<S>],
    proto: &S,
) -> Result<DenseTensor<S>, TensorError> {
    run(expr, inputs, true, Some(proto))
}

/// Contraction without variance or block checks.
pub fn einsum_raw<S: Scalar>(
    expr: &str,
    inputs: &[&DenseTensor<S>],
) -> Result<DenseTensor<S>, TensorError> {
    run(expr, inputs, false, None)
}

fn run<S: Scalar>(
    expr: &str,
    inputs: &[&DenseTensor<S>],
    checked: bool,
    proto: Option<&S>,
) -> Result<DenseTensor<S>, TensorError> {
    let bad = |reason: String| TensorError::BadEinsum {
        expr: expr.to_string(),
        reason,
    };
    let parsed = parse(expr, inputs.len())?;

    // Collect every occurrence of each label.
    let mut labels: Vec<char> = Vec::new();
    let mut occurrences: Vec<Vec<(usize, usize)>> = Vec::new();
    for (t, spec) in parsed.inputs.iter().enumerate() {
        if spec.len() != inputs[t].rank() {
            return Err(bad(format!(
                "operand {t} has rank {} but spec `{}`",
                inputs[t].rank(),
                spec.iter().collect::<String>()
            )));
        }
        for (k, &c) in spec.iter().enumerate() {
            match labels.iter().position(|&l| l == c) {
                Some(p) => occurrences[p].push((t, k)),
                None => {
                    labels.push(c);
                    occurrences.push(vec![(t, k)]);
                }
            }
        }
    }

    let slot_of = |t: usize, k: usize| -> Slot { inputs[t].slots()[k] };
    let mut dims = Vec::with_capacity(labels.len());
    for (p, &c) in labels.iter().enumerate() {
        let occ = &occurrences[p];
        let d = slot_of(occ[0].0, occ[0].1).dim;
        if occ.iter().any(|&(t, k)| slot_of(t, k).dim != d) {
            return Err(bad(format!("label `{c}` has inconsistent dimensions")));
        }
        dims.push(d);
        let in_output = parsed.output.contains(&c);
        if in_output {
            if occ.len() != 1 {
                return Err(bad(format!("output label `{c}` repeated in inputs")));
            }
        } else if checked {
            if occ.len() != 2 {
                return Err(bad(format!(
                    "summed label `{c}` appears {} times",
                    occ.len()
                )));
            }
            let (a, b) = (slot_of(occ[0].0, occ[0].1), slot_of(occ[1].0, occ[1].1));
            if a.variance == b.variance {
                return Err(bad(format!(
                    "summed label `{c}` pairs two {:?} slots",
                    a.variance
                )));
            }
            if !a.block.compatible(b.block) {
                return Err(bad(format!(
                    "summed label `{c}` pairs {:?} with {:?}",
                    a.block, b.block
                )));
            }
        } else if occ.len() < 2 {
            return Err(bad(format!("label `{c}` is neither output nor summed")));
        }
    }

    let mut out_slots = Vec::with_capacity(parsed.output.len());
    for &c in &parsed.output {
        let p = labels
            .iter()
            .position(|&l| l == c)
            .ok_or_else(|| bad(format!("output label `{c}` not in inputs")))?;
        let (t, k) = occurrences[p][0];
        out_slots.push(slot_of(t, k));
    }
    let mut seen = parsed.output.clone();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != parsed.output.len() {
        return Err(bad("repeated output label".into()));
    }

    // Label order for iteration: output labels first (row-major), then sums.
    let mut order: Vec<usize> = parsed
        .output
        .iter()
        .map(|&c| labels.iter().position(|&l| l == c).unwrap())
        .collect();
    for p in 0..labels.len() {
        if !order.contains(&p) {
            order.push(p);
        }
    }
    let n_out = parsed.output.len();

    // Per input, the stride attached to each label in iteration order.
    let in_strides: Vec<Vec<usize>> = inputs
        .iter()
        .enumerate()
        .map(|(t, tensor)| {
            let st = strides(tensor.slots());
            order
                .iter()
                .map(|&p| {
                    occurrences[p]
                        .iter()
                        .filter(|&&(tt, _)| tt == t)
                        .map(|&(_, k)| st[k])
                        .sum()
                })
                .collect()
        })
        .collect();

    let proto = match proto {
        Some(p) => p.zero_like(),
        None => match inputs.iter().find_map(|t| t.comps().first()) {
            Some(p) => p.zero_like(),
            None => {
                let n: usize = out_slots.iter().map(|s| s.dim).product();
                if n == 0 {
                    return DenseTensor::new(out_slots, Vec::new());
                }
                return Err(bad("cannot infer a zero component from empty operands".into()));
            }
        },
    };

    let iter_dims: Vec<usize> = order.iter().map(|&p| dims[p]).collect();
    let out_len: usize = iter_dims[..n_out].iter().product();
    let sum_len: usize = iter_dims[n_out..].iter().product();
    let mut comps = vec![proto.clone(); out_len];
    if sum_len == 0 || out_len == 0 {
        return DenseTensor::new(out_slots, comps);
    }

    let n_in = inputs.len();
    let n_all = order.len();
    let mut idx = vec![0usize; n_all];
    let mut base = vec![0usize; n_in];
    let mut offs = vec![0usize; n_in];
    for (o_lin, out) in comps.iter_mut().enumerate() {
        let mut rem = o_lin;
        for k in (0..n_out).rev() {
            idx[k] = rem % iter_dims[k];
            rem /= iter_dims[k];
        }
        for t in 0..n_in {
            base[t] = (0..n_out).map(|k| idx[k] * in_strides[t][k]).sum();
        }
        for s_lin in 0..sum_len {
            let mut rem = s_lin;
            for k in (n_out..n_all).rev() {
                idx[k] = rem % iter_dims[k];
                rem /= iter_dims[k];
            }
            for t in 0..n_in {
                offs[t] = base[t]
                    + (n_out..n_all)
                        .map(|k| idx[k] * in_strides[t][k])
                        .sum::<usize>();
            }
            match n_in {
                1 => out.add_assign(&inputs[0].comps()[offs[0]]),
                2 => out.add_assign_product(
                    &inputs[0].comps()[offs[0]],
                    &inputs[1].comps()[offs[1]],
                ),
                _ => {
                    let mut acc = inputs[0].comps()[offs[0]].mul(&inputs[1].comps()[offs[1]]);
                    for t in 2..n_in - 1 {
                        acc = acc.mul(&inputs[t].comps()[offs[t]]);
                    }
                    out.add_assign_product(&acc, &inputs[n_in - 1].comps()[offs[n_in - 1]]);
                }
            }
        }
    }
    DenseTensor::new(out_slots, comps)
}
