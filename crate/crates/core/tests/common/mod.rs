//! Helpers shared by the integration test targets.

#![allow(dead_code)]

use kkflat::jet::Jet3;
use kkflat::rng::XorShift64Star;

/// Random composite expression in a few variables. Every node keeps the
/// value bounded on `[−1, 1]^n` so finite differences stay well conditioned.
#[derive(Debug, Clone)]
pub enum Expr {
    Var(usize),
    Const(f64),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    /// `a / (1 + b²)`
    DivSoft(Box<Expr>, Box<Expr>),
    /// `exp(a / 2)`
    ExpHalf(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Atan(Box<Expr>),
    /// `ln(1 + a²)`
    LnSoft(Box<Expr>),
    /// `√(1 + a²)`
    SqrtSoft(Box<Expr>),
    Cube(Box<Expr>),
}

impl Expr {
    pub fn random(vars: usize, depth: u32, rng: &mut XorShift64Star) -> Expr {
        let pick = |rng: &mut XorShift64Star, n: u64| (rng.next_u64() % n) as usize;
        if depth == 0 || pick(rng, 5) == 0 {
            return if pick(rng, 4) == 0 {
                Expr::Const(rng.uniform(-1.5, 1.5))
            } else {
                Expr::Var(pick(rng, vars as u64))
            };
        }
        let mut sub = || Box::new(Expr::random(vars, depth - 1, rng));
        let (a, b) = (sub(), sub());
        match pick(rng, 11) {
            0 => Expr::Add(a, b),
            1 => Expr::Sub(a, b),
            2 | 3 => Expr::Mul(a, b),
            4 => Expr::DivSoft(a, b),
            5 => Expr::ExpHalf(a),
            6 => Expr::Sin(a),
            7 => Expr::Cos(a),
            8 => Expr::Atan(a),
            9 => Expr::LnSoft(a),
            _ => {
                if pick(rng, 2) == 0 {
                    Expr::SqrtSoft(a)
                } else {
                    Expr::Cube(a)
                }
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Var(i) => x[*i],
            Expr::Const(c) => *c,
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::DivSoft(a, b) => {
                let bv = b.eval(x);
                a.eval(x) / (1.0 + bv * bv)
            }
            Expr::ExpHalf(a) => (0.5 * a.eval(x)).exp(),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::Atan(a) => a.eval(x).atan(),
            Expr::LnSoft(a) => {
                let v = a.eval(x);
                (1.0 + v * v).ln()
            }
            Expr::SqrtSoft(a) => {
                let v = a.eval(x);
                (1.0 + v * v).sqrt()
            }
            Expr::Cube(a) => a.eval(x).powi(3),
        }
    }

    pub fn eval_jet(&self, x: &[Jet3]) -> Jet3 {
        match self {
            Expr::Var(i) => x[*i].clone(),
            Expr::Const(c) => x[0].constant_like(*c),
            Expr::Add(a, b) => a.eval_jet(x) + b.eval_jet(x),
            Expr::Sub(a, b) => a.eval_jet(x) - b.eval_jet(x),
            Expr::Mul(a, b) => a.eval_jet(x) * b.eval_jet(x),
            Expr::DivSoft(a, b) => {
                let bv = b.eval_jet(x);
                a.eval_jet(x) / (1.0 + &bv * &bv)
            }
            Expr::ExpHalf(a) => a.eval_jet(x).scale(0.5).exp(),
            Expr::Sin(a) => a.eval_jet(x).sin(),
            Expr::Cos(a) => a.eval_jet(x).cos(),
            Expr::Atan(a) => a.eval_jet(x).atan(),
            Expr::LnSoft(a) => {
                let v = a.eval_jet(x);
                (1.0 + &v * &v).ln()
            }
            Expr::SqrtSoft(a) => {
                let v = a.eval_jet(x);
                (1.0 + &v * &v).sqrt()
            }
            Expr::Cube(a) => a.eval_jet(x).powi(3),
        }
    }
}

/// Every non-decreasing index list of length 1..=3 over `vars` variables.
pub fn derivative_indices(vars: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for i in 0..vars {
        out.push(vec![i]);
        for j in i..vars {
            out.push(vec![i, j]);
            for k in j..vars {
                out.push(vec![i, j, k]);
            }
        }
    }
    out
}

/// Central-difference stencil for the `n`-th derivative (n ≤ 3), second
/// order accurate: `(offset in units of h, weight)` with the `1/hⁿ` factor
/// left out.
fn stencil(n: usize) -> &'static [(f64, f64)] {
    match n {
        0 => &[(0.0, 1.0)],
        1 => &[(1.0, 0.5), (-1.0, -0.5)],
        2 => &[(1.0, 1.0), (0.0, -2.0), (-1.0, 1.0)],
        3 => &[(2.0, 0.5), (1.0, -1.0), (-1.0, 1.0), (-2.0, -0.5)],
        _ => unreachable!("order ≤ 3"),
    }
}

fn tensor_difference(f: &dyn Fn(&[f64]) -> f64, p: &[f64], counts: &[usize], h: f64) -> f64 {
    // Tensor product of the one-dimensional stencils.
    let mut terms: Vec<(Vec<f64>, f64)> = vec![(p.to_vec(), 1.0)];
    let mut order = 0;
    for (var, &n) in counts.iter().enumerate() {
        order += n;
        let mut next = Vec::new();
        for (pt, w) in &terms {
            for &(off, sw) in stencil(n) {
                let mut q = pt.clone();
                q[var] += off * h;
                next.push((q, w * sw));
            }
        }
        terms = next;
    }
    terms.iter().map(|(q, w)| w * f(q)).sum::<f64>() / h.powi(order as i32)
}

/// Mixed partial derivative by central differences with one Richardson
/// step, accurate to `O(h⁴)`.
pub fn finite_difference(f: &dyn Fn(&[f64]) -> f64, p: &[f64], indices: &[usize], h: f64) -> f64 {
    let mut counts = vec![0usize; p.len()];
    for &i in indices {
        counts[i] += 1;
    }
    let coarse = tensor_difference(f, p, &counts, h);
    let fine = tensor_difference(f, p, &counts, h / 2.0);
    (4.0 * fine - coarse) / 3.0
}

/// Worst relative disagreement between jet derivatives of `e` at `p` and
/// finite differences; derivatives below unit size are compared absolutely.
pub fn jet_vs_fd(e: &Expr, p: &[f64]) -> f64 {
    let jets = Jet3::seed_point(p).expect("seedable point");
    let v = e.eval_jet(&jets);
    let f = |x: &[f64]| e.eval(x);
    derivative_indices(p.len())
        .iter()
        .map(|idx| {
            let d = v.derivative(idx);
            let fd = finite_difference(&f, p, idx, 0.005);
            (d - fd).abs() / d.abs().max(1.0)
        })
        .fold(0.0, f64::max)
}
