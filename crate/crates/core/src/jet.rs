//! Truncated multivariate Taylor arithmetic through third order.
//!
//! A [`Jet3`] carries the Taylor coefficients of a smooth function around a
//! chart point, in all `dim` chart variables, up to total degree three. The
//! coefficient of `h^α` is stored (not the derivative), so multiplication is a
//! plain truncated convolution driven by a precomputed table that is shared
//! between every jet of the same dimension.
//!
//! Each jet also records the highest degree at which its coefficients are
//! exact. Seeds and constants are exact through degree three; taking a partial
//! derivative lowers that by one, and every operation keeps the minimum of its
//! inputs. This lets the curvature code differentiate metrics three times
//! without ever reading a coefficient that has been truncated away.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use thiserror::Error;

/// Truncation order of every jet.
pub const ORDER: usize = 3;

/// Largest supported number of chart variables.
pub const MAX_DIM: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("variable index {index} out of range for {dim} chart variables")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("unsupported jet dimension {0} (expected 1..={MAX_DIM})")]
    BadDimension(usize),
    #[error("jet dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("division by a jet with zero value")]
    DivisionByZero,
    #[error("{function} is not defined at {value}")]
    Domain { function: &'static str, value: f64 },
    #[error("derivative of order {requested} requested from a jet exact only to order {available}")]
    OrderExhausted { requested: usize, available: usize },
}

/// Binary operations exposed through [`Jet3::arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arith {
    Add,
    Sub,
    Mul,
    Div,
}

/// Elementary functions exposed through [`Jet3::elementary`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementary {
    Sqrt,
    Exp,
    Ln,
    Sin,
    Cos,
    Atan,
    PowInt(i32),
    Reciprocal,
}

/// Monomial bookkeeping and the multiplication table for one dimension.
pub struct JetLayout {
    dim: usize,
    /// Sorted variable lists, graded by degree.
    monomials: Vec<Vec<u8>>,
    /// `count[k]` = number of monomials of degree ≤ k.
    count: [usize; ORDER + 1],
    index: HashMap<Vec<u8>, usize>,
    /// `(a, b, out)` triples sorted by the degree of `out`.
    mul_table: Vec<(u32, u32, u32)>,
    /// Number of table entries whose output degree is ≤ k.
    mul_end: [usize; ORDER + 1],
    /// Per variable: `(source, target, multiplicity)` for ∂_i h^α = α_i h^(α - e_i).
    partial: Vec<Vec<(u32, u32, f64)>>,
    /// α! for every monomial.
    factorial: Vec<f64>,
}

impl fmt::Debug for JetLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetLayout")
            .field("dim", &self.dim)
            .field("len", &self.monomials.len())
            .finish()
    }
}

impl JetLayout {
    fn build(dim: usize) -> JetLayout {
        let mut monomials: Vec<Vec<u8>> = vec![Vec::new()];
        let mut count = [0usize; ORDER + 1];
        count[0] = 1;
        let mut previous: Vec<Vec<u8>> = vec![Vec::new()];
        for (deg, slot) in count.iter_mut().enumerate().skip(1) {
            let mut next = Vec::new();
            for m in &previous {
                let start = m.last().copied().unwrap_or(0) as usize;
                for v in start..dim {
                    let mut n = m.clone();
                    n.push(v as u8);
                    next.push(n);
                }
            }
            monomials.extend(next.iter().cloned());
            *slot = monomials.len();
            debug_assert!(next.iter().all(|m| m.len() == deg));
            previous = next;
        }
        let index: HashMap<Vec<u8>, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();

        let mut mul_table = Vec::new();
        for (ia, a) in monomials.iter().enumerate() {
            for (ib, b) in monomials.iter().enumerate() {
                if a.len() + b.len() > ORDER {
                    continue;
                }
                let mut merged: Vec<u8> = a.iter().chain(b.iter()).copied().collect();
                merged.sort_unstable();
                let io = index[&merged];
                mul_table.push((ia as u32, ib as u32, io as u32));
            }
        }
        mul_table.sort_by_key(|&(_, _, o)| (monomials[o as usize].len(), o));
        let mut mul_end = [0usize; ORDER + 1];
        for (k, end) in mul_end.iter_mut().enumerate() {
            *end = mul_table
                .iter()
                .take_while(|&&(_, _, o)| monomials[o as usize].len() <= k)
                .count();
        }

        let mut partial = vec![Vec::new(); dim];
        for (src, m) in monomials.iter().enumerate() {
            for (var, list) in partial.iter_mut().enumerate() {
                let mult = m.iter().filter(|&&v| v as usize == var).count();
                if mult == 0 {
                    continue;
                }
                let mut reduced = m.clone();
                let pos = reduced.iter().position(|&v| v as usize == var).unwrap();
                reduced.remove(pos);
                list.push((src as u32, index[&reduced] as u32, mult as f64));
            }
        }
        for list in &mut partial {
            list.sort_by_key(|&(_, t, _)| t);
        }

        let factorial = monomials
            .iter()
            .map(|m| {
                let mut f = 1.0;
                let mut i = 0;
                while i < m.len() {
                    let mut j = i;
                    while j < m.len() && m[j] == m[i] {
                        j += 1;
                    }
                    f *= (1..=(j - i)).product::<usize>() as f64;
                    i = j;
                }
                f
            })
            .collect();

        JetLayout {
            dim,
            monomials,
            count,
            index,
            mul_table,
            mul_end,
            partial,
            factorial,
        }
    }

    /// Shared layout for `dim` chart variables.
    pub fn get(dim: usize) -> Result<Arc<JetLayout>, JetError> {
        static LAYOUTS: [OnceLock<Arc<JetLayout>>; MAX_DIM + 1] =
            [const { OnceLock::new() }; MAX_DIM + 1];
        if dim == 0 || dim > MAX_DIM {
            return Err(JetError::BadDimension(dim));
        }
        Ok(LAYOUTS[dim]
            .get_or_init(|| Arc::new(JetLayout::build(dim)))
            .clone())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of coefficients of total degree ≤ `order`, i.e. C(dim+order, order).
    pub fn len(&self, order: usize) -> usize {
        self.count[order]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn lookup(&self, vars: &[usize]) -> Option<usize> {
        let mut key: Vec<u8> = vars.iter().map(|&v| v as u8).collect();
        key.sort_unstable();
        self.index.get(&key).copied()
    }
}

/// Value and all partial derivatives through order three of a chart function.
#[derive(Clone)]
pub struct Jet3 {
    layout: Arc<JetLayout>,
    order: u8,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet3")
            .field("dim", &self.layout.dim)
            .field("order", &self.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for Jet3 {
    fn eq(&self, other: &Self) -> bool {
        self.layout.dim == other.layout.dim
            && self.order == other.order
            && self.coeffs == other.coeffs
    }
}

impl Jet3 {
    /// Constant function on `dim` chart variables.
    pub fn constant(dim: usize, value: f64) -> Result<Jet3, JetError> {
        let layout = JetLayout::get(dim)?;
        Ok(Jet3::constant_in(&layout, value))
    }

    pub fn constant_in(layout: &Arc<JetLayout>, value: f64) -> Jet3 {
        let mut coeffs = vec![0.0; layout.len(ORDER)];
        coeffs[0] = value;
        Jet3 {
            layout: layout.clone(),
            order: ORDER as u8,
            coeffs,
        }
    }

    /// Coordinate function `x_i` expanded around `x0`.
    pub fn seed_variable(index: usize, x0: f64, dim: usize) -> Result<Jet3, JetError> {
        let layout = JetLayout::get(dim)?;
        if index >= dim {
            return Err(JetError::IndexOutOfRange { index, dim });
        }
        let mut jet = Jet3::constant_in(&layout, x0);
        jet.coeffs[1 + index] = 1.0;
        Ok(jet)
    }

    /// Seeds every coordinate of `point` as a jet variable.
    pub fn seed_point(point: &[f64]) -> Result<Vec<Jet3>, JetError> {
        (0..point.len())
            .map(|i| Jet3::seed_variable(i, point[i], point.len()))
            .collect()
    }

    /// Builds a jet from raw Taylor coefficients in graded monomial order.
    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<f64>) -> Result<Jet3, JetError> {
        let layout = JetLayout::get(dim)?;
        assert!(order <= ORDER);
        assert_eq!(coeffs.len(), layout.len(order), "coefficient count");
        Ok(Jet3 {
            layout,
            order: order as u8,
            coeffs,
        })
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    /// Highest degree at which the coefficients are exact.
    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn zero_like(&self) -> Jet3 {
        Jet3::constant_in(&self.layout, 0.0)
    }

    pub fn constant_like(&self, value: f64) -> Jet3 {
        Jet3::constant_in(&self.layout, value)
    }

    /// Partial derivative with respect to the listed variables, e.g.
    /// `&[0, 0, 2]` for ∂₀∂₀∂₂. Order of the list is irrelevant.
    pub fn try_derivative(&self, vars: &[usize]) -> Result<f64, JetError> {
        if vars.len() > self.order as usize {
            return Err(JetError::OrderExhausted {
                requested: vars.len(),
                available: self.order as usize,
            });
        }
        if let Some(&bad) = vars.iter().find(|&&v| v >= self.layout.dim) {
            return Err(JetError::IndexOutOfRange {
                index: bad,
                dim: self.layout.dim,
            });
        }
        let idx = self.layout.lookup(vars).expect("monomial present");
        Ok(self.coeffs[idx] * self.layout.factorial[idx])
    }

    /// Panicking form of [`Jet3::try_derivative`].
    pub fn derivative(&self, vars: &[usize]) -> f64 {
        self.try_derivative(vars).unwrap()
    }

    pub fn gradient(&self) -> Vec<f64> {
        (0..self.layout.dim)
            .map(|i| self.derivative(&[i]))
            .collect()
    }

    /// ∂_var of this jet; the result is exact to one order less.
    pub fn try_partial(&self, var: usize) -> Result<Jet3, JetError> {
        if var >= self.layout.dim {
            return Err(JetError::IndexOutOfRange {
                index: var,
                dim: self.layout.dim,
            });
        }
        if self.order == 0 {
            return Err(JetError::OrderExhausted {
                requested: 1,
                available: 0,
            });
        }
        let order = self.order as usize - 1;
        let n = self.layout.len(order);
        let mut coeffs = vec![0.0; n];
        for &(src, dst, mult) in &self.layout.partial[var] {
            let dst = dst as usize;
            if dst < n {
                coeffs[dst] = mult * self.coeffs[src as usize];
            }
        }
        Ok(Jet3 {
            layout: self.layout.clone(),
            order: order as u8,
            coeffs,
        })
    }

    pub fn partial(&self, var: usize) -> Jet3 {
        self.try_partial(var).unwrap()
    }

    /// Drops coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Jet3 {
        let order = order.min(self.order as usize);
        Jet3 {
            layout: self.layout.clone(),
            order: order as u8,
            coeffs: self.coeffs[..self.layout.len(order)].to_vec(),
        }
    }

    fn check_dim(&self, other: &Jet3) -> Result<(), JetError> {
        if self.layout.dim != other.layout.dim {
            return Err(JetError::DimensionMismatch(self.layout.dim, other.layout.dim));
        }
        Ok(())
    }

    fn zip(&self, other: &Jet3, f: impl Fn(f64, f64) -> f64) -> Jet3 {
        let order = self.order.min(other.order);
        let n = self.layout.len(order as usize);
        let coeffs = self.coeffs[..n]
            .iter()
            .zip(&other.coeffs[..n])
            .map(|(&a, &b)| f(a, b))
            .collect();
        Jet3 {
            layout: self.layout.clone(),
            order,
            coeffs,
        }
    }

    fn mul_impl(&self, other: &Jet3) -> Jet3 {
        let order = self.order.min(other.order) as usize;
        let mut coeffs = vec![0.0; self.layout.len(order)];
        let a = &self.coeffs;
        let b = &other.coeffs;
        for &(ia, ib, io) in &self.layout.mul_table[..self.layout.mul_end[order]] {
            coeffs[io as usize] += a[ia as usize] * b[ib as usize];
        }
        Jet3 {
            layout: self.layout.clone(),
            order: order as u8,
            coeffs,
        }
    }

    /// `self += a * b`, the accumulation kernel used by tensor contractions.
    pub fn add_assign_product(&mut self, a: &Jet3, b: &Jet3) {
        assert_eq!(a.layout.dim, self.layout.dim, "jet dimension mismatch");
        assert_eq!(b.layout.dim, self.layout.dim, "jet dimension mismatch");
        let order = self.order.min(a.order).min(b.order) as usize;
        if order < self.order as usize {
            self.order = order as u8;
            self.coeffs.truncate(self.layout.len(order));
        }
        let layout = self.layout.clone();
        for &(ia, ib, io) in &layout.mul_table[..layout.mul_end[order]] {
            self.coeffs[io as usize] += a.coeffs[ia as usize] * b.coeffs[ib as usize];
        }
    }

    pub fn scale(&self, s: f64) -> Jet3 {
        Jet3 {
            layout: self.layout.clone(),
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Checked binary arithmetic.
    pub fn arith(&self, other: &Jet3, kind: Arith) -> Result<Jet3, JetError> {
        self.check_dim(other)?;
        Ok(match kind {
            Arith::Add => self.zip(other, |a, b| a + b),
            Arith::Sub => self.zip(other, |a, b| a - b),
            Arith::Mul => self.mul_impl(other),
            Arith::Div => {
                let inv = other.elementary(Elementary::Reciprocal)?;
                self.mul_impl(&inv)
            }
        })
    }

    /// f(self) for a function with known derivatives `[f, f', f'', f''']` at
    /// the value of `self`.
    pub fn compose(&self, derivs: [f64; 4]) -> Jet3 {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let order = self.order as usize;
        // Horner in the nilpotent increment h.
        let mut acc = h.scale(derivs[3] / 6.0);
        acc.coeffs[0] += derivs[2] / 2.0;
        acc = acc.mul_impl(&h);
        acc.coeffs[0] += derivs[1];
        acc = acc.mul_impl(&h);
        acc.coeffs[0] += derivs[0];
        debug_assert_eq!(acc.order as usize, order);
        acc
    }

    /// Checked elementary function.
    pub fn elementary(&self, f: Elementary) -> Result<Jet3, JetError> {
        let x = self.value();
        let derivs = match f {
            Elementary::Sqrt => {
                if x <= 0.0 {
                    return Err(JetError::Domain {
                        function: "sqrt",
                        value: x,
                    });
                }
                let s = x.sqrt();
                [s, 0.5 / s, -0.25 / (s * x), 0.375 / (s * x * x)]
            }
            Elementary::Exp => {
                let e = x.exp();
                [e; 4]
            }
            Elementary::Ln => {
                if x <= 0.0 {
                    return Err(JetError::Domain {
                        function: "ln",
                        value: x,
                    });
                }
                [x.ln(), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)]
            }
            Elementary::Sin => [x.sin(), x.cos(), -x.sin(), -x.cos()],
            Elementary::Cos => [x.cos(), -x.sin(), -x.cos(), x.sin()],
            Elementary::Atan => {
                let q = 1.0 / (1.0 + x * x);
                [
                    x.atan(),
                    q,
                    -2.0 * x * q * q,
                    (6.0 * x * x - 2.0) * q * q * q,
                ]
            }
            Elementary::PowInt(n) => {
                if n < 0 && x == 0.0 {
                    return Err(JetError::DivisionByZero);
                }
                let nf = n as f64;
                [
                    x.powi(n),
                    nf * x.powi(n - 1),
                    nf * (nf - 1.0) * x.powi(n - 2),
                    nf * (nf - 1.0) * (nf - 2.0) * x.powi(n - 3),
                ]
            }
            Elementary::Reciprocal => {
                if x == 0.0 {
                    return Err(JetError::DivisionByZero);
                }
                let r = 1.0 / x;
                [r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r]
            }
        };
        if let Elementary::PowInt(n) = f {
            // Integer powers are polynomials; use repeated multiplication so
            // that x = 0 with negative intermediate exponents is not an issue.
            if n >= 0 {
                let mut acc = self.constant_like(1.0);
                for _ in 0..n {
                    acc = acc.mul_impl(self);
                }
                return Ok(acc);
            }
        }
        Ok(self.compose(derivs))
    }

    pub fn sqrt(&self) -> Jet3 {
        self.elementary(Elementary::Sqrt).unwrap()
    }
    pub fn exp(&self) -> Jet3 {
        self.elementary(Elementary::Exp).unwrap()
    }
    pub fn ln(&self) -> Jet3 {
        self.elementary(Elementary::Ln).unwrap()
    }
    pub fn sin(&self) -> Jet3 {
        self.elementary(Elementary::Sin).unwrap()
    }
    pub fn cos(&self) -> Jet3 {
        self.elementary(Elementary::Cos).unwrap()
    }
    pub fn atan(&self) -> Jet3 {
        self.elementary(Elementary::Atan).unwrap()
    }
    pub fn powi(&self, n: i32) -> Jet3 {
        self.elementary(Elementary::PowInt(n)).unwrap()
    }
    pub fn recip(&self) -> Jet3 {
        self.elementary(Elementary::Reciprocal).unwrap()
    }
    pub fn sinh(&self) -> Jet3 {
        let x = self.value();
        self.compose([x.sinh(), x.cosh(), x.sinh(), x.cosh()])
    }
    pub fn cosh(&self) -> Jet3 {
        let x = self.value();
        self.compose([x.cosh(), x.sinh(), x.cosh(), x.sinh()])
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet3> for &Jet3 {
            type Output = Jet3;
            fn $method(self, rhs: &Jet3) -> Jet3 {
                assert_eq!(
                    self.layout.dim, rhs.layout.dim,
                    "jet dimension mismatch"
                );
                let f: fn(&Jet3, &Jet3) -> Jet3 = $body;
                f(self, rhs)
            }
        }
        impl $trait<Jet3> for Jet3 {
            type Output = Jet3;
            fn $method(self, rhs: Jet3) -> Jet3 {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet3> for Jet3 {
            type Output = Jet3;
            fn $method(self, rhs: &Jet3) -> Jet3 {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet3> for &Jet3 {
            type Output = Jet3;
            fn $method(self, rhs: Jet3) -> Jet3 {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.zip(b, |x, y| x + y));
binop!(Sub, sub, |a, b| a.zip(b, |x, y| x - y));
binop!(Mul, mul, |a, b| a.mul_impl(b));
binop!(Div, div, |a, b| a.mul_impl(&b.recip()));

macro_rules! scalar_op {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<f64> for &Jet3 {
            type Output = Jet3;
            fn $method(self, rhs: f64) -> Jet3 {
                let f: fn(&Jet3, f64) -> Jet3 = $body;
                f(self, rhs)
            }
        }
        impl $trait<f64> for Jet3 {
            type Output = Jet3;
            fn $method(self, rhs: f64) -> Jet3 {
                (&self).$method(rhs)
            }
        }
    };
}

scalar_op!(Add, add, |a, s| {
    let mut r = a.clone();
    r.coeffs[0] += s;
    r
});
scalar_op!(Sub, sub, |a, s| {
    let mut r = a.clone();
    r.coeffs[0] -= s;
    r
});
scalar_op!(Mul, mul, |a, s| a.scale(s));
scalar_op!(Div, div, |a, s| a.scale(1.0 / s));

impl Mul<&Jet3> for f64 {
    type Output = Jet3;
    fn mul(self, rhs: &Jet3) -> Jet3 {
        rhs.scale(self)
    }
}

impl Mul<Jet3> for f64 {
    type Output = Jet3;
    fn mul(self, rhs: Jet3) -> Jet3 {
        rhs.scale(self)
    }
}

impl Add<&Jet3> for f64 {
    type Output = Jet3;
    fn add(self, rhs: &Jet3) -> Jet3 {
        rhs + self
    }
}

impl Add<Jet3> for f64 {
    type Output = Jet3;
    fn add(self, rhs: Jet3) -> Jet3 {
        rhs + self
    }
}

impl Sub<Jet3> for f64 {
    type Output = Jet3;
    fn sub(self, rhs: Jet3) -> Jet3 {
        -rhs + self
    }
}

impl Sub<&Jet3> for f64 {
    type Output = Jet3;
    fn sub(self, rhs: &Jet3) -> Jet3 {
        -rhs + self
    }
}

impl Neg for &Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(-1.0)
    }
}

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn layout_sizes() {
        for dim in 1..=8 {
            let l = JetLayout::get(dim).unwrap();
            let binom = (dim + 1) * (dim + 2) * (dim + 3) / 6;
            assert_eq!(l.len(ORDER), binom);
        }
        assert!(JetLayout::get(0).is_err());
        assert!(JetLayout::get(MAX_DIM + 1).is_err());
    }

    #[test]
    fn seed_is_a_coordinate() {
        let x = Jet3::seed_variable(0, 2.0, 2).unwrap();
        assert_eq!(x.value(), 2.0);
        assert_eq!(x.derivative(&[0]), 1.0);
        assert_eq!(x.derivative(&[1]), 0.0);
        assert_eq!(x.derivative(&[0, 0]), 0.0);
        assert_eq!(x.derivative(&[0, 1, 1]), 0.0);
        assert!(matches!(
            Jet3::seed_variable(2, 0.0, 2),
            Err(JetError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn square_and_cube() {
        let y = Jet3::seed_variable(1, 0.0, 3).unwrap();
        let sq = &y * &y;
        assert_eq!(sq.value(), 0.0);
        assert_eq!(sq.derivative(&[1, 1]), 2.0);
        let p = Jet3::seed_variable(0, 1.0, 1).unwrap();
        let q = &(&p * &p) * &p;
        assert_eq!(q.derivative(&[0, 0, 0]), 6.0);
    }

    #[test]
    fn product_and_quotient_examples() {
        let x = Jet3::seed_variable(0, 0.0, 1).unwrap();
        let prod = (1.0 + &x) * (1.0 - &x);
        assert_eq!(prod.value(), 1.0);
        assert_eq!(prod.derivative(&[0]), 0.0);
        assert_eq!(prod.derivative(&[0, 0]), -2.0);
        assert_eq!(prod.derivative(&[0, 0, 0]), 0.0);

        let q = (1.0 + &x).recip();
        assert!(close(q.derivative(&[0]), -1.0, 1e-15));
        assert!(close(q.derivative(&[0, 0]), 2.0, 1e-15));
        assert!(close(q.derivative(&[0, 0, 0]), -6.0, 1e-15));
    }

    #[test]
    fn sqrt_and_sin() {
        let x = Jet3::seed_variable(0, 4.0, 1).unwrap();
        let s = x.sqrt();
        assert!(close(s.value(), 2.0, 1e-15));
        assert!(close(s.derivative(&[0]), 0.25, 1e-15));
        assert!(close(s.derivative(&[0, 0]), -1.0 / 32.0, 1e-15));
        assert!(close(s.derivative(&[0, 0, 0]), 3.0 / 256.0, 1e-15));

        let z = Jet3::seed_variable(0, 0.0, 1).unwrap().sin();
        assert!(close(z.derivative(&[0]), 1.0, 1e-15));
        assert!(close(z.derivative(&[0, 0]), 0.0, 1e-15));
        assert!(close(z.derivative(&[0, 0, 0]), -1.0, 1e-15));
    }

    #[test]
    fn domain_and_division_errors() {
        let x = Jet3::seed_variable(0, -1.0, 1).unwrap();
        assert!(matches!(
            x.elementary(Elementary::Sqrt),
            Err(JetError::Domain { .. })
        ));
        let zero = Jet3::constant(1, 0.0).unwrap();
        assert_eq!(
            x.arith(&zero, Arith::Div),
            Err(JetError::DivisionByZero)
        );
        let other = Jet3::constant(2, 1.0).unwrap();
        assert_eq!(
            x.arith(&other, Arith::Add),
            Err(JetError::DimensionMismatch(1, 2))
        );
    }

    #[test]
    fn partial_lowers_order() {
        let pts = Jet3::seed_point(&[0.3, -0.2]).unwrap();
        let f = &pts[0] * &pts[0] * &pts[1];
        let fx = f.partial(0);
        assert_eq!(fx.order(), 2);
        assert!(close(fx.value(), 2.0 * 0.3 * -0.2, 1e-15));
        assert!(close(fx.derivative(&[0, 1]), 2.0, 1e-15));
        let fxxy = fx.partial(0).partial(1);
        assert_eq!(fxxy.order(), 0);
        assert!(close(fxxy.value(), 2.0, 1e-15));
        assert!(fxxy.try_partial(0).is_err());
        assert!(fx.try_derivative(&[0, 0, 1]).is_err());
    }

    #[test]
    fn reciprocal_cancels() {
        let pts = Jet3::seed_point(&[0.4, 0.1, -0.3]).unwrap();
        let a = 2.0 + &pts[0] * &pts[1] + pts[2].exp();
        let one = &a * &a.recip();
        assert!(close(one.value(), 1.0, 1e-15));
        assert!(one.coeffs()[1..].iter().all(|c| c.abs() < 1e-13));
    }
}
