//! Dense multi-index component arrays at a point.
//!
//! Every slot carries a dimension, a variance and a block label. Storage is
//! row-major in the literal slot order, so `C_{IJKL}` keeps slots `I, J, K, L`
//! in that order. Components are generic over [`Scalar`], which is `f64` for
//! evaluated tensors and [`Jet3`] for tensor fields that still need to be
//! differentiated.

mod einsum;
pub mod linalg;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jet::Jet3;

pub use einsum::{einsum, einsum_in, einsum_raw};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("slot {slot} out of range for rank {rank}")]
    SlotOutOfRange { slot: usize, rank: usize },
    #[error("incompatible slots {a} and {b}: {reason}")]
    IncompatibleSlots {
        a: usize,
        b: usize,
        reason: &'static str,
    },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("singular matrix: pivot {pivot:e} below threshold")]
    Singular { pivot: f64 },
    #[error("bad einsum expression `{expr}`: {reason}")]
    BadEinsum { expr: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variance {
    Up,
    Down,
}

impl Variance {
    pub fn flipped(self) -> Variance {
        match self {
            Variance::Up => Variance::Down,
            Variance::Down => Variance::Up,
        }
    }
}

/// Which index family a slot belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    Total,
    External,
    Internal,
    Algebra,
}

impl Block {
    /// Blocks that may be paired by a contraction. `Total` pairs with any
    /// coordinate block; external and internal never pair with each other.
    pub fn compatible(self, other: Block) -> bool {
        self == other
            || (self == Block::Total && other != Block::Algebra)
            || (other == Block::Total && self != Block::Algebra)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub dim: usize,
    pub variance: Variance,
    pub block: Block,
}

impl Slot {
    pub fn new(dim: usize, variance: Variance, block: Block) -> Slot {
        Slot {
            dim,
            variance,
            block,
        }
    }
    pub fn up(dim: usize, block: Block) -> Slot {
        Slot::new(dim, Variance::Up, block)
    }
    pub fn down(dim: usize, block: Block) -> Slot {
        Slot::new(dim, Variance::Down, block)
    }
}

/// Bracket kinds, normalized with a factor 1/2 on the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bracket {
    Antisym,
    Sym,
}

/// Component type of a [`DenseTensor`].
pub trait Scalar: Clone + fmt::Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn constant_like(&self, v: f64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, s: f64) -> Self;
    fn add_assign(&mut self, o: &Self);
    fn add_assign_product(&mut self, a: &Self, b: &Self);
    /// Point value (the constant Taylor coefficient for jets).
    fn value(&self) -> f64;
}

impl Scalar for f64 {
    fn zero_like(&self) -> f64 {
        0.0
    }
    fn constant_like(&self, v: f64) -> f64 {
        v
    }
    fn add(&self, o: &f64) -> f64 {
        self + o
    }
    fn sub(&self, o: &f64) -> f64 {
        self - o
    }
    fn mul(&self, o: &f64) -> f64 {
        self * o
    }
    fn scale(&self, s: f64) -> f64 {
        self * s
    }
    fn add_assign(&mut self, o: &f64) {
        *self += o;
    }
    fn add_assign_product(&mut self, a: &f64, b: &f64) {
        *self += a * b;
    }
    fn value(&self) -> f64 {
        *self
    }
}

impl Scalar for Jet3 {
    fn zero_like(&self) -> Jet3 {
        Jet3::zero_like(self)
    }
    fn constant_like(&self, v: f64) -> Jet3 {
        Jet3::constant_like(self, v)
    }
    fn add(&self, o: &Jet3) -> Jet3 {
        self + o
    }
    fn sub(&self, o: &Jet3) -> Jet3 {
        self - o
    }
    fn mul(&self, o: &Jet3) -> Jet3 {
        self * o
    }
    fn scale(&self, s: f64) -> Jet3 {
        Jet3::scale(self, s)
    }
    fn add_assign(&mut self, o: &Jet3) {
        *self = &*self + o;
    }
    fn add_assign_product(&mut self, a: &Jet3, b: &Jet3) {
        Jet3::add_assign_product(self, a, b)
    }
    fn value(&self) -> f64 {
        Jet3::value(self)
    }
}

/// Dense tensor with per-slot dimension, variance and block label.
#[derive(Clone, PartialEq)]
pub struct DenseTensor<S = f64> {
    slots: Vec<Slot>,
    comps: Vec<S>,
}

impl<S: fmt::Debug> fmt::Debug for DenseTensor<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DenseTensor")
            .field("slots", &self.slots)
            .field("comps", &self.comps)
            .finish()
    }
}

pub(crate) fn strides(slots: &[Slot]) -> Vec<usize> {
    let mut s = vec![1; slots.len()];
    for k in (0..slots.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * slots[k + 1].dim;
    }
    s
}

/// Iterates all multi-indices of the given dims in row-major order.
pub fn multi_indices(dims: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = dims.iter().product();
    let mut current = vec![0; dims.len()];
    let mut first = true;
    (0..total).map(move |_| {
        if !first {
            for k in (0..dims.len()).rev() {
                current[k] += 1;
                if current[k] < dims[k] {
                    break;
                }
                current[k] = 0;
            }
        }
        first = false;
        current.clone()
    })
}

impl<S: Scalar> DenseTensor<S> {
    pub fn new(slots: Vec<Slot>, comps: Vec<S>) -> Result<Self, TensorError> {
        let n: usize = slots.iter().map(|s| s.dim).product();
        if n != comps.len() {
            return Err(TensorError::ShapeMismatch(format!(
                "{} components for shape {:?}",
                comps.len(),
                slots.iter().map(|s| s.dim).collect::<Vec<_>>()
            )));
        }
        Ok(DenseTensor { slots, comps })
    }

    pub fn zeros(slots: Vec<Slot>, proto: &S) -> Self {
        let n: usize = slots.iter().map(|s| s.dim).product();
        DenseTensor {
            slots,
            comps: vec![proto.zero_like(); n],
        }
    }

    pub fn scalar(value: S) -> Self {
        DenseTensor {
            slots: Vec::new(),
            comps: vec![value],
        }
    }

    pub fn from_fn(slots: Vec<Slot>, mut f: impl FnMut(&[usize]) -> S) -> Self {
        let dims: Vec<usize> = slots.iter().map(|s| s.dim).collect();
        let comps = multi_indices(&dims).map(|idx| f(&idx)).collect();
        DenseTensor { slots, comps }
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn dims(&self) -> Vec<usize> {
        self.slots.iter().map(|s| s.dim).collect()
    }

    pub fn variance(&self) -> Vec<Variance> {
        self.slots.iter().map(|s| s.variance).collect()
    }

    pub fn blocks(&self) -> Vec<Block> {
        self.slots.iter().map(|s| s.block).collect()
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn comps(&self) -> &[S] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [S] {
        &mut self.comps
    }

    pub fn into_comps(self) -> Vec<S> {
        self.comps
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.slots.len());
        let mut off = 0;
        for (k, &i) in idx.iter().enumerate() {
            debug_assert!(i < self.slots[k].dim);
            off = off * self.slots[k].dim + i;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> &S {
        &self.comps[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: S) {
        let o = self.offset(idx);
        self.comps[o] = v;
    }

    /// The single component of a rank-0 tensor.
    pub fn as_scalar(&self) -> &S {
        assert!(self.slots.is_empty(), "not a scalar");
        &self.comps[0]
    }

    /// Replaces the slot metadata, keeping the components.
    pub fn with_slots(mut self, slots: Vec<Slot>) -> Self {
        assert_eq!(
            slots.iter().map(|s| s.dim).collect::<Vec<_>>(),
            self.dims(),
            "relabelling must preserve dims"
        );
        self.slots = slots;
        self
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> DenseTensor<T> {
        DenseTensor {
            slots: self.slots.clone(),
            comps: self.comps.iter().map(f).collect(),
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), TensorError> {
        if self.dims() != other.dims() {
            return Err(TensorError::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.dims(),
                other.dims()
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, TensorError> {
        self.check_same_shape(other)?;
        Ok(DenseTensor {
            slots: self.slots.clone(),
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, TensorError> {
        self.check_same_shape(other)?;
        Ok(DenseTensor {
            slots: self.slots.clone(),
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.sub(b))
                .collect(),
        })
    }

    /// Panicking sum, for formula code where shapes are fixed by construction.
    pub fn plus(&self, other: &Self) -> Self {
        self.try_add(other).expect("tensor sum")
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.try_sub(other).expect("tensor difference")
    }

    pub fn scale(&self, s: f64) -> Self {
        DenseTensor {
            slots: self.slots.clone(),
            comps: self.comps.iter().map(|c| c.scale(s)).collect(),
        }
    }

    /// Multiplies every component by a scalar of the component type.
    pub fn scale_by(&self, s: &S) -> Self {
        DenseTensor {
            slots: self.slots.clone(),
            comps: self.comps.iter().map(|c| c.mul(s)).collect(),
        }
    }

    /// Tensor product; slots of `self` come first.
    pub fn outer(&self, other: &Self) -> Self {
        let mut slots = self.slots.clone();
        slots.extend_from_slice(&other.slots);
        let mut comps = Vec::with_capacity(self.comps.len() * other.comps.len());
        for a in &self.comps {
            for b in &other.comps {
                comps.push(a.mul(b));
            }
        }
        DenseTensor { slots, comps }
    }

    /// Reorders slots: output slot `k` is input slot `order[k]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self, TensorError> {
        let r = self.rank();
        let mut seen = vec![false; r];
        if order.len() != r {
            return Err(TensorError::ShapeMismatch(format!(
                "permutation of length {} for rank {r}",
                order.len()
            )));
        }
        for &o in order {
            if o >= r || seen[o] {
                return Err(TensorError::ShapeMismatch(format!(
                    "{order:?} is not a permutation"
                )));
            }
            seen[o] = true;
        }
        let slots: Vec<Slot> = order.iter().map(|&o| self.slots[o]).collect();
        let src_strides = strides(&self.slots);
        Ok(DenseTensor::from_fn(slots, |idx| {
            let mut off = 0;
            for (k, &i) in idx.iter().enumerate() {
                off += i * src_strides[order[k]];
            }
            self.comps[off].clone()
        }))
    }

    /// Trace over one up and one down slot of equal dimension and compatible block.
    pub fn contract(&self, slot_up: usize, slot_down: usize) -> Result<Self, TensorError> {
        let r = self.rank();
        for &s in &[slot_up, slot_down] {
            if s >= r {
                return Err(TensorError::SlotOutOfRange { slot: s, rank: r });
            }
        }
        let (a, b) = (self.slots[slot_up], self.slots[slot_down]);
        if slot_up == slot_down {
            return Err(TensorError::IncompatibleSlots {
                a: slot_up,
                b: slot_down,
                reason: "same slot",
            });
        }
        if a.variance != Variance::Up || b.variance != Variance::Down {
            return Err(TensorError::IncompatibleSlots {
                a: slot_up,
                b: slot_down,
                reason: "contraction needs one up and one down slot",
            });
        }
        if a.dim != b.dim {
            return Err(TensorError::IncompatibleSlots {
                a: slot_up,
                b: slot_down,
                reason: "dimension mismatch",
            });
        }
        if !a.block.compatible(b.block) {
            return Err(TensorError::IncompatibleSlots {
                a: slot_up,
                b: slot_down,
                reason: "block mismatch",
            });
        }
        let keep: Vec<usize> = (0..r).filter(|&k| k != slot_up && k != slot_down).collect();
        let slots: Vec<Slot> = keep.iter().map(|&k| self.slots[k]).collect();
        let st = strides(&self.slots);
        let proto = self.comps[0].zero_like();
        Ok(DenseTensor::from_fn(slots, |idx| {
            let mut base = 0;
            for (n, &k) in keep.iter().enumerate() {
                base += idx[n] * st[k];
            }
            let mut acc = proto.clone();
            for t in 0..a.dim {
                acc.add_assign(&self.comps[base + t * (st[slot_up] + st[slot_down])]);
            }
            acc
        }))
    }

    /// Raises (down slot) or lowers (up slot) `slot`. `metric` is the lowered
    /// metric and `inverse` its inverse, both rank two.
    pub fn raise_lower(
        &self,
        slot: usize,
        metric: &DenseTensor<S>,
        inverse: &DenseTensor<S>,
    ) -> Result<Self, TensorError> {
        let r = self.rank();
        if slot >= r {
            return Err(TensorError::SlotOutOfRange { slot, rank: r });
        }
        let s = self.slots[slot];
        let m = match s.variance {
            Variance::Down => inverse,
            Variance::Up => metric,
        };
        if m.rank() != 2 || m.slots[0].dim != s.dim || m.slots[1].dim != s.dim {
            return Err(TensorError::ShapeMismatch(format!(
                "metric of shape {:?} for slot of dim {}",
                m.dims(),
                s.dim
            )));
        }
        let st = strides(&self.slots);
        let mut slots = self.slots.clone();
        slots[slot].variance = s.variance.flipped();
        let proto = self.comps[0].zero_like();
        Ok(DenseTensor::from_fn(slots, |idx| {
            let mut base = 0;
            for (k, &i) in idx.iter().enumerate() {
                if k != slot {
                    base += i * st[k];
                }
            }
            let mut acc = proto.clone();
            for t in 0..s.dim {
                acc.add_assign_product(
                    &m.comps[idx[slot] * s.dim + t],
                    &self.comps[base + t * st[slot]],
                );
            }
            acc
        }))
    }

    /// `t_[IJ]` or `t_(IJ)` on the named pair, with the 1/2 normalization.
    pub fn brackets(&self, a: usize, b: usize, kind: Bracket) -> Result<Self, TensorError> {
        let r = self.rank();
        for &s in &[a, b] {
            if s >= r {
                return Err(TensorError::SlotOutOfRange { slot: s, rank: r });
            }
        }
        if a == b {
            return Err(TensorError::IncompatibleSlots {
                a,
                b,
                reason: "same slot",
            });
        }
        let (sa, sb) = (self.slots[a], self.slots[b]);
        if sa.dim != sb.dim || sa.variance != sb.variance {
            return Err(TensorError::IncompatibleSlots {
                a,
                b,
                reason: "bracketed slots need equal dims and variance",
            });
        }
        let st = strides(&self.slots);
        Ok(DenseTensor::from_fn(self.slots.clone(), |idx| {
            let off = self.offset(idx);
            let swapped = off - idx[a] * st[a] - idx[b] * st[b] + idx[b] * st[a] + idx[a] * st[b];
            let x = &self.comps[off];
            let y = &self.comps[swapped];
            match kind {
                Bracket::Antisym => x.sub(y).scale(0.5),
                Bracket::Sym => x.add(y).scale(0.5),
            }
        }))
    }

    /// Point values of every component.
    pub fn values(&self) -> DenseTensor<f64> {
        DenseTensor {
            slots: self.slots.clone(),
            comps: self.comps.iter().map(|c| c.value()).collect(),
        }
    }

    /// Largest absolute point value over all components (0 for empty tensors).
    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .map(|c| c.value().abs())
            .fold(0.0, f64::max)
    }
}

impl DenseTensor<f64> {
    /// Identity `δ^I_J` of dimension `n` in the given block.
    pub fn identity(n: usize, block: Block) -> Self {
        DenseTensor::from_fn(vec![Slot::up(n, block), Slot::down(n, block)], |i| {
            if i[0] == i[1] {
                1.0
            } else {
                0.0
            }
        })
    }

    /// Largest absolute component difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dims(), other.dims(), "shape");
        self.comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl DenseTensor<Jet3> {
    /// ∂_var applied componentwise.
    pub fn partial(&self, var: usize) -> Self {
        self.map(|c| c.partial(var))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(n: usize, comps: Vec<f64>, v0: Variance, v1: Variance) -> DenseTensor {
        DenseTensor::new(
            vec![Slot::new(n, v0, Block::Total), Slot::new(n, v1, Block::Total)],
            comps,
        )
        .unwrap()
    }

    #[test]
    fn trace_of_identity() {
        let id = DenseTensor::identity(4, Block::External);
        assert_eq!(*id.contract(0, 1).unwrap().as_scalar(), 4.0);
    }

    #[test]
    fn contraction_by_hand() {
        // F^a_{μν} with a=1, 2x2, contracted with A^ν.
        let f = DenseTensor::new(
            vec![Slot::down(2, Block::External), Slot::down(2, Block::External)],
            vec![0.0, 3.0, -3.0, 0.0],
        )
        .unwrap();
        let a = DenseTensor::new(vec![Slot::up(2, Block::External)], vec![2.0, 5.0]).unwrap();
        let prod = f.outer(&a).contract(2, 1).unwrap();
        // (F·A)_μ = F_{μν} A^ν = [3·5, −3·2]
        assert_eq!(prod.comps(), &[15.0, -6.0]);
    }

    #[test]
    fn contraction_rejects_bad_pairs() {
        let t = DenseTensor::from_fn(
            vec![Slot::up(3, Block::External), Slot::down(3, Block::Internal)],
            |_| 1.0,
        );
        assert!(matches!(
            t.contract(0, 1),
            Err(TensorError::IncompatibleSlots { reason: "block mismatch", .. })
        ));
        let u = mat(3, vec![0.0; 9], Variance::Down, Variance::Down);
        assert!(u.contract(0, 1).is_err());
        assert!(u.contract(0, 5).is_err());
    }

    #[test]
    fn brackets_examples() {
        let t = mat(2, vec![0.0, 1.0, 3.0, 0.0], Variance::Down, Variance::Down);
        let a = t.brackets(0, 1, Bracket::Antisym).unwrap();
        assert_eq!(a.comps(), &[0.0, -1.0, 1.0, 0.0]);
        let s = t.brackets(0, 1, Bracket::Sym).unwrap();
        assert_eq!(s.plus(&a), t);
        let sym = mat(
            3,
            vec![1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0],
            Variance::Down,
            Variance::Down,
        );
        assert_eq!(sym.brackets(0, 1, Bracket::Antisym).unwrap().max_abs(), 0.0);
        let mixed = mat(2, vec![0.0; 4], Variance::Up, Variance::Down);
        assert!(mixed.brackets(0, 1, Bracket::Sym).is_err());
    }

    #[test]
    fn lowering_with_minkowski() {
        let eta = mat(
            4,
            vec![
                -1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0,
            ],
            Variance::Down,
            Variance::Down,
        );
        let v = DenseTensor::new(vec![Slot::up(4, Block::Total)], vec![2.0, 1.0, 1.0, 1.0]).unwrap();
        let low = v.raise_lower(0, &eta, &eta).unwrap();
        assert_eq!(low.comps(), &[-2.0, 1.0, 1.0, 1.0]);
        assert_eq!(low.variance(), vec![Variance::Down]);
    }

    #[test]
    fn euclidean_raise_is_noop() {
        let delta = DenseTensor::identity(3, Block::Total).with_slots(vec![
            Slot::down(3, Block::Total),
            Slot::down(3, Block::Total),
        ]);
        let inv = delta.clone().with_slots(vec![Slot::up(3, Block::Total), Slot::up(3, Block::Total)]);
        let v = DenseTensor::new(vec![Slot::down(3, Block::Total)], vec![1.0, -2.0, 0.5]).unwrap();
        assert_eq!(v.raise_lower(0, &delta, &inv).unwrap().comps(), v.comps());
    }

    #[test]
    fn permute_transposes() {
        let t = mat(2, vec![1.0, 2.0, 3.0, 4.0], Variance::Up, Variance::Down);
        let p = t.permute(&[1, 0]).unwrap();
        assert_eq!(p.comps(), &[1.0, 3.0, 2.0, 4.0]);
        assert_eq!(p.variance(), vec![Variance::Down, Variance::Up]);
        assert!(t.permute(&[0, 0]).is_err());
    }
}
