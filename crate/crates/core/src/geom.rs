//! Curvature of a metric at a chart point.
//!
//! A metric is supplied as a [`MetricField`]: a function from coordinate jets
//! to metric component jets. Feeding it seeded coordinates gives the metric
//! together with three derivatives, which is exactly what the curvature stack
//! needs: Γ uses one derivative, Riemann two, and the Cotton tensor three.
//!
//! Conventions (all fixed here, once):
//!
//! * `Γ_{JK}^L = ½ g^{LM}(∂_J g_{KM} + ∂_K g_{JM} − ∂_M g_{JK})`
//! * `R_{IJK}^L = ∂_IΓ_{JK}^L − ∂_JΓ_{IK}^L + Γ_{IM}^LΓ_{JK}^M − Γ_{JM}^LΓ_{IK}^M`
//! * `R_{IJKL} = R_{IJK}^M g_{ML}`
//! * Ricci `R_{IJ} = R_{IKJ}^K` under [`Convention::Paper`]; the
//!   [`Convention::Standard`] choice flips the sign of Ricci and everything
//!   built from it (scalar, Schouten, Cotton). With the `Paper` convention a
//!   round sphere has *negative* scalar curvature.
//! * Weyl `C_{IJKL} = R_{IJKL} − 2/(D−2)(g_{I[K}S_{L]J} − g_{J[K}S_{L]I})` is
//!   always built from the `Paper`-convention Schouten, so it is the same tensor
//!   under both conventions.
//! * Cotton `C_{IJK} = 2∇_{[K}S_{J]I}`.
//!
//! Covariant derivatives put the new index *first*: `(∇T)_{K…} = ∇_K T_{…}`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jet::{Jet3, JetError};
use crate::rng::XorShift64Star;
use crate::tensor::linalg::{self, invert_jets};
use crate::tensor::{einsum, multi_indices, strides, Block, DenseTensor, Slot, TensorError};

#[derive(Debug, Error)]
pub enum GeomError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("{what} requires dimension at least {min}, got {dim}")]
    DimensionTooSmall {
        what: &'static str,
        dim: usize,
        min: usize,
    },
    #[error("point {point:?} is outside the chart domain")]
    OutsideDomain { point: Vec<f64> },
    #[error("metric is not symmetric: |g_IJ − g_JI| = {0:e}")]
    NotSymmetric(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Sign convention for Ricci contraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    Paper,
    Standard,
}

impl Convention {
    /// Factor converting a `Paper`-convention Ricci-derived quantity to this one.
    pub fn sigma(self) -> f64 {
        match self {
            Convention::Paper => 1.0,
            Convention::Standard => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Convention::Paper => "paper",
            Convention::Standard => "standard",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fraction of the domain trimmed from each side before sampling.
pub const DOMAIN_SHRINK: f64 = 0.05;

/// Valid chart points: a box, optionally intersected with a centered ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    #[serde(default)]
    pub ball: Option<f64>,
}

impl Domain {
    pub fn cube(dim: usize, half_width: f64) -> Domain {
        Domain {
            lo: vec![-half_width; dim],
            hi: vec![half_width; dim],
            ball: None,
        }
    }

    pub fn ball(dim: usize, radius: f64) -> Domain {
        Domain {
            lo: vec![-radius; dim],
            hi: vec![radius; dim],
            ball: Some(radius),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (lo, hi))| *lo <= *x && *x <= *hi)
            && self
                .ball
                .is_none_or(|r| p.iter().map(|x| x * x).sum::<f64>() <= r * r)
    }

    /// A uniform point in the domain shrunk by [`DOMAIN_SHRINK`] per side.
    pub fn sample(&self, rng: &mut XorShift64Star) -> Vec<f64> {
        loop {
            let p: Vec<f64> = self
                .lo
                .iter()
                .zip(&self.hi)
                .map(|(lo, hi)| {
                    let w = hi - lo;
                    rng.uniform(lo + DOMAIN_SHRINK * w, hi - DOMAIN_SHRINK * w)
                })
                .collect();
            let inside = self.ball.is_none_or(|r| {
                let rr = r * (1.0 - DOMAIN_SHRINK);
                p.iter().map(|x| x * x).sum::<f64>() <= rr * rr
            });
            if inside {
                return p;
            }
        }
    }
}

/// A metric given by component functions on a chart.
pub trait MetricField: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// Row-major `dim × dim` components at the coordinate jets `x`. The jets
    /// may live in a larger variable space than `dim`.
    fn components(&self, x: &[Jet3]) -> Result<Vec<Jet3>, GeomError>;

    fn domain(&self) -> Domain;

    /// Informational signature, `+1` per positive direction.
    fn signature(&self) -> Vec<i8> {
        vec![1; self.dim()]
    }
}

/// Symmetric metric tensor jets with slots `(down, down)` in `block`.
pub fn metric_tensor(
    field: &dyn MetricField,
    x: &[Jet3],
    block: Block,
) -> Result<DenseTensor<Jet3>, GeomError> {
    let n = field.dim();
    let comps = field.components(x)?;
    let asym = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (comps[i * n + j].value() - comps[j * n + i].value()).abs())
        .fold(0.0, f64::max);
    if asym > 1e-14 {
        return Err(GeomError::NotSymmetric(asym));
    }
    Ok(DenseTensor::new(
        vec![Slot::down(n, block), Slot::down(n, block)],
        comps,
    )?)
}

/// Metric, inverse and Christoffel symbols of one coordinate block.
///
/// `offset` maps block index `I` to jet variable `offset + I`; for a
/// Kaluza-Klein point the external block sits at offset 0 and the internal
/// block at offset `d`.
#[derive(Debug, Clone)]
pub struct LocalGeometry {
    pub block: Block,
    pub offset: usize,
    /// `g_{IJ}`
    pub g: DenseTensor<Jet3>,
    /// `g^{IJ}`
    pub ginv: DenseTensor<Jet3>,
    /// `Γ_{JK}^L`, slots `(down, down, up)`
    pub gamma: DenseTensor<Jet3>,
}

impl LocalGeometry {
    pub fn new(g: DenseTensor<Jet3>, block: Block, offset: usize) -> Result<Self, GeomError> {
        let n = g.dims()[0];
        let ginv_c = invert_jets(n, g.comps())?;
        let ginv = DenseTensor::new(vec![Slot::up(n, block), Slot::up(n, block)], ginv_c)?;
        let mut geo = LocalGeometry {
            block,
            offset,
            g,
            ginv,
            gamma: DenseTensor::scalar(Jet3::constant(1, 0.0)?),
        };
        let dg = geo.gradient(&geo.g);
        // T_{JKM} = ∂_J g_{KM} + ∂_K g_{JM} − ∂_M g_{JK}
        let t = DenseTensor::from_fn(
            vec![Slot::down(n, block), Slot::down(n, block), Slot::down(n, block)],
            |ix| {
                let (j, k, m) = (ix[0], ix[1], ix[2]);
                dg.get(&[j, k, m]) + dg.get(&[k, j, m]) - dg.get(&[m, j, k])
            },
        );
        geo.gamma = einsum("jkm,lm->jkl", &[&t, &geo.ginv])?.scale(0.5);
        Ok(geo)
    }

    /// Evaluates `field` at coordinate jets and builds the geometry.
    pub fn from_field(
        field: &dyn MetricField,
        x: &[Jet3],
        block: Block,
        offset: usize,
    ) -> Result<Self, GeomError> {
        LocalGeometry::new(metric_tensor(field, x, block)?, block, offset)
    }

    /// Geometry of a standalone chart, seeded at `p` in `p.len()` variables.
    pub fn at_point(field: &dyn MetricField, p: &[f64]) -> Result<Self, GeomError> {
        if !field.domain().contains(p) {
            return Err(GeomError::OutsideDomain { point: p.to_vec() });
        }
        let x = Jet3::seed_point(p)?;
        LocalGeometry::from_field(field, &x, Block::Total, 0)
    }

    pub fn dim(&self) -> usize {
        self.g.dims()[0]
    }

    /// ∂_K applied to every component, with the new down slot first.
    pub fn gradient(&self, t: &DenseTensor<Jet3>) -> DenseTensor<Jet3> {
        let n = self.dim();
        let mut slots = vec![Slot::down(n, self.block)];
        slots.extend_from_slice(t.slots());
        let mut comps = Vec::with_capacity(n * t.comps().len());
        for k in 0..n {
            comps.extend(t.comps().iter().map(|c| c.partial(self.offset + k)));
        }
        DenseTensor::new(slots, comps).expect("gradient shape")
    }

    fn acts_on(&self, slot: &Slot) -> bool {
        slot.dim == self.dim()
            && (slot.block == self.block
                || (self.block == Block::Total && slot.block != Block::Algebra))
    }

    /// Levi-Civita covariant derivative, new down slot first. Slots of other
    /// blocks are treated as inert labels.
    pub fn cov_deriv(&self, t: &DenseTensor<Jet3>) -> DenseTensor<Jet3> {
        let mut out = self.gradient(t);
        self.add_connection(t, &mut out, 1.0);
        out
    }

    /// Adds `sign·(connection terms)` of `∇_K t` to `out` (laid out as the
    /// gradient of `t`).
    pub(crate) fn add_connection(&self, t: &DenseTensor<Jet3>, out: &mut DenseTensor<Jet3>, sign: f64) {
        let n = self.dim();
        let st = strides(t.slots());
        let len = t.comps().len();
        let active: Vec<usize> = (0..t.rank()).filter(|&s| self.acts_on(&t.slots()[s])).collect();
        if active.is_empty() {
            return;
        }
        let gamma = self.gamma.comps();
        let dims = t.dims();
        let tc = t.comps();
        let oc = out.comps_mut();
        for k in 0..n {
            for (lin, idx) in multi_indices(&dims).enumerate() {
                let acc = &mut oc[k * len + lin];
                for &s in &active {
                    let a = idx[s];
                    let base = lin - a * st[s];
                    for m in 0..n {
                        let v = &tc[base + m * st[s]];
                        match t.slots()[s].variance {
                            // −Γ_{K a}^M T_{…M…}
                            crate::tensor::Variance::Down => {
                                let g = &gamma[(k * n + a) * n + m];
                                acc.add_assign_product(&g.scale(-sign), v);
                            }
                            // +Γ_{K M}^a T^{…M…}
                            crate::tensor::Variance::Up => {
                                let g = &gamma[(k * n + m) * n + a];
                                acc.add_assign_product(&g.scale(sign), v);
                            }
                        }
                    }
                }
            }
        }
    }

    /// Raises every down slot of this block (inverse metric) in order.
    pub fn raise(&self, t: &DenseTensor<Jet3>, slot: usize) -> DenseTensor<Jet3> {
        t.raise_lower(slot, &self.g, &self.ginv).expect("raise")
    }

    /// Full curvature stack (`Paper` convention) as jets.
    pub fn curvature(&self) -> Result<CurvatureJets, GeomError> {
        let n = self.dim();
        let b = self.block;
        if n < 2 {
            return Err(GeomError::DimensionTooSmall {
                what: "curvature",
                dim: n,
                min: 2,
            });
        }
        let dgamma = self.gradient(&self.gamma); // ∂_I Γ_{JK}^L
        let gg = einsum("iml,jkm->ijkl", &[&self.gamma, &self.gamma])?;
        let swap = [1, 0, 2, 3];
        let riemann = dgamma
            .minus(&dgamma.permute(&swap)?)
            .plus(&gg)
            .minus(&gg.permute(&swap)?);
        let riemann_lowered = einsum("ijkm,ml->ijkl", &[&riemann, &self.g])?;
        let ricci = einsum("ikjk->ij", &[&riemann])?;
        let scalar = einsum("ij,ij->", &[&self.ginv, &ricci])?.as_scalar().clone();
        let dd = n as f64;
        let schouten = ricci.minus(&self.g.scale_by(&scalar).scale(1.0 / (2.0 * (dd - 1.0))));

        let (weyl, cotton) = if n >= 3 {
            let ds = self.cov_deriv(&schouten); // ∇_K S_{JI} at [K][J][I]
            let cotton = DenseTensor::from_fn(
                vec![Slot::down(n, b), Slot::down(n, b), Slot::down(n, b)],
                |ix| {
                    let (i, j, k) = (ix[0], ix[1], ix[2]);
                    ds.get(&[k, j, i]) - ds.get(&[j, k, i])
                },
            );
            let g = &self.g;
            let s = &schouten;
            // P_{IJKL} = g_{IK} S_{LJ}
            let p = |i: usize, j: usize, k: usize, l: usize| g.get(&[i, k]) * s.get(&[l, j]);
            let c = 1.0 / (dd - 2.0);
            let weyl = DenseTensor::from_fn(vec![Slot::down(n, b); 4], |ix| {
                let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
                let corr = p(i, j, k, l) - p(i, j, l, k) - p(j, i, k, l) + p(j, i, l, k);
                riemann_lowered.get(ix) - &corr.scale(c)
            });
            (Some(weyl), Some(cotton))
        } else {
            (None, None)
        };
        Ok(CurvatureJets {
            riemann,
            riemann_lowered,
            ricci,
            scalar,
            schouten,
            weyl,
            cotton,
        })
    }
}

/// Curvature tensors as jets, `Paper` convention.
#[derive(Debug, Clone)]
pub struct CurvatureJets {
    /// `R_{IJK}^L`
    pub riemann: DenseTensor<Jet3>,
    /// `R_{IJKL}`
    pub riemann_lowered: DenseTensor<Jet3>,
    pub ricci: DenseTensor<Jet3>,
    pub scalar: Jet3,
    pub schouten: DenseTensor<Jet3>,
    /// `C_{IJKL}`; `None` below dimension three.
    pub weyl: Option<DenseTensor<Jet3>>,
    /// `C_{IJK}`; `None` below dimension three.
    pub cotton: Option<DenseTensor<Jet3>>,
}

/// Evaluated curvature at a point in a chosen sign convention.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub point: Vec<f64>,
    pub convention: Convention,
    pub christoffel: DenseTensor,
    pub riemann: DenseTensor,
    pub riemann_lowered: DenseTensor,
    pub ricci: DenseTensor,
    pub scalar: f64,
    pub schouten: DenseTensor,
    pub cotton: Option<DenseTensor>,
    pub weyl: Option<DenseTensor>,
    pub metric: DenseTensor,
    pub inverse_metric: DenseTensor,
}

impl CurvatureBundle {
    pub fn from_jets(
        point: &[f64],
        geo: &LocalGeometry,
        jets: &CurvatureJets,
        convention: Convention,
    ) -> Self {
        let s = convention.sigma();
        CurvatureBundle {
            point: point.to_vec(),
            convention,
            christoffel: geo.gamma.values(),
            riemann: jets.riemann.values(),
            riemann_lowered: jets.riemann_lowered.values(),
            ricci: jets.ricci.values().scale(s),
            scalar: s * jets.scalar.value(),
            schouten: jets.schouten.values().scale(s),
            cotton: jets.cotton.as_ref().map(|c| c.values().scale(s)),
            weyl: jets.weyl.as_ref().map(|w| w.values()),
            metric: geo.g.values(),
            inverse_metric: geo.ginv.values(),
        }
    }

    /// Eigenvalues of `g^{-1} Ricci`, ascending (the Ricci "eigenvalues" of a
    /// Riemannian metric).
    pub fn ricci_eigenvalues(&self) -> Option<Vec<f64>> {
        let n = self.metric.dims()[0];
        linalg::generalized_eigenvalues(n, self.ricci.comps(), self.metric.comps())
    }

    pub fn max_weyl(&self) -> f64 {
        self.weyl.as_ref().map_or(0.0, |w| w.max_abs())
    }

    pub fn max_cotton(&self) -> f64 {
        self.cotton.as_ref().map_or(0.0, |c| c.max_abs())
    }
}

/// Christoffel symbols `Γ_{JK}^L` at `p`.
pub fn christoffel(field: &dyn MetricField, p: &[f64]) -> Result<DenseTensor, GeomError> {
    Ok(LocalGeometry::at_point(field, p)?.gamma.values())
}

/// Full curvature bundle at `p`.
pub fn curvature_bundle(
    field: &dyn MetricField,
    p: &[f64],
    convention: Convention,
) -> Result<CurvatureBundle, GeomError> {
    let geo = LocalGeometry::at_point(field, p)?;
    let jets = geo.curvature()?;
    Ok(CurvatureBundle::from_jets(p, &geo, &jets, convention))
}

/// Covariant derivative of a tensor field given as a function of coordinate
/// jets, evaluated at `p`.
pub fn cov_deriv(
    field: &dyn MetricField,
    tensor: impl Fn(&[Jet3]) -> DenseTensor<Jet3>,
    p: &[f64],
) -> Result<DenseTensor, GeomError> {
    let geo = LocalGeometry::at_point(field, p)?;
    let x = Jet3::seed_point(p)?;
    Ok(geo.cov_deriv(&tensor(&x)).values())
}

/// The two sides of the Cotton–Weyl divergence identity at a point.
#[derive(Debug, Clone)]
pub struct CottonWeylSides {
    /// `(D−3) C_{IJK}`.
    pub cotton: DenseTensor,
    /// `(D−2) ∇_L C_{IJK}^L`, the divergence on the last Weyl slot with the
    /// free indices in written order.
    pub literal: DenseTensor,
    /// `(D−2) ∇_L C_{JKI}^L`: the same divergence with the free indices
    /// cycled. With `R_{IJK}^L` differentiating on `I, J`, the contracted
    /// Bianchi identity gives `∇^L C_{IJKL} ∝ 2∇_{[J}S_{I]K} = C_{KIJ}`, so
    /// this is the arrangement that actually equals the Cotton side.
    pub cyclic: DenseTensor,
}

impl CottonWeylSides {
    /// `max|lhs − rhs| / max(|lhs|, |rhs|)` for either arrangement.
    pub fn relative(&self, rhs: &DenseTensor) -> f64 {
        let scale = self.cotton.max_abs().max(rhs.max_abs()).max(1e-30);
        self.cotton.max_abs_diff(rhs) / scale
    }
}

/// Both sides of `(D−3) C_{IJK} = (D−2) ∇_L C_{IJK}^L` at `p` (`Paper`
/// convention).
pub fn cotton_weyl_sides(field: &dyn MetricField, p: &[f64]) -> Result<CottonWeylSides, GeomError> {
    cotton_weyl_sides_of(&LocalGeometry::at_point(field, p)?)
}

/// [`cotton_weyl_sides`] for an already assembled local geometry, such as a
/// Kaluza–Klein total space.
pub fn cotton_weyl_sides_of(geo: &LocalGeometry) -> Result<CottonWeylSides, GeomError> {
    let jets = geo.curvature()?;
    let n = geo.dim();
    if n < 4 {
        return Err(GeomError::DimensionTooSmall {
            what: "Cotton-Weyl identity",
            dim: n,
            min: 4,
        });
    }
    let weyl = jets.weyl.as_ref().expect("dim >= 3");
    let mixed = geo.raise(weyl, 3); // C_{IJK}^L
    let div = einsum("lijkl->ijk", &[&geo.cov_deriv(&mixed)])?.values();
    let dd = n as f64;
    let cotton = jets.cotton.as_ref().expect("dim >= 3").values().scale(dd - 3.0);
    // cyclic[i,j,k] = div[j,k,i]
    let cyclic = div.permute(&[2, 0, 1])?.scale(dd - 2.0);
    Ok(CottonWeylSides {
        cotton,
        literal: div.scale(dd - 2.0),
        cyclic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug)]
    struct Conformal {
        dim: usize,
    }

    /// e^{2 x⁰} δ
    impl MetricField for Conformal {
        fn dim(&self) -> usize {
            self.dim
        }
        fn components(&self, x: &[Jet3]) -> Result<Vec<Jet3>, GeomError> {
            let f = (&x[0] * 2.0).exp();
            let z = x[0].zero_like();
            Ok((0..self.dim * self.dim)
                .map(|k| if k / self.dim == k % self.dim { f.clone() } else { z.clone() })
                .collect())
        }
        fn domain(&self) -> Domain {
            Domain::cube(self.dim, 1.0)
        }
    }

    #[derive(Debug)]
    struct Sphere2;

    /// dθ² + sin²θ dφ²
    impl MetricField for Sphere2 {
        fn dim(&self) -> usize {
            2
        }
        fn components(&self, x: &[Jet3]) -> Result<Vec<Jet3>, GeomError> {
            let s = x[0].sin();
            let one = x[0].constant_like(1.0);
            let z = x[0].zero_like();
            Ok(vec![one, z.clone(), z, &s * &s])
        }
        fn domain(&self) -> Domain {
            Domain {
                lo: vec![0.1, -3.0],
                hi: vec![3.0, 3.0],
                ball: None,
            }
        }
    }

    #[test]
    fn sphere_christoffel_and_sign() {
        let p = [std::f64::consts::FRAC_PI_4, 0.3];
        let gamma = christoffel(&Sphere2, &p).unwrap();
        // Γ_{φφ}^θ = −sinθ cosθ
        assert!((gamma.get(&[1, 1, 0]) + 0.5).abs() < 1e-14);
        // Γ_{θφ}^φ = cotθ
        assert!((gamma.get(&[0, 1, 1]) - 1.0).abs() < 1e-14);
        let paper = curvature_bundle(&Sphere2, &p, Convention::Paper).unwrap();
        let std = curvature_bundle(&Sphere2, &p, Convention::Standard).unwrap();
        assert!((paper.scalar + 2.0).abs() < 1e-12);
        assert!((std.scalar - 2.0).abs() < 1e-12);
        assert!(paper.weyl.is_none());
    }

    #[test]
    fn conformal_christoffel_closed_form() {
        // Γ_{JK}^L = δ_J^L ∂_Kφ + δ_K^L ∂_Jφ − δ_{JK} ∂^Lφ with φ = x⁰.
        let p = [0.2, -0.1, 0.3];
        let gamma = christoffel(&Conformal { dim: 3 }, &p).unwrap();
        let dphi = [1.0, 0.0, 0.0];
        for idx in multi_indices(&[3, 3, 3]) {
            let (j, k, l) = (idx[0], idx[1], idx[2]);
            let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
            let expect = d(j, l) * dphi[k] + d(k, l) * dphi[j] - d(j, k) * dphi[l];
            assert!((gamma.get(&idx) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn conformally_flat_has_zero_weyl_and_cotton() {
        for dim in 3..=5 {
            let b = curvature_bundle(&Conformal { dim }, &[0.1; 5][..dim], Convention::Paper).unwrap();
            assert!(b.max_cotton() < 1e-10, "cotton {}", b.max_cotton());
            if dim > 3 {
                assert!(b.max_weyl() < 1e-10, "weyl {}", b.max_weyl());
            }
        }
    }

    #[test]
    fn metricity_and_constant_scalar() {
        let f = Conformal { dim: 4 };
        let p = [0.3, 0.1, -0.2, 0.0];
        let geo = LocalGeometry::at_point(&f, &p).unwrap();
        assert!(geo.cov_deriv(&geo.g).max_abs() < 1e-12);
        assert!(geo.cov_deriv(&geo.ginv).max_abs() < 1e-12);
        let c = DenseTensor::scalar(geo.g.comps()[0].constant_like(3.0));
        assert_eq!(geo.cov_deriv(&c).max_abs(), 0.0);
    }

    #[test]
    fn domain_sampling_respects_shrink() {
        let d = Domain::ball(3, 1.0);
        let mut rng = XorShift64Star::new(1);
        for _ in 0..200 {
            let p = d.sample(&mut rng);
            assert!(p.iter().map(|x| x * x).sum::<f64>() <= 0.95f64.powi(2) + 1e-15);
        }
    }

    #[test]
    fn cotton_weyl_identity_holds_with_cycled_indices() {
        let mut rng = XorShift64Star::new(21);
        for dim in [4, 5] {
            let field = crate::models::PolyMetric::random_perturbation(dim, 2, 0.1, 0.5, &mut rng);
            let p = field.domain().sample(&mut rng);
            let sides = cotton_weyl_sides(&field, &p).unwrap();
            assert!(sides.cotton.max_abs() > 1e-4, "{}", sides.cotton.max_abs());
            assert!(sides.relative(&sides.cyclic) < 1e-8, "{}", sides.relative(&sides.cyclic));
            assert!(sides.relative(&sides.literal) > 0.1);
        }
    }
}
