//! Non-Abelian Kaluza-Klein assembly.
//!
//! A [`KKSpec`] bundles an external metric `g_{μν}(x)`, an internal metric
//! `κ_{ij}(y)`, Killing vectors `K_𝖺^i(y)`, a gauge potential `A^𝖺_μ(x)` and
//! structure constants `c_{𝖻𝖼}^𝖺`. The total metric is
//!
//! ```text
//! 𝐠_{μν} = g_{μν} + A^𝖺_μ A^𝖻_ν K_𝖺^k K_𝖻^l κ_{kl}
//! 𝐠_{μj} = A^𝖺_μ K_𝖺^k κ_{kj}
//! 𝐠_{ij} = κ_{ij}
//! ```
//!
//! Everything at a [`KKPoint`] is evaluated as jets in all `D = d + c`
//! variables (external first), so that mixed derivatives such as
//! `∂_μ∂_i∂_j 𝐠` are available to the direct D-dimensional computation.

mod spec_json;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use spec_json::{load_spec, parse_spec, SpecDocument, SpecError};

use crate::geom::{Domain, GeomError, LocalGeometry, MetricField};
use crate::jet::Jet3;
use crate::rng::XorShift64Star;
use crate::tensor::{einsum, multi_indices, strides, Block, DenseTensor, Slot, Variance};

/// Killing vectors `K_𝖺^i` on the internal chart, stored `[𝖺][i]`.
pub trait FrameField: Send + Sync + fmt::Debug {
    fn count(&self) -> usize;
    fn dim(&self) -> usize;
    fn components(&self, y: &[Jet3]) -> Result<Vec<Jet3>, GeomError>;
}

/// Algebra-valued one-form `A^𝖺_μ` on the external chart, stored `[𝖺][μ]`.
pub trait GaugeField: Send + Sync + fmt::Debug {
    fn count(&self) -> usize;
    fn dim(&self) -> usize;
    fn components(&self, x: &[Jet3]) -> Result<Vec<Jet3>, GeomError>;
}

/// `A ≡ 0`.
#[derive(Debug, Clone)]
pub struct ZeroGauge {
    pub count: usize,
    pub dim: usize,
}

impl GaugeField for ZeroGauge {
    fn count(&self) -> usize {
        self.count
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn components(&self, x: &[Jet3]) -> Result<Vec<Jet3>, GeomError> {
        Ok(vec![x[0].zero_like(); self.count * self.dim])
    }
}

/// A point of the total space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KKPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl KKPoint {
    pub fn concat(&self) -> Vec<f64> {
        let mut p = self.x.clone();
        p.extend_from_slice(&self.y);
        p
    }
}

/// Validation thresholds for [`KKSpec::validate`].
pub const KILLING_TOL: f64 = 1e-10;
pub const JACOBI_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct KKSpec {
    pub name: String,
    pub external: Arc<dyn MetricField>,
    pub internal: Arc<dyn MetricField>,
    pub killing: Arc<dyn FrameField>,
    pub gauge: Arc<dyn GaugeField>,
    /// `c_{𝖻𝖼}^𝖺` stored `[𝖻][𝖼][𝖺]`.
    pub structure: Vec<f64>,
}

/// Result of the validation pass.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SpecValidation {
    pub max_killing: f64,
    pub max_commutator: f64,
    pub max_antisymmetry: f64,
    pub max_jacobi: f64,
}

impl SpecValidation {
    pub fn passes(&self) -> bool {
        self.max_killing <= KILLING_TOL
            && self.max_commutator <= KILLING_TOL
            && self.max_antisymmetry <= JACOBI_TOL
            && self.max_jacobi <= JACOBI_TOL
    }
}

impl KKSpec {
    pub fn d(&self) -> usize {
        self.external.dim()
    }
    pub fn c(&self) -> usize {
        self.internal.dim()
    }
    pub fn n(&self) -> usize {
        self.killing.count()
    }
    pub fn total_dim(&self) -> usize {
        self.d() + self.c()
    }

    pub fn structure_constant(&self, b: usize, c: usize, a: usize) -> f64 {
        let n = self.n();
        self.structure[(b * n + c) * n + a]
    }

    pub fn check_dimensions(&self) -> Result<(), GeomError> {
        let (d, c, n) = (self.d(), self.c(), self.n());
        let bad = |m: String| Err(GeomError::InvalidParameter(m));
        if d == 0 || c == 0 {
            return bad("external and internal dimensions must be positive".into());
        }
        if self.killing.dim() != c {
            return bad(format!("Killing frame on {}-dim chart, internal is {c}", self.killing.dim()));
        }
        if self.gauge.dim() != d || self.gauge.count() != n {
            return bad(format!(
                "gauge field has {} components on {} dims, expected {n} on {d}",
                self.gauge.count(),
                self.gauge.dim()
            ));
        }
        if self.structure.len() != n * n * n {
            return bad(format!("{} structure constants for n = {n}", self.structure.len()));
        }
        if d + c > crate::jet::MAX_DIM {
            return bad(format!("total dimension {} exceeds {}", d + c, crate::jet::MAX_DIM));
        }
        Ok(())
    }

    /// Algebraic checks of the structure constants and Killing/closure
    /// checks at `points` sampled internal points.
    pub fn validate(&self, points: usize, seed: u64) -> Result<SpecValidation, GeomError> {
        self.check_dimensions()?;
        let n = self.n();
        let cs = |b, c, a| self.structure_constant(b, c, a);
        let mut v = SpecValidation::default();
        for b in 0..n {
            for c in 0..n {
                for a in 0..n {
                    v.max_antisymmetry = v.max_antisymmetry.max((cs(b, c, a) + cs(c, b, a)).abs());
                }
            }
        }
        // c_{ab}^e c_{ec}^f + cyclic = 0
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for f in 0..n {
                        let s: f64 = (0..n)
                            .map(|e| {
                                cs(a, b, e) * cs(e, c, f)
                                    + cs(b, c, e) * cs(e, a, f)
                                    + cs(c, a, e) * cs(e, b, f)
                            })
                            .sum();
                        v.max_jacobi = v.max_jacobi.max(s.abs());
                    }
                }
            }
        }
        let mut rng = XorShift64Star::new(seed);
        let dom = self.internal.domain();
        for _ in 0..points {
            let y = dom.sample(&mut rng);
            let (lk, comm) = killing_residuals(self, &y)?;
            v.max_killing = v.max_killing.max(lk);
            v.max_commutator = v.max_commutator.max(comm);
        }
        Ok(v)
    }

    /// Uniform sample in the (shrunk) product domain.
    pub fn sample_point(&self, rng: &mut XorShift64Star) -> KKPoint {
        KKPoint {
            x: self.external.domain().sample(rng),
            y: self.internal.domain().sample(rng),
        }
    }

    /// `points` seeded sample points; the stream depends only on `seed`.
    pub fn sample_points(&self, points: usize, seed: u64) -> Vec<KKPoint> {
        let mut rng = XorShift64Star::new(seed);
        (0..points).map(|_| self.sample_point(&mut rng)).collect()
    }

    pub fn external_domain(&self) -> Domain {
        self.external.domain()
    }
}

/// Max `|L_{K_𝖺} κ|` and max `|[K_𝖺, K_𝖻] − c_{𝖺𝖻}^𝖼 K_𝖼|` at `y`.
pub fn killing_residuals(spec: &KKSpec, y: &[f64]) -> Result<(f64, f64), GeomError> {
    let c = spec.c();
    let n = spec.n();
    let ys = Jet3::seed_point(y)?;
    let kappa = spec.internal.components(&ys)?;
    let k = spec.killing.components(&ys)?;
    let mut lie = 0.0f64;
    for a in 0..n {
        for i in 0..c {
            for j in 0..c {
                let mut s = 0.0;
                for m in 0..c {
                    let km = k[a * c + m].value();
                    s += km * kappa[i * c + j].derivative(&[m])
                        + kappa[m * c + j].value() * k[a * c + m].derivative(&[i])
                        + kappa[i * c + m].value() * k[a * c + m].derivative(&[j]);
                }
                lie = lie.max(s.abs());
            }
        }
    }
    let mut comm = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            for i in 0..c {
                let mut s = 0.0;
                for m in 0..c {
                    s += k[a * c + m].value() * k[b * c + i].derivative(&[m])
                        - k[b * c + m].value() * k[a * c + i].derivative(&[m]);
                }
                for e in 0..n {
                    s -= spec.structure_constant(a, b, e) * k[e * c + i].value();
                }
                comm = comm.max(s.abs());
            }
        }
    }
    Ok((lie, comm))
}

/// Index pattern for [`KKLocal::project`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjSlot {
    ExternalUp,
    InternalDown,
}

/// All Kaluza-Klein data at one point, as jets in the `D` total variables.
#[derive(Debug, Clone)]
pub struct KKLocal {
    pub d: usize,
    pub c: usize,
    pub n: usize,
    pub point: KKPoint,
    /// External geometry (block `External`, variables `0..d`).
    pub ext: LocalGeometry,
    /// Internal geometry (block `Internal`, variables `d..D`).
    pub int: LocalGeometry,
    /// `K_𝖺^i`, slots `(algebra down, internal up)`.
    pub killing: DenseTensor<Jet3>,
    /// `A^𝖺_μ`, slots `(algebra up, external down)`.
    pub gauge: DenseTensor<Jet3>,
    /// `c_{𝖻𝖼}^𝖺`.
    pub structure: DenseTensor<Jet3>,
    /// `A^i_μ = K_𝖺^i A^𝖺_μ`, slots `(external down, internal up)`.
    pub gauge_int: DenseTensor<Jet3>,
    /// `∂_j A^k_μ` at `[j][μ][k]`.
    gauge_int_grad: DenseTensor<Jet3>,
    /// `F^𝖺_{μν}`.
    pub field_alg: DenseTensor<Jet3>,
    /// `F^i_{μν} = K_𝖺^i F^𝖺_{μν}`.
    pub field_int: DenseTensor<Jet3>,
}

impl KKLocal {
    pub fn new(spec: &KKSpec, point: &KKPoint) -> Result<KKLocal, GeomError> {
        spec.check_dimensions()?;
        let (d, c, n) = (spec.d(), spec.c(), spec.n());
        if !spec.external.domain().contains(&point.x) || !spec.internal.domain().contains(&point.y) {
            return Err(GeomError::OutsideDomain { point: point.concat() });
        }
        let all = Jet3::seed_point(&point.concat())?;
        let (xs, ys) = all.split_at(d);
        let ext = LocalGeometry::from_field(spec.external.as_ref(), xs, Block::External, 0)?;
        let int = LocalGeometry::from_field(spec.internal.as_ref(), ys, Block::Internal, d)?;
        let killing = DenseTensor::new(
            vec![Slot::down(n, Block::Algebra), Slot::up(c, Block::Internal)],
            spec.killing.components(ys)?,
        )?;
        let gauge = DenseTensor::new(
            vec![Slot::up(n, Block::Algebra), Slot::down(d, Block::External)],
            spec.gauge.components(xs)?,
        )?;
        let proto = all[0].zero_like();
        let structure = DenseTensor::new(
            vec![
                Slot::down(n, Block::Algebra),
                Slot::down(n, Block::Algebra),
                Slot::up(n, Block::Algebra),
            ],
            spec.structure.iter().map(|&v| proto.constant_like(v)).collect(),
        )?;
        let gauge_int = crate::tensor::einsum_in("ai,am->mi", &[&killing, &gauge], &proto)?;
        let gauge_int_grad = int.gradient(&gauge_int);

        // F^𝖺_{μν} = ∂_μ A^𝖺_ν − ∂_ν A^𝖺_μ − c_{𝖻𝖼}^𝖺 A^𝖻_μ A^𝖼_ν
        let da = ext.gradient(&gauge); // [μ][𝖺][ν] = ∂_μ A^𝖺_ν
        let caa = crate::tensor::einsum_in("bca,bm,cn->amn", &[&structure, &gauge, &gauge], &proto)?;
        let field_alg = DenseTensor::from_fn(
            vec![
                Slot::up(n, Block::Algebra),
                Slot::down(d, Block::External),
                Slot::down(d, Block::External),
            ],
            |ix| {
                let (a, m, nu) = (ix[0], ix[1], ix[2]);
                da.get(&[m, a, nu]) - da.get(&[nu, a, m]) - caa.get(ix)
            },
        );
        let field_int = crate::tensor::einsum_in("ai,amn->imn", &[&killing, &field_alg], &proto)?;
        Ok(KKLocal {
            d,
            c,
            n,
            point: point.clone(),
            ext,
            int,
            killing,
            gauge,
            structure,
            gauge_int,
            gauge_int_grad,
            field_alg,
            field_int,
        })
    }

    pub fn total_dim(&self) -> usize {
        self.d + self.c
    }

    pub fn proto(&self) -> Jet3 {
        self.ext.g.comps()[0].zero_like()
    }

    /// `𝗀_{𝖺𝖻} = K_𝖺^i K_𝖻^j κ_{ij}`.
    pub fn gbar(&self) -> DenseTensor<Jet3> {
        let kl = einsum("ai,ij->aj", &[&self.killing, &self.int.g]).expect("K κ");
        // Both algebra slots down: contract the internal index by hand.
        let (n, c) = (self.n, self.c);
        DenseTensor::from_fn(
            vec![Slot::down(n, Block::Algebra), Slot::down(n, Block::Algebra)],
            |ix| {
                let mut s = self.proto();
                for j in 0..c {
                    s.add_assign_product(kl.get(&[ix[0], j]), self.killing.get(&[ix[1], j]));
                }
                s
            },
        )
    }

    /// The assembled `D × D` metric jets (block `Total`).
    pub fn total_metric(&self) -> DenseTensor<Jet3> {
        let (d, c) = (self.d, self.c);
        let dd = d + c;
        // B_{μj} = A^i_μ κ_{ij}
        let b = einsum("mi,ij->mj", &[&self.gauge_int, &self.int.g]).expect("A κ");
        DenseTensor::from_fn(vec![Slot::down(dd, Block::Total); 2], |ix| {
            let (i, j) = (ix[0], ix[1]);
            match (i < d, j < d) {
                (true, true) => {
                    let mut s = self.ext.g.get(&[i, j]).clone();
                    for k in 0..c {
                        s.add_assign_product(b.get(&[i, k]), self.gauge_int.get(&[j, k]));
                    }
                    s
                }
                (true, false) => b.get(&[i, j - d]).clone(),
                (false, true) => b.get(&[j, i - d]).clone(),
                (false, false) => self.int.g.get(&[i - d, j - d]).clone(),
            }
        })
    }

    /// Geometry of the assembled metric.
    pub fn total_geometry(&self) -> Result<LocalGeometry, GeomError> {
        LocalGeometry::new(self.total_metric(), Block::Total, 0)
    }

    /// `L_{A_κ} t` for every external `κ`, new down slot first. Internal
    /// slots transform; external and algebra slots are labels.
    pub fn lie_gauge(&self, t: &DenseTensor<Jet3>) -> DenseTensor<Jet3> {
        let (d, c) = (self.d, self.c);
        let st = strides(t.slots());
        let len = t.comps().len();
        let dims = t.dims();
        let mut slots = vec![Slot::down(d, Block::External)];
        slots.extend_from_slice(t.slots());
        let mut comps = Vec::with_capacity(d * len);
        let tc = t.comps();
        let internal: Vec<usize> = (0..t.rank())
            .filter(|&s| t.slots()[s].block == Block::Internal)
            .collect();
        for kap in 0..d {
            for (lin, idx) in multi_indices(&dims).enumerate() {
                let mut acc = self.proto().truncate(tc[lin].order().saturating_sub(1));
                for k in 0..c {
                    acc.add_assign_product(self.gauge_int.get(&[kap, k]), &tc[lin].partial(d + k));
                }
                for &s in &internal {
                    let i = idx[s];
                    let base = lin - i * st[s];
                    for k in 0..c {
                        let v = &tc[base + k * st[s]];
                        match t.slots()[s].variance {
                            // + T_{…k…} ∂_i A^k
                            Variance::Down => {
                                acc.add_assign_product(v, self.gauge_int_grad.get(&[i, kap, k]))
                            }
                            // − T^{…k…} ∂_k A^i
                            Variance::Up => acc.add_assign_product(
                                &v.scale(-1.0),
                                self.gauge_int_grad.get(&[k, kap, i]),
                            ),
                        }
                    }
                }
                comps.push(acc);
            }
        }
        DenseTensor::new(slots, comps).expect("lie shape")
    }

    /// `∇̂_κ t = ∇_κ t − L_{A_κ} t`, new down slot first.
    pub fn hat(&self, t: &DenseTensor<Jet3>) -> DenseTensor<Jet3> {
        self.ext.cov_deriv(t).minus(&self.lie_gauge(t))
    }

    /// `∇̂_κ F^i_{μν}` at `[κ][i][μ][ν]`.
    pub fn hatted_deriv_field(&self) -> DenseTensor<Jet3> {
        self.hat(&self.field_int)
    }

    /// `K_𝖺^i(∇_κ F^𝖺_{μν} − c_{𝖻𝖼}^𝖺 A^𝖻_κ F^𝖼_{μν})`, the gauge-covariant
    /// form of the same derivative.
    pub fn gauge_covariant_deriv_field(&self) -> DenseTensor<Jet3> {
        let p = self.proto();
        let nf = self.ext.cov_deriv(&self.field_alg); // [κ][𝖺][μ][ν]
        let caf = crate::tensor::einsum_in("bca,bk,cmn->kamn", &[&self.structure, &self.gauge, &self.field_alg], &p)
            .expect("c A F");
        let inner = nf.minus(&caf);
        crate::tensor::einsum_in("ai,kamn->kimn", &[&self.killing, &inner], &p).expect("K(...)")
    }

    /// Horizontal frame `e_μ = ∂_μ − A^i_μ ∂_i`, `e_i = ∂_i` as a row-major
    /// `D × D` matrix `E[a][J]` (values).
    pub fn frame(&self) -> Vec<f64> {
        let (d, c) = (self.d, self.c);
        let dd = d + c;
        let mut e = vec![0.0; dd * dd];
        for a in 0..dd {
            e[a * dd + a] = 1.0;
        }
        for m in 0..d {
            for i in 0..c {
                e[m * dd + d + i] = -self.gauge_int.get(&[m, i]).value();
            }
        }
        e
    }

    /// Lower-dimensional components of an all-down `D`-dimensional tensor:
    /// `ExternalUp` slots are raised with the full inverse metric and
    /// restricted to the external range, `InternalDown` slots are restricted
    /// to the internal range.
    pub fn project(
        &self,
        t: &DenseTensor,
        total_inverse: &DenseTensor,
        pattern: &[ProjSlot],
    ) -> Result<DenseTensor, GeomError> {
        let (d, c) = (self.d, self.c);
        let dd = d + c;
        if pattern.len() != t.rank() || t.slots().iter().any(|s| s.dim != dd || s.variance != Variance::Down) {
            return Err(GeomError::InvalidParameter(format!(
                "pattern of length {} for tensor with slots {:?}",
                pattern.len(),
                t.slots()
            )));
        }
        let mut cur = t.clone();
        for (s, p) in pattern.iter().enumerate() {
            if *p == ProjSlot::ExternalUp {
                let g = DenseTensor::<f64>::zeros(vec![Slot::down(dd, Block::Total); 2], &0.0);
                cur = cur.raise_lower(s, &g, total_inverse)?;
            }
        }
        let slots: Vec<Slot> = pattern
            .iter()
            .map(|p| match p {
                ProjSlot::ExternalUp => Slot::up(d, Block::External),
                ProjSlot::InternalDown => Slot::down(c, Block::Internal),
            })
            .collect();
        Ok(DenseTensor::from_fn(slots, |ix| {
            let full: Vec<usize> = ix
                .iter()
                .zip(pattern)
                .map(|(&i, p)| if *p == ProjSlot::ExternalUp { i } else { d + i })
                .collect();
            *cur.get(&full)
        }))
    }
}

/// Assembled metric components at `point` (values).
pub fn assemble_metric(spec: &KKSpec, point: &KKPoint) -> Result<DenseTensor, GeomError> {
    Ok(KKLocal::new(spec, point)?.total_metric().values())
}

/// `F^𝖺_{μν}` and `F^i_{μν}` at `point` (values).
pub fn gauge_curvature(spec: &KKSpec, point: &KKPoint) -> Result<(DenseTensor, DenseTensor), GeomError> {
    let l = KKLocal::new(spec, point)?;
    Ok((l.field_alg.values(), l.field_int.values()))
}

/// `∇̂_κ F^i_{μν}` at `point` (values), slots `[κ][i][μ][ν]`.
pub fn hatted_deriv_f(spec: &KKSpec, point: &KKPoint) -> Result<DenseTensor, GeomError> {
    Ok(KKLocal::new(spec, point)?.hatted_deriv_field().values())
}
