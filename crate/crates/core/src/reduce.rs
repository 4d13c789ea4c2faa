//! Reduction formulas for the Cotton and Weyl tensors of a Kaluza-Klein
//! metric, and a comparator that checks each of them against the directly
//! computed `D`-dimensional tensor.
//!
//! Every formula is assembled term by term from lower-dimensional data in
//! the index order of its left-hand side. Components are contravariant in
//! external and covariant in internal indices, which are the components
//! that transform as lower-dimensional tensors; in the horizontal frame the
//! metric is block diagonal, so external indices are moved with `g` alone.
//!
//! The formulas are written in the `Paper` sign convention. Under the
//! standard convention the curvature terms flip while the gauge terms do
//! not, so the comparison is only expected to hold in the former.

use serde::{Deserialize, Serialize};

use crate::geom::{Convention, GeomError};
use crate::jet::Jet3;
use crate::kk::{KKLocal, ProjSlot};
use crate::tensor::linalg::min_pivot;
use crate::tensor::{einsum, Bracket, DenseTensor, Scalar};
use crate::verify::{g_wedge, gg_bracket, Balance, PointResidual, Reduced};

/// Smallest pivot (relative to the largest metric entry) of the assembled
/// metric accepted by the comparator.
pub const SINGULAR_PIVOT: f64 = 1e-8;

/// Variant name of a formula evaluated with the sign flips that the
/// two-path comparison requires.
pub const SIGN_CORRECTED: &str = "sign-corrected";

/// Terms of `A.Cmunukappa` whose printed sign disagrees with the direct
/// computation.
const CMUNUKAPPA_FLIPS: &[&str] = &["g ∇̂F²"];
/// Terms of `A.Cmunuk` whose printed sign disagrees with the direct
/// computation.
const CMUNUK_FLIPS: &[&str] = &["−½ ∇̂∇̂F", "½ F R"];
/// Term of `B.Ricci` whose printed sign disagrees with the direct computation.
const RICCI_FLIPS: &[&str] = &["½ F F"];
/// Term of `B.6th` whose printed sign disagrees with the direct computation.
const SIXTH_FLIPS: &[&str] = &["−¼ F F"];

/// One displayed reduction formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormulaId {
    #[serde(rename = "A.Cmu")]
    CottonTraceExt,
    #[serde(rename = "A.Ci")]
    CottonTraceInt,
    #[serde(rename = "A.Cmunukappa")]
    CottonExt,
    #[serde(rename = "A.Cijk")]
    CottonInt,
    #[serde(rename = "A.Cmunuk")]
    CottonExtExtInt,
    #[serde(rename = "A.Cijkappa")]
    CottonIntIntExt,
    #[serde(rename = "A.Cmujk")]
    CottonExtIntInt,
    #[serde(rename = "A.Cinukappa")]
    CottonIntExtExt,
    #[serde(rename = "B.C")]
    WeylScalar,
    #[serde(rename = "B.Cmunu")]
    WeylTraceExt,
    #[serde(rename = "B.Cij")]
    WeylTraceInt,
    #[serde(rename = "B.Cmuj")]
    WeylTraceMixed,
    #[serde(rename = "B.GaussExt")]
    GaussExt,
    #[serde(rename = "B.GaussInt")]
    GaussInt,
    #[serde(rename = "B.CodazziExt")]
    CodazziExt,
    #[serde(rename = "B.CodazziInt")]
    CodazziInt,
    #[serde(rename = "B.Ricci")]
    Ricci,
    #[serde(rename = "B.6th")]
    Sixth,
    #[serde(rename = "B.GaussExt-d2")]
    GaussExtD2,
    #[serde(rename = "B.GaussInt-c2")]
    GaussIntC2,
}

impl FormulaId {
    pub const ALL: [FormulaId; 20] = [
        FormulaId::CottonTraceExt,
        FormulaId::CottonTraceInt,
        FormulaId::CottonExt,
        FormulaId::CottonInt,
        FormulaId::CottonExtExtInt,
        FormulaId::CottonIntIntExt,
        FormulaId::CottonExtIntInt,
        FormulaId::CottonIntExtExt,
        FormulaId::WeylScalar,
        FormulaId::WeylTraceExt,
        FormulaId::WeylTraceInt,
        FormulaId::WeylTraceMixed,
        FormulaId::GaussExt,
        FormulaId::GaussInt,
        FormulaId::CodazziExt,
        FormulaId::CodazziInt,
        FormulaId::Ricci,
        FormulaId::Sixth,
        FormulaId::GaussExtD2,
        FormulaId::GaussIntC2,
    ];

    pub fn tag(self) -> &'static str {
        use FormulaId::*;
        match self {
            CottonTraceExt => "A.Cmu",
            CottonTraceInt => "A.Ci",
            CottonExt => "A.Cmunukappa",
            CottonInt => "A.Cijk",
            CottonExtExtInt => "A.Cmunuk",
            CottonIntIntExt => "A.Cijkappa",
            CottonExtIntInt => "A.Cmujk",
            CottonIntExtExt => "A.Cinukappa",
            WeylScalar => "B.C",
            WeylTraceExt => "B.Cmunu",
            WeylTraceInt => "B.Cij",
            WeylTraceMixed => "B.Cmuj",
            GaussExt => "B.GaussExt",
            GaussInt => "B.GaussInt",
            CodazziExt => "B.CodazziExt",
            CodazziInt => "B.CodazziInt",
            Ricci => "B.Ricci",
            Sixth => "B.6th",
            GaussExtD2 => "B.GaussExt-d2",
            GaussIntC2 => "B.GaussInt-c2",
        }
    }

    pub fn from_tag(tag: &str) -> Option<FormulaId> {
        FormulaId::ALL.into_iter().find(|f| f.tag() == tag)
    }

    /// Projection pattern of the left-hand side.
    pub fn pattern(self) -> &'static [ProjSlot] {
        use FormulaId::*;
        use ProjSlot::{ExternalUp as U, InternalDown as I};
        match self {
            CottonTraceExt => &[U],
            CottonTraceInt => &[I],
            CottonExt => &[U, U, U],
            CottonInt => &[I, I, I],
            CottonExtExtInt => &[U, U, I],
            CottonIntIntExt => &[I, I, U],
            CottonExtIntInt => &[U, I, I],
            CottonIntExtExt => &[I, U, U],
            WeylScalar => &[],
            WeylTraceExt => &[U, U],
            WeylTraceInt => &[I, I],
            WeylTraceMixed => &[U, I],
            GaussExt | GaussExtD2 => &[U, U, U, U],
            GaussInt | GaussIntC2 => &[I, I, I, I],
            CodazziExt => &[I, U, U, U],
            CodazziInt => &[U, I, I, I],
            Ricci => &[U, U, I, I],
            Sixth => &[U, I, U, I],
        }
    }
}

/// Right-hand side of one formula as named terms.
#[derive(Debug, Clone)]
pub struct ReductionSide {
    pub id: FormulaId,
    pub variant: Option<&'static str>,
    pub terms: Vec<(&'static str, DenseTensor)>,
}

impl ReductionSide {
    fn new(id: FormulaId) -> ReductionSide {
        ReductionSide {
            id,
            variant: None,
            terms: Vec::new(),
        }
    }

    fn term(mut self, name: &'static str, t: DenseTensor) -> ReductionSide {
        self.terms.push((name, t));
        self
    }

    /// The same formula with the named terms negated, reported as the
    /// `sign-corrected` variant.
    fn sign_corrected(&self, flipped: &[&str]) -> ReductionSide {
        let terms = self
            .terms
            .iter()
            .map(|(n, t)| {
                if flipped.contains(n) {
                    (*n, t.scale(-1.0))
                } else {
                    (*n, t.clone())
                }
            })
            .collect();
        ReductionSide {
            id: self.id,
            variant: Some(SIGN_CORRECTED),
            terms,
        }
    }

    /// Sum of the terms.
    pub fn value(&self) -> DenseTensor {
        let mut it = self.terms.iter();
        let first = it.next().expect("formula without terms").1.clone();
        it.fold(first, |acc, (_, t)| acc.plus(t))
    }
}

/// Formulas that do not apply at the given dimensions, with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct Skipped {
    pub id: FormulaId,
    pub reason: String,
}

fn ein(expr: &str, ops: &[&DenseTensor]) -> DenseTensor {
    einsum(expr, ops).unwrap_or_else(|e| panic!("formula contraction `{expr}`: {e}"))
}

fn ein_jet(expr: &str, ops: &[&DenseTensor<Jet3>]) -> DenseTensor<Jet3> {
    einsum(expr, ops).unwrap_or_else(|e| panic!("formula contraction `{expr}`: {e}"))
}

fn anti(t: &DenseTensor, a: usize, b: usize) -> DenseTensor {
    t.brackets(a, b, Bracket::Antisym).expect("antisymmetrized pair")
}

fn sym(t: &DenseTensor, a: usize, b: usize) -> DenseTensor {
    t.brackets(a, b, Bracket::Sym).expect("symmetrized pair")
}

fn perm(t: &DenseTensor, order: &[usize]) -> DenseTensor {
    t.permute(order).expect("permutation")
}

/// Lower-dimensional ingredients shared by all formulas at one point.
struct Parts<'a> {
    r: &'a Reduced,
    conv: Convention,
    sigma: f64,
    d: f64,
    c: f64,
    /// `D`
    big: f64,
    g: DenseTensor,
    gi: DenseTensor,
    kappa: DenseTensor,
    kappa_inv: DenseTensor,
    /// `F_i^{μν}` (jets)
    f_ir: DenseTensor<Jet3>,
    /// `F^{iμν}` (jets)
    f_ur: DenseTensor<Jet3>,
    /// `F_{iμ}^ν`
    f_mix: DenseTensor,
    /// `F_i^κ_μ`
    f_mid: DenseTensor,
    /// `U_i^κ = ∇̂_λ F_i^{κλ}` (jets)
    u: DenseTensor<Jet3>,
    /// `V^i_λ = ∇̂^ρ F^i_{λρ}`
    v: DenseTensor,
    /// `F^{2μν}`
    f2_up: DenseTensor,
    /// `F^{2μ}_ν`
    f2_mix: DenseTensor,
    f2_int: DenseTensor,
    f2: f64,
    /// `∇̂^μ F²`
    grad_f2: DenseTensor,
    /// `∂_i F²`
    dint_f2: DenseTensor,
    r_ex: f64,
    r_in: f64,
    /// `R^{μν}`
    ric_up: DenseTensor,
    /// `R_{ij}`
    ric_int: DenseTensor,
}

impl<'a> Parts<'a> {
    fn new(r: &'a Reduced, conv: Convention) -> Parts<'a> {
        let l = &r.local;
        let ext = &l.ext;
        let sigma = conv.sigma();
        let f_ir = r.f_low_raised.clone();
        let f_ur = ext.raise(&ext.raise(&r.f_up, 1), 2);
        let f_mid = ext.raise(&r.f_low, 1).values();
        let u = l.hat(&f_ir).contract(3, 0).expect("∇̂_λ F_i^{κλ}");
        let v = ext.raise(&l.hat(&r.f_up), 0).contract(0, 3).expect("∇̂^ρ F^i_{λρ}").values();
        let f2_jet = DenseTensor::scalar(r.f2.clone());
        let grad_f2 = ext.raise(&l.hat(&f2_jet), 0).values();
        let dint_f2 = l.int.gradient(&f2_jet).values();
        let ric_up = r.ricci_ext(conv).raise_lower(0, &r.g(), &r.ginv()).expect("raise");
        let ric_up = ric_up.raise_lower(1, &r.g(), &r.ginv()).expect("raise");
        let f2_up = ext.raise(&ext.raise(&r.f2_ext, 0), 1).values();
        let f2_mix = ext.raise(&r.f2_ext, 0).values();
        Parts {
            r,
            conv,
            sigma,
            d: r.d() as f64,
            c: r.c() as f64,
            big: (r.d() + r.c()) as f64,
            g: r.g(),
            gi: r.ginv(),
            kappa: r.kappa(),
            kappa_inv: l.int.ginv.values(),
            f_ir,
            f_ur,
            f_mix: r.f_low_mixed.values(),
            f_mid,
            u,
            v,
            f2_up,
            f2_mix,
            f2_int: r.f2_int.values(),
            f2: r.f2_value(),
            grad_f2,
            dint_f2,
            r_ex: r.r_ex(conv),
            r_in: r.r_in(conv),
            ric_up,
            ric_int: r.ricci_int(conv),
        }
    }

    fn local(&self) -> &KKLocal {
        &self.r.local
    }

    fn raise_ext(&self, t: &DenseTensor, slot: usize) -> DenseTensor {
        t.raise_lower(slot, &self.g, &self.gi).expect("raise external slot")
    }

    /// `W_j^μ = ∇̂_ν F_j^{νμ} = −U_j^μ`.
    fn w(&self) -> DenseTensor {
        self.u.values().scale(-1.0)
    }
}

// ---------------------------------------------------------------------------
// Cotton

fn cotton_trace_ext(p: &Parts) -> ReductionSide {
    let (d, c, big) = (p.d, p.c, p.big);
    let l = p.local();
    let s = p.r.ext_curv.scalar.scale(p.sigma).scale(c).add(&p.r.f2.scale((2.0 * d + 3.0 * c - 2.0) / 4.0));
    let grad = l.ext.raise(&l.hat(&DenseTensor::scalar(s)), 0).values();
    ReductionSide::new(FormulaId::CottonTraceExt)
        .term("∇̂(cR + F²)", grad.scale(1.0 / (2.0 * (big - 1.0))))
        // ∇̂^κ F^i_{κν} = −V^i_ν
        .term("¼ F ∇̂F", ein("imn,in->m", &[&p.f_ir.values(), &p.v]).scale(-0.25))
}

fn cotton_trace_int(p: &Parts) -> ReductionSide {
    let (d, c, big) = (p.d, p.c, p.big);
    let l = p.local();
    let r_in = p.r.int_curv.scalar.scale(p.sigma);
    let d_rin = l.int.gradient(&DenseTensor::scalar(r_in)).values();
    let k = -1.0 / (2.0 * (big - 1.0));
    ReductionSide::new(FormulaId::CottonTraceInt)
        .term("∂R^in", d_rin.scale(k * d))
        .term("∂F²", p.dint_f2.scale(-k * (3.0 * d + 4.0 * c - 4.0) / 4.0))
}

fn cotton_ext(p: &Parts, c_mu: &DenseTensor) -> ReductionSide {
    let d = p.d;
    let l = p.local();
    let slots = vec![p.gi.slots()[0]; 3];
    // C^κ g^{νμ}, antisymmetrized in νκ
    let x = DenseTensor::from_fn(slots.clone(), |ix| c_mu.get(&[ix[2]]) * p.gi.get(&[ix[1], ix[0]]));
    let cot = p.r.ext_curv.cotton.as_ref().expect("external Cotton").values().scale(p.sigma);
    let cot_up = p.raise_ext(&p.raise_ext(&p.raise_ext(&cot, 0), 1), 2);
    let prod = ein_jet("ilm,ink->lmnk", &[&p.f_ir, &p.f_ur]);
    let div_prod = l.hat(&prod).contract(1, 0).expect("∇̂_λ(F F)").values();
    let hat_fur = l.ext.raise(&l.hat(&p.f_ur), 0).values();
    let q = ein("ilk,niml->mnk", &[&p.f_mix, &hat_fur]);
    let fu = p.f_ur.values();
    let y = ein("imn,ik->mnk", &[&fu, &p.u.values()]);
    let s = ein("ilk,il->k", &[&p.f_ir.values(), &p.v]);
    let xs = DenseTensor::from_fn(slots.clone(), |ix| s.get(&[ix[2]]) * p.gi.get(&[ix[1], ix[0]]));
    let xf = DenseTensor::from_fn(slots, |ix| p.gi.get(&[ix[0], ix[1]]) * p.grad_f2.get(&[ix[2]]));
    ReductionSide::new(FormulaId::CottonExt)
        .term("C^[κ g^ν]μ", anti(&x, 1, 2).scale(2.0 / (d - 1.0)))
        .term("C^μνκ", cot_up)
        .term("−½ ∇̂(FF)", div_prod.scale(-0.5))
        .term("F ∇̂F", anti(&q, 1, 2))
        .term("−½ F ∇̂F", anti(&y, 1, 2).scale(-0.5))
        .term("F g ∇̂F", anti(&xs, 1, 2).scale(-1.0 / (2.0 * (d - 1.0))))
        .term("g ∇̂F²", anti(&xf, 1, 2).scale(3.0 / (4.0 * (d - 1.0))))
}

fn cotton_int(p: &Parts, c_i: &DenseTensor) -> ReductionSide {
    let c = p.c;
    let slots = vec![p.kappa.slots()[0]; 3];
    let k = &p.kappa;
    let x = DenseTensor::from_fn(slots.clone(), |ix| {
        let (i, j, l) = (ix[0], ix[1], ix[2]);
        0.5 * (c_i.get(&[l]) * k.get(&[j, i]) - c_i.get(&[j]) * k.get(&[l, i]))
    });
    let cot = p.r.int_curv.cotton.as_ref().expect("internal Cotton").values().scale(p.sigma);
    let xf = DenseTensor::from_fn(slots.clone(), |ix| {
        let (i, j, l) = (ix[0], ix[1], ix[2]);
        0.5 * (p.dint_f2.get(&[l]) * k.get(&[j, i]) - p.dint_f2.get(&[j]) * k.get(&[l, i]))
    });
    let nf2 = p.local().int.cov_deriv(&p.r.f2_int).values(); // ∇_k F²_{ji} at [k][j][i]
    let xn = DenseTensor::from_fn(slots, |ix| {
        let (i, j, l) = (ix[0], ix[1], ix[2]);
        0.5 * (nf2.get(&[l, j, i]) - nf2.get(&[j, l, i]))
    });
    ReductionSide::new(FormulaId::CottonInt)
        .term("C_[k κ_j]i", x.scale(-2.0 / (c - 1.0)))
        .term("C_ijk", cot)
        .term("∇F² κ", xf.scale(3.0 / (4.0 * (c - 1.0))))
        .term("∇F²_ji", xn.scale(-0.5))
}

fn cotton_ext_ext_int(p: &Parts, c_i: &DenseTensor) -> ReductionSide {
    let d = p.d;
    let l = p.local();
    let t1 = p.gi.outer(c_i).scale(1.0 / d);
    let hu = l.ext.raise(&l.hat(&p.u), 0).values(); // ∇̂^ν U_k^μ at [ν][k][μ]
    let t2 = perm(&hu, &[2, 0, 1]).scale(-0.5);
    let f2_jet = DenseTensor::scalar(p.r.f2.clone());
    let tr = l
        .ext
        .raise(&l.ext.raise(&p.r.f2_ext, 0), 1)
        .minus(&l.ext.ginv.scale_by(&f2_jet.as_scalar().scale(1.0 / d)));
    let ntr = l.int.cov_deriv(&tr).values(); // [k][μ][ν]
    let t3 = perm(&ntr, &[1, 2, 0]).scale(0.5);
    let ric_mix = p.raise_ext(&p.r.ricci_ext(p.conv), 1);
    let ric_int_mix = p.ric_int.raise_lower(0, &p.kappa, &p.kappa_inv).expect("raise");
    let fir = p.f_ir.values();
    ReductionSide::new(FormulaId::CottonExtExtInt)
        .term("g C_k", t1)
        .term("−½ ∇̂∇̂F", t2)
        .term("½ ∇(F² − g F²)", t3)
        .term("½ F R", ein("kma,an->mnk", &[&fir, &ric_mix]).scale(0.5))
        .term("½ F R^in", ein("lmn,lk->mnk", &[&fir, &ric_int_mix]).scale(0.5))
        .term("¼ F F²", ein("kam,na->mnk", &[&fir, &p.f2_mix]).scale(0.25))
        .term("−⅛ F F²_in", ein("lmn,lk->mnk", &[&p.f_ur.values(), &p.f2_int]).scale(-0.125))
}

fn cotton_int_int_ext(p: &Parts, c_mu: &DenseTensor) -> ReductionSide {
    let c = p.c;
    let l = p.local();
    let t1 = p.kappa.outer(c_mu).scale(-1.0 / c);
    let nu = l.int.cov_deriv(&p.u).values(); // ∇_j U_i^κ at [j][i][κ]
    let t2 = perm(&nu, &[1, 0, 2]).scale(0.5);
    let f2_jet = p.r.f2.clone();
    let tr = p.r.f2_int.minus(&l.int.g.scale_by(&f2_jet.scale(1.0 / c)));
    let ht = l.ext.raise(&l.hat(&tr), 0).values(); // [κ][i][j]
    let t3 = perm(&ht, &[1, 2, 0]).scale(-0.25);
    let w = p.w();
    let t4 = ein("ikm,jm->ijk", &[&p.f_mid, &w]).scale(-0.25);
    let w_up = w.raise_lower(0, &p.kappa, &p.kappa_inv).expect("raise");
    let s = ein("lkm,lm->k", &[&p.f_mid, &w_up]);
    let t5 = p.kappa.outer(&s).scale(1.0 / (4.0 * c));
    ReductionSide::new(FormulaId::CottonIntIntExt)
        .term("κ C^κ", t1)
        .term("½ ∇∇̂F", t2)
        .term("−¼ ∇̂(F² − κF²)", t3)
        .term("−¼ F ∇̂F", t4)
        .term("κ F ∇̂F", t5)
}

fn cotton_ext_int_int(x: &ReductionSide) -> ReductionSide {
    let v = x.value(); // C_ij^κ
    let out = DenseTensor::from_fn(vec![v.slots()[2], v.slots()[0], v.slots()[1]], |ix| {
        let (m, j, k) = (ix[0], ix[1], ix[2]);
        v.get(&[k, j, m]) - v.get(&[j, k, m])
    });
    ReductionSide::new(FormulaId::CottonExtIntInt).term("2 C_[kj]^μ", out)
}

fn cotton_int_ext_ext(x: &ReductionSide) -> ReductionSide {
    let v = x.value(); // C^{μν}_k
    let out = DenseTensor::from_fn(vec![v.slots()[2], v.slots()[0], v.slots()[1]], |ix| {
        let (i, n, k) = (ix[0], ix[1], ix[2]);
        v.get(&[k, n, i]) - v.get(&[n, k, i])
    });
    ReductionSide::new(FormulaId::CottonIntExtExt).term("2 C^[κν]_i", out)
}

// ---------------------------------------------------------------------------
// Weyl

fn weyl_scalar(p: &Parts) -> ReductionSide {
    let (d, c, big) = (p.d, p.c, p.big);
    let k = 1.0 / ((big - 1.0) * (big - 2.0));
    ReductionSide::new(FormulaId::WeylScalar)
        .term("R^ex", DenseTensor::scalar(k * c * (c - 1.0) * p.r_ex))
        .term("R^in", DenseTensor::scalar(k * d * (d - 1.0) * p.r_in))
        .term("F²", DenseTensor::scalar(k * (c - 1.0) * (2.0 * d + 3.0 * c - 2.0) / 4.0 * p.f2))
}

fn weyl_trace_ext(p: &Parts, cs: f64) -> ReductionSide {
    let (d, c, big) = (p.d, p.c, p.big);
    ReductionSide::new(FormulaId::WeylTraceExt)
        .term("C g", p.gi.scale(cs / d))
        .term("R − g R", p.ric_up.minus(&p.gi.scale(p.r_ex / d)).scale(c / (big - 2.0)))
        .term(
            "F² − g F²",
            p.f2_up
                .minus(&p.gi.scale(p.f2 / d))
                .scale((d + 3.0 * c - 2.0) / (4.0 * (big - 2.0))),
        )
}

fn weyl_trace_int(p: &Parts, cs: f64) -> ReductionSide {
    let (d, c, big) = (p.d, p.c, p.big);
    ReductionSide::new(FormulaId::WeylTraceInt)
        .term("C κ", p.kappa.scale(-cs / c))
        .term("R − κ R", p.ric_int.minus(&p.kappa.scale(p.r_in / c)).scale(-d / (big - 2.0)))
        .term(
            "F² − κ F²",
            p.f2_int
                .minus(&p.kappa.scale(p.f2 / c))
                .scale(-(c - 2.0) / (4.0 * (big - 2.0))),
        )
}

fn weyl_trace_mixed(p: &Parts) -> ReductionSide {
    let (c, big) = (p.c, p.big);
    ReductionSide::new(FormulaId::WeylTraceMixed).term("∇̂F", perm(&p.w(), &[1, 0]).scale((c - 1.0) / (2.0 * (big - 2.0))))
}

fn gauss_ext(p: &Parts, cs: f64, c_mn: &DenseTensor) -> ReductionSide {
    let d = p.d;
    if p.r.d() == 2 {
        return ReductionSide::new(FormulaId::GaussExtD2).term("C g g", gg_bracket(&p.gi).scale(cs));
    }
    let weyl = p.r.ext_curv.weyl.as_ref().expect("external Weyl").values();
    let weyl_up = (0..4).fold(weyl, |t, s| p.raise_ext(&t, s));
    let fir = p.f_ir.values();
    let fur = p.f_ur.values();
    let ff = ein("imn,ikl->mnkl", &[&fir, &fur]);
    let ffb = anti(&ein("imk,iln->mnkl", &[&fir, &fur]), 2, 3);
    let t = p.f2_up.minus(&p.gi.scale(p.f2 / (2.0 * (d - 1.0))));
    ReductionSide::new(FormulaId::GaussExt)
        .term("g C", g_wedge(&p.gi, c_mn).scale(2.0 / (d - 2.0)))
        .term("C g g", gg_bracket(&p.gi).scale(-2.0 * cs / ((d - 1.0) * (d - 2.0))))
        .term("C^μνκλ", weyl_up)
        .term("½ F F", ff.scale(0.5))
        .term("−½ F F[]", ffb.scale(-0.5))
        .term("g T", g_wedge(&p.gi, &t).scale(-3.0 / (2.0 * (d - 2.0))))
}

fn gauss_int(p: &Parts, cs: f64, c_ij: &DenseTensor) -> ReductionSide {
    let c = p.c;
    if p.r.c() == 2 {
        return ReductionSide::new(FormulaId::GaussIntC2).term("C κ κ", gg_bracket(&p.kappa).scale(cs));
    }
    let weyl = p.r.int_curv.weyl.as_ref().expect("internal Weyl").values();
    ReductionSide::new(FormulaId::GaussInt)
        .term("κ C", g_wedge(&p.kappa, c_ij).scale(-2.0 / (c - 2.0)))
        .term("C κ κ", gg_bracket(&p.kappa).scale(-2.0 * cs / ((c - 1.0) * (c - 2.0))))
        .term("C_ijkl", weyl)
}

fn codazzi_ext(p: &Parts, c_mj: &DenseTensor) -> ReductionSide {
    let c = p.c;
    let l = p.local();
    let gi = &p.gi;
    let ext_up = gi.slots()[0];
    let int_down = p.kappa.slots()[0];
    let x = DenseTensor::from_fn(vec![int_down, ext_up, ext_up, ext_up], |ix| {
        let (i, n, k, m) = (ix[0], ix[1], ix[2], ix[3]);
        gi.get(&[n, k]) * c_mj.get(&[m, i])
    });
    let hf = l.ext.raise(&l.hat(&p.f_ir), 0).values(); // [ν][i][κ][λ]
    ReductionSide::new(FormulaId::CodazziExt)
        .term("g C", anti(&x, 2, 3).scale(2.0 / (c - 1.0)))
        .term("−½ ∇̂F", perm(&hf, &[1, 0, 2, 3]).scale(-0.5))
}

fn codazzi_int(p: &Parts, c_mj: &DenseTensor) -> ReductionSide {
    let c = p.c;
    let k = &p.kappa;
    let int_down = k.slots()[0];
    let x = DenseTensor::from_fn(vec![c_mj.slots()[0], int_down, int_down, int_down], |ix| {
        let (m, j, a, b) = (ix[0], ix[1], ix[2], ix[3]);
        0.5 * (c_mj.get(&[m, a]) * k.get(&[b, j]) - c_mj.get(&[m, b]) * k.get(&[a, j]))
    });
    ReductionSide::new(FormulaId::CodazziInt).term("C κ", x.scale(-2.0 / (c - 1.0)))
}

fn ricci(p: &Parts) -> ReductionSide {
    let nf = p.local().int.cov_deriv(&p.f_ir).values(); // ∇_k F_l^{μν} at [k][l][μ][ν]
    let ff = ein("kma,lan->mnkl", &[&p.f_ir.values(), &p.f_mix]);
    ReductionSide::new(FormulaId::Ricci)
        .term("∇F", perm(&nf, &[2, 3, 0, 1]))
        .term("½ F F", anti(&ff, 2, 3).scale(0.5))
}

/// The mixed block; `weight` multiplies the `C^{μκ}_{jl}` term.
fn sixth(p: &Parts, cs: f64, c_mn: &DenseTensor, c_ij: &DenseTensor, ricci: &DenseTensor, weight: f64) -> ReductionSide {
    let (d, c) = (p.d, p.c);
    let to_slots = |t: DenseTensor| perm(&t, &[0, 2, 1, 3]);
    let fff = sym(&ein("jmn,lnk->mkjl", &[&p.f_ir.values(), &p.f_mix]), 2, 3);
    let gk = p.gi.outer(&p.kappa);
    ReductionSide::new(FormulaId::Sixth)
        .term("C^μκ_jl", to_slots(ricci.scale(weight)))
        .term("C κ", to_slots(c_mn.outer(&p.kappa).scale(-1.0 / c)))
        .term("g C", to_slots(p.gi.outer(c_ij).scale(1.0 / d)))
        .term("C g κ", to_slots(gk.scale(cs / (c * d))))
        .term("−¼ F F", to_slots(fff.scale(-0.25)))
        .term("g F²", to_slots(p.gi.outer(&p.f2_int).scale(1.0 / (4.0 * d))))
        .term("F² κ", to_slots(p.f2_up.outer(&p.kappa).scale(1.0 / (4.0 * c))))
        .term("F² g κ", to_slots(gk.scale(-p.f2 / (4.0 * c * d))))
}

/// All Cotton reduction right-hand sides that apply at these dimensions, as
/// printed and, where the printed signs disagree with the direct
/// computation, sign-corrected.
pub fn cotton_formulas(r: &Reduced, conv: Convention) -> (Vec<ReductionSide>, Vec<Skipped>) {
    let p = Parts::new(r, conv);
    let mut out = Vec::new();
    let mut skipped = Vec::new();
    let c_mu = cotton_trace_ext(&p);
    let c_i = cotton_trace_int(&p);
    let (c_mu_v, c_i_v) = (c_mu.value(), c_i.value());
    out.push(c_mu);
    out.push(c_i);
    let eek = cotton_ext_ext_int(&p, &c_i_v);
    let eek_fixed = eek.sign_corrected(CMUNUK_FLIPS);
    let iie = cotton_int_int_ext(&p, &c_mu_v);
    if r.d() > 1 {
        let ext = cotton_ext(&p, &c_mu_v);
        out.push(ext.sign_corrected(CMUNUKAPPA_FLIPS));
        out.push(ext);
        out.push(cotton_int_ext_ext(&eek));
        let mut fixed = cotton_int_ext_ext(&eek_fixed);
        fixed.variant = Some(SIGN_CORRECTED);
        out.push(fixed);
    } else {
        for id in [FormulaId::CottonExt, FormulaId::CottonIntExtExt] {
            skipped.push(Skipped {
                id,
                reason: "needs d > 1".into(),
            });
        }
    }
    if r.c() > 1 {
        out.push(cotton_int(&p, &c_i_v));
        out.push(cotton_ext_int_int(&iie));
    } else {
        for id in [FormulaId::CottonInt, FormulaId::CottonExtIntInt] {
            skipped.push(Skipped {
                id,
                reason: "needs c > 1".into(),
            });
        }
    }
    out.push(eek);
    out.push(eek_fixed);
    out.push(iie);
    (out, skipped)
}

/// All Weyl reduction right-hand sides that apply at these dimensions.
pub fn weyl_formulas(r: &Reduced, conv: Convention) -> (Vec<ReductionSide>, Vec<Skipped>) {
    let p = Parts::new(r, conv);
    let mut out = Vec::new();
    let mut skipped = Vec::new();
    if r.d() + r.c() < 4 {
        skipped.extend(FormulaId::ALL.iter().filter(|f| f.tag().starts_with("B.")).map(|&id| Skipped {
            id,
            reason: "needs D ≥ 4".into(),
        }));
        return (out, skipped);
    }
    let cs_side = weyl_scalar(&p);
    let cs = cs_side.value().as_scalar().value();
    let c_mn = weyl_trace_ext(&p, cs);
    let c_ij = weyl_trace_int(&p, cs);
    let c_mj = weyl_trace_mixed(&p);
    let (c_mn_v, c_ij_v, c_mj_v) = (c_mn.value(), c_ij.value(), c_mj.value());
    out.extend([cs_side, c_mn, c_ij]);
    out.push(gauss_ext(&p, cs, &c_mn_v));
    out.push(gauss_int(&p, cs, &c_ij_v));
    if r.c() > 1 {
        out.push(codazzi_ext(&p, &c_mj_v));
        out.push(codazzi_int(&p, &c_mj_v));
    } else {
        for id in [FormulaId::CodazziExt, FormulaId::CodazziInt] {
            skipped.push(Skipped {
                id,
                reason: "needs c > 1".into(),
            });
        }
    }
    out.push(c_mj);
    let ric = ricci(&p);
    let ric_fixed = ric.sign_corrected(RICCI_FLIPS);
    out.push(sixth(&p, cs, &c_mn_v, &c_ij_v, &ric.value(), 1.0));
    // The part antisymmetric in `jl` is fixed by the cyclic identity to be
    // half of the `kl` block.
    out.push(sixth(&p, cs, &c_mn_v, &c_ij_v, &ric_fixed.value(), 0.5).sign_corrected(SIXTH_FLIPS));
    out.push(ric);
    out.push(ric_fixed);
    (out, skipped)
}

/// Directly computed, projected components of the total Cotton and Weyl
/// tensors for every formula's left-hand side.
pub struct DirectSides {
    cotton: DenseTensor,
    weyl: DenseTensor,
    total_inverse: DenseTensor,
    g: DenseTensor,
    kappa_inv: DenseTensor,
}

impl DirectSides {
    pub fn new(local: &KKLocal, conv: Convention) -> Result<DirectSides, GeomError> {
        let geo = local.total_geometry()?;
        let gv = geo.g.values();
        let n = local.d + local.c;
        let largest = gv.max_abs();
        if min_pivot(n, gv.comps()) < SINGULAR_PIVOT * largest {
            return Err(GeomError::InvalidParameter(format!(
                "assembled metric is near-singular at {:?}",
                local.point.concat()
            )));
        }
        let curv = geo.curvature()?;
        let cotton = curv.cotton.as_ref().expect("total Cotton").values().scale(conv.sigma());
        let weyl = curv.weyl.as_ref().expect("total Weyl").values();
        Ok(DirectSides {
            cotton,
            weyl,
            total_inverse: geo.ginv.values(),
            g: local.ext.g.values(),
            kappa_inv: local.int.ginv.values(),
        })
    }

    fn proj(&self, local: &KKLocal, t: &DenseTensor, pattern: &[ProjSlot]) -> DenseTensor {
        local.project(t, &self.total_inverse, pattern).expect("projection pattern")
    }

    /// `𝐂^μ` computed from the internal trace, `−𝐂^j_j^μ`.
    pub fn cotton_trace_ext_internal(&self, local: &KKLocal) -> DenseTensor {
        use ProjSlot::{ExternalUp as U, InternalDown as I};
        let x = self.proj(local, &self.cotton, &[I, I, U]);
        ein("jkm,jk->m", &[&x, &self.kappa_inv]).scale(-1.0)
    }

    pub fn side(&self, local: &KKLocal, id: FormulaId) -> DenseTensor {
        use FormulaId::*;
        use ProjSlot::{ExternalUp as U, InternalDown as I};
        match id {
            CottonTraceExt => ein("nrm,nr->m", &[&self.proj(local, &self.cotton, &[U, U, U]), &self.g]),
            CottonTraceInt => ein("nri,nr->i", &[&self.proj(local, &self.cotton, &[U, U, I]), &self.g]),
            WeylScalar => {
                let c_mn = self.side(local, WeylTraceExt);
                ein("mn,mn->", &[&c_mn, &self.g])
            }
            WeylTraceExt => ein("makb,ab->mk", &[&self.proj(local, &self.weyl, &[U, U, U, U]), &self.g]),
            WeylTraceInt => ein("iajb,ab->ij", &[&self.proj(local, &self.weyl, &[I, U, I, U]), &self.g]),
            WeylTraceMixed => ein("majb,ab->mj", &[&self.proj(local, &self.weyl, &[U, U, I, U]), &self.g]),
            _ if id.tag().starts_with("A.") => self.proj(local, &self.cotton, id.pattern()),
            _ => self.proj(local, &self.weyl, id.pattern()),
        }
    }
}

/// Compares every applicable formula with the direct computation.
pub fn reduction_residuals(r: &Reduced, conv: Convention) -> Result<Vec<PointResidual>, GeomError> {
    let direct = DirectSides::new(&r.local, conv)?;
    let (mut sides, mut skipped) = cotton_formulas(r, conv);
    let (w, ws) = weyl_formulas(r, conv);
    sides.extend(w);
    skipped.extend(ws);
    let mut out = Vec::with_capacity(sides.len() + 2);
    for s in &sides {
        let rhs = direct.side(&r.local, s.id);
        let b = s
            .terms
            .iter()
            .fold(Balance::new(), |b, (name, t)| b.lhs(name, t.clone()))
            .rhs("direct", rhs);
        out.push(PointResidual::named(s.id.tag(), s.variant, &b));
    }
    // Trace coherence of the direct Cotton components, and of the assembled
    // Weyl traces.
    if let Some(cmu) = sides.iter().find(|s| s.id == FormulaId::CottonTraceExt) {
        let _ = cmu;
        let b = Balance::new()
            .lhs("C^ν_ν^μ", direct.side(&r.local, FormulaId::CottonTraceExt))
            .rhs("−C^j_j^μ", direct.cotton_trace_ext_internal(&r.local));
        out.push(PointResidual::named("A.trace", None, &b));
    }
    let find = |id| sides.iter().find(|s: &&ReductionSide| s.id == id).map(|s| s.value());
    if let (Some(c_mn), Some(c_ij)) = (find(FormulaId::WeylTraceExt), find(FormulaId::WeylTraceInt)) {
        let b = Balance::new()
            .lhs("C_μ^μ", ein("mn,mn->", &[&c_mn, &direct.g]))
            .lhs("C_i^i", ein("ij,ij->", &[&c_ij, &direct.kappa_inv]));
        out.push(PointResidual::named("B.trace", None, &b));
    }
    for s in skipped {
        out.push(PointResidual {
            tag: s.id.tag().to_string(),
            variant: None,
            outcome: Err(s.reason),
            branch: false,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{hopf_instanton_default, random_spec, random_squashed_spec, trivial_solution_spec};
    use crate::verify::Tolerance;

    fn residuals(spec: &crate::kk::KKSpec, seed: u64) -> Vec<PointResidual> {
        let p = &spec.sample_points(1, seed)[0];
        let r = Reduced::new(spec, p).unwrap();
        reduction_residuals(&r, Convention::Paper).unwrap()
    }

    fn show(rs: &[PointResidual]) -> String {
        rs.iter()
            .filter_map(|r| {
                let m = r.outcome.as_ref().ok()?;
                Some(format!("{} {:?}: rel {:.2e} abs {:.2e}\n", r.tag, r.variant, m.rel, m.abs))
            })
            .collect()
    }

    #[test]
    fn tags_round_trip() {
        for f in FormulaId::ALL {
            assert_eq!(FormulaId::from_tag(f.tag()), Some(f));
            let json = serde_json::to_string(&f).unwrap();
            assert_eq!(json, format!("\"{}\"", f.tag()));
        }
    }

    #[test]
    fn trivial_solution_all_blocks_vanish() {
        let spec = trivial_solution_spec(4, 3, -6.0).unwrap();
        let rs = residuals(&spec, 2);
        for r in &rs {
            if let Ok(m) = &r.outcome {
                assert!(m.abs < 1e-8, "{}", show(&rs));
            }
        }
    }

    /// Literal forms that disagree with the direct computation; every other
    /// row, including each sign-corrected variant, must agree.
    const LITERAL_MISMATCHES: [&str; 5] = ["A.Cmunukappa", "A.Cinukappa", "A.Cmunuk", "B.6th", "B.Ricci"];

    fn assert_two_paths(spec: &crate::kk::KKSpec, seeds: &[u64]) {
        let tol = Tolerance::default();
        for &seed in seeds {
            let rs = residuals(spec, seed);
            for r in &rs {
                let Ok(m) = &r.outcome else { continue };
                let expect_fail = r.variant.is_none() && LITERAL_MISMATCHES.contains(&r.tag.as_str());
                assert_eq!(m.passes(&tol), !expect_fail, "{} {:?}\n{}", r.tag, r.variant, show(&rs));
                if expect_fail {
                    assert!(m.rel > 0.1, "{} should fail clearly", r.tag);
                }
            }
            for tag in LITERAL_MISMATCHES {
                assert!(rs.iter().any(|r| r.tag == tag && r.variant == Some(SIGN_CORRECTED)));
            }
        }
    }

    #[test]
    fn random_spec_two_paths() {
        assert_two_paths(&random_spec(4, 3, 0.05, 0.5).unwrap(), &[1, 7]);
    }

    #[test]
    fn squashed_spec_two_paths() {
        let spec = random_squashed_spec(4, 5, 0.05, 0.5, [0.7, 1.0, 1.6]).unwrap();
        assert_two_paths(&spec, &[3]);
        // The internal gradient of F² no longer vanishes, so A.Ci is a
        // genuine comparison rather than two round-off zeros.
        let rs = residuals(&spec, 3);
        let ci = rs.iter().find(|r| r.tag == "A.Ci").unwrap().outcome.as_ref().unwrap();
        assert!(ci.scale > 1e-3 && ci.rel < 1e-10, "{ci:?}");
    }

    #[test]
    fn instanton_blocks() {
        let rs = residuals(&hopf_instanton_default(), 4);
        println!("{}", show(&rs));
    }
}
