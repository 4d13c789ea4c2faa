//! Lower-dimensional quantities at one Kaluza-Klein point.

use crate::geom::{Convention, CurvatureJets, GeomError};
use crate::jet::Jet3;
use crate::kk::{KKLocal, KKPoint, KKSpec};
use crate::tensor::{einsum, DenseTensor};

/// Everything the flatness and curvature equations are assembled from.
///
/// Curvatures are stored in the `Paper` convention; the signed accessors
/// convert to the convention under evaluation.
#[derive(Debug, Clone)]
pub struct Reduced {
    pub local: KKLocal,
    pub ext_curv: CurvatureJets,
    pub int_curv: CurvatureJets,
    /// `F^k_{μν}`
    pub f_up: DenseTensor<Jet3>,
    /// `F_{kμν}`
    pub f_low: DenseTensor<Jet3>,
    /// `F_{kμ}^ν`
    pub f_low_mixed: DenseTensor<Jet3>,
    /// `F_k^{μν}`
    pub f_low_raised: DenseTensor<Jet3>,
    /// `F²_{μν} = F^k_{μκ} F_{kν}^κ`
    pub f2_ext: DenseTensor<Jet3>,
    /// `F²_{ij} = F_{iμν} F_j^{μν}`
    pub f2_int: DenseTensor<Jet3>,
    /// `F² = F^i_{μν} F_i^{μν}`
    pub f2: Jet3,
}

impl Reduced {
    pub fn new(spec: &KKSpec, point: &KKPoint) -> Result<Reduced, GeomError> {
        let local = KKLocal::new(spec, point)?;
        Reduced::from_local(local)
    }

    pub fn from_local(local: KKLocal) -> Result<Reduced, GeomError> {
        let ext_curv = local.ext.curvature()?;
        let int_curv = local.int.curvature()?;
        let f_up = local.field_int.clone();
        let f_low = einsum("jmn,ji->imn", &[&f_up, &local.int.g])?;
        let f_low_mixed = local.ext.raise(&f_low, 2);
        let f_low_raised = local.ext.raise(&f_low_mixed, 1);
        let f2_ext = einsum("kma,kna->mn", &[&f_up, &f_low_mixed])?;
        let f2_int = einsum("imn,jmn->ij", &[&f_low, &f_low_raised])?;
        let f2 = einsum("kmn,kmn->", &[&f_up, &f_low_raised])?.as_scalar().clone();
        Ok(Reduced {
            local,
            ext_curv,
            int_curv,
            f_up,
            f_low,
            f_low_mixed,
            f_low_raised,
            f2_ext,
            f2_int,
            f2,
        })
    }

    pub fn d(&self) -> usize {
        self.local.d
    }

    pub fn c(&self) -> usize {
        self.local.c
    }

    pub fn r_ex(&self, conv: Convention) -> f64 {
        conv.sigma() * self.ext_curv.scalar.value()
    }

    pub fn r_in(&self, conv: Convention) -> f64 {
        conv.sigma() * self.int_curv.scalar.value()
    }

    pub fn ricci_ext(&self, conv: Convention) -> DenseTensor {
        self.ext_curv.ricci.values().scale(conv.sigma())
    }

    pub fn ricci_int(&self, conv: Convention) -> DenseTensor {
        self.int_curv.ricci.values().scale(conv.sigma())
    }

    pub fn f2_value(&self) -> f64 {
        self.f2.value()
    }

    /// Largest gauge curvature component.
    pub fn f_max(&self) -> f64 {
        self.f_up.max_abs()
    }

    pub fn g(&self) -> DenseTensor {
        self.local.ext.g.values()
    }

    pub fn ginv(&self) -> DenseTensor {
        self.local.ext.ginv.values()
    }

    pub fn kappa(&self) -> DenseTensor {
        self.local.int.g.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::hopf_instanton_default;

    #[test]
    fn instanton_moduli() {
        let spec = hopf_instanton_default();
        let pts = spec.sample_points(3, 5);
        for p in &pts {
            let r = Reduced::new(&spec, p).unwrap();
            assert!((r.f2_value() - 48.0).abs() < 1e-9, "F² = {}", r.f2_value());
            assert!((r.r_in(Convention::Paper) + 6.0).abs() < 1e-9);
            assert!((r.r_ex(Convention::Paper) + 48.0).abs() < 1e-9);
            // Traces of the two partial contractions reproduce F².
            let tr_ext = einsum("mn,mn->", &[&r.f2_ext, &r.local.ext.ginv]).unwrap();
            let tr_int = einsum("ij,ij->", &[&r.f2_int, &r.local.int.ginv]).unwrap();
            assert!((tr_ext.as_scalar().value() - 48.0).abs() < 1e-9);
            assert!((tr_int.as_scalar().value() - 48.0).abs() < 1e-9);
        }
    }
}
