//! Quaternionic space form in a stereographic chart on `ℝ⁴`.
//!
//! `g = 4s² / (k (s² + |x|²)²) δ` is the round four-sphere of radius `1/√k`
//! (`s` is the chart scale). The triple `J^𝖺_μ^ν` is the constant matrix of
//! left multiplication by an imaginary unit; conformal rescaling leaves its
//! algebra untouched, and its covariant derivative is an `ε`-rotation by
//! `θ^𝖺 = 2β P^𝖺 x / (s² + |x|²)`.
//!
//! The one-instanton potential is `A^𝖺 = θ^𝖺/√k`; its curvature is
//! proportional to the triple.

use serde::{Deserialize, Serialize};

use crate::geom::{Domain, GeomError, MetricField};
use crate::jet::Jet3;
use crate::kk::GaugeField;

use super::quaternion::{left_mul, right_mul};

/// Which family of multiplication matrices builds the triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Triple {
    /// `x ↦ e_𝖺 x`; closes `J^𝖺J^𝖻 − J^𝖻J^𝖺 = 2ε_{𝖺𝖻𝖼}J^𝖼`.
    Left,
    /// `x ↦ x e_𝖺`; the opposite orientation (closes with `−2ε`).
    Right,
}

impl Triple {
    pub fn matrix(self, a: usize) -> [[f64; 4]; 4] {
        match self {
            Triple::Left => left_mul(a),
            Triple::Right => right_mul(a),
        }
    }

    /// Sign `β` in `θ^𝖺 = 2β P^𝖺 x/(s²+|x|²)`.
    pub fn beta(self) -> f64 {
        match self {
            Triple::Left => 1.0,
            Triple::Right => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QKStructure {
    pub k: f64,
    pub chart_scale: f64,
    pub triple: Triple,
    /// Multiplies `J`; `1` for the genuine structure, anything else is a
    /// deliberate perturbation.
    pub j_scale: f64,
}

/// The `d = 4` quaternionic space form of quaternionic sectional curvature
/// `k`.
pub fn quaternionic_space_form(k: f64, chart_scale: f64) -> Result<QKStructure, GeomError> {
    QKStructure::new(k, chart_scale, Triple::Left)
}

impl QKStructure {
    pub const DIM: usize = 4;

    pub fn new(k: f64, chart_scale: f64, triple: Triple) -> Result<QKStructure, GeomError> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(GeomError::InvalidParameter(format!("k must be positive, got {k}")));
        }
        if !(chart_scale > 0.0 && chart_scale.is_finite()) {
            return Err(GeomError::InvalidParameter(format!(
                "chart scale must be positive, got {chart_scale}"
            )));
        }
        Ok(QKStructure {
            k,
            chart_scale,
            triple,
            j_scale: 1.0,
        })
    }

    pub fn with_j_scale(mut self, j_scale: f64) -> Self {
        self.j_scale = j_scale;
        self
    }

    fn r2_plus_s2(&self, x: &[Jet3]) -> Jet3 {
        let mut r2 = x[0].constant_like(self.chart_scale * self.chart_scale);
        for xi in &x[..4] {
            r2.add_assign_product(xi, xi);
        }
        r2
    }

    /// `J^𝖺_μ^ν` stored `[𝖺][μ][ν]`.
    pub fn j_components(&self, x: &[Jet3]) -> Vec<Jet3> {
        let z = x[0].zero_like();
        (0..3)
            .flat_map(|a| {
                let m = self.triple.matrix(a);
                let z = z.clone();
                (0..16).map(move |k| z.constant_like(self.j_scale * m[k / 4][k % 4]))
            })
            .collect()
    }

    /// `θ^𝖺_ν` stored `[𝖺][ν]`.
    pub fn theta_components(&self, x: &[Jet3]) -> Vec<Jet3> {
        let f = self.r2_plus_s2(x).recip().scale(2.0 * self.triple.beta());
        let mut out = Vec::with_capacity(12);
        for a in 0..3 {
            let m = self.triple.matrix(a);
            for row in &m {
                let mut s = x[0].zero_like();
                for (rho, coef) in row.iter().enumerate() {
                    if *coef != 0.0 {
                        s = s + x[rho].scale(*coef);
                    }
                }
                out.push(&s * &f);
            }
        }
        out
    }

    /// Ricci eigenvalue magnitude `(d+8)k/4`.
    pub fn ricci_magnitude(&self) -> f64 {
        3.0 * self.k
    }

    /// Scalar curvature magnitude `d(d+8)k/4`.
    pub fn scalar_magnitude(&self) -> f64 {
        12.0 * self.k
    }
}

impl MetricField for QKStructure {
    fn dim(&self) -> usize {
        4
    }
    fn components(&self, x: &[Jet3]) -> Result<Vec<Jet3>, GeomError> {
        let q = self.r2_plus_s2(x);
        let s = self.chart_scale;
        let f = (&q * &q).recip().scale(4.0 * s * s / self.k);
        let z = x[0].zero_like();
        Ok((0..16).map(|i| if i % 5 == 0 { f.clone() } else { z.clone() }).collect())
    }
    fn domain(&self) -> Domain {
        Domain::ball(4, 2.0 * self.chart_scale)
    }
}

/// `A^𝖺_μ = θ^𝖺_μ/√k` on the chart of a [`QKStructure`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstantonGauge {
    pub structure: QKStructure,
}

impl GaugeField for InstantonGauge {
    fn count(&self) -> usize {
        3
    }
    fn dim(&self) -> usize {
        4
    }
    fn components(&self, x: &[Jet3]) -> Result<Vec<Jet3>, GeomError> {
        let s = 1.0 / self.structure.k.sqrt();
        Ok(self.structure.theta_components(x).iter().map(|t| t.scale(s)).collect())
    }
}

/// Relative tolerance on `k = 2|R^in|/3`.
pub const K_RELATION_TOL: f64 = 1e-12;

/// Instanton potential on the quaternionic space form of curvature `k`,
/// matched to an internal sphere with `|R^in| = r_in_magnitude`.
pub fn instanton_gauge_field(k: f64, r_in_magnitude: f64) -> Result<InstantonGauge, GeomError> {
    instanton_gauge_with(QKStructure::new(k, 1.0, Triple::Left)?, r_in_magnitude)
}

pub fn instanton_gauge_with(structure: QKStructure, r_in_magnitude: f64) -> Result<InstantonGauge, GeomError> {
    let want = 2.0 * r_in_magnitude / 3.0;
    if (structure.k - want).abs() > K_RELATION_TOL * want.abs().max(1.0) {
        return Err(GeomError::InvalidParameter(format!(
            "instanton requires k = 2|R^in|/3 = {want}, got k = {}",
            structure.k
        )));
    }
    Ok(InstantonGauge { structure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{curvature_bundle, Convention};

    #[test]
    fn origin_metric_is_flat_multiple() {
        let qk = quaternionic_space_form(4.0, 1.0).unwrap();
        let x = Jet3::seed_point(&[0.0; 4]).unwrap();
        let g = qk.components(&x).unwrap();
        assert!((g[0].value() - 1.0).abs() < 1e-15); // 4/k
        assert_eq!(g[1].value(), 0.0);
    }

    #[test]
    fn sphere_curvature_magnitudes() {
        // Oracle: contracting the space-form Riemann tensor gives Ricci
        // eigenvalue (d+8)k/4 and scalar d(d+8)k/4 in d = 4.
        let qk = quaternionic_space_form(4.0, 1.0).unwrap();
        let b = curvature_bundle(&qk, &[0.3, -0.2, 0.4, 0.1], Convention::Standard).unwrap();
        assert!((b.scalar - 48.0).abs() < 1e-9);
        let ev = b.ricci_eigenvalues().unwrap();
        assert!(ev.iter().all(|e| (e - 12.0).abs() < 1e-9), "{ev:?}");
    }

    #[test]
    fn k_relation_enforced() {
        assert!(instanton_gauge_field(4.0, 6.0).is_ok());
        assert!(instanton_gauge_field(4.0, 6.5).is_err());
        assert!(quaternionic_space_form(-1.0, 1.0).is_err());
    }
}
