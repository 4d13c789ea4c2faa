//! Constant-curvature spaces in stereographic and hyperspherical charts.

use serde::{Deserialize, Serialize};

use crate::geom::{Domain, GeomError, MetricField};
use crate::jet::Jet3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Flat,
    Sphere,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    /// Conformally flat: `4r²δ/(1 ± |x|²)²`.
    Stereographic,
    /// Nested angles `(χ, θ₁, …, φ)`: `r²(dχ² + s(χ)² dΩ²)`.
    Hyperspherical,
}

/// A maximally symmetric metric with `|scalar curvature| = magnitude`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantCurvature {
    pub dim: usize,
    pub kind: SpaceKind,
    pub magnitude: f64,
    pub chart: Chart,
}

impl ConstantCurvature {
    pub fn new(dim: usize, magnitude: f64, kind: SpaceKind, chart: Chart) -> Result<Self, GeomError> {
        let bad = |m: &str| Err(GeomError::InvalidParameter(m.to_string()));
        if !(magnitude >= 0.0 && magnitude.is_finite()) {
            return bad("scalar curvature magnitude must be finite and non-negative");
        }
        if dim == 0 {
            return bad("dimension must be positive");
        }
        match kind {
            SpaceKind::Flat if magnitude != 0.0 => return bad("flat space has zero curvature"),
            SpaceKind::Sphere | SpaceKind::Hyperbolic if magnitude == 0.0 => {
                return bad("curved space needs a positive magnitude")
            }
            SpaceKind::Sphere | SpaceKind::Hyperbolic if dim < 2 => {
                return bad("curved space needs dimension at least 2")
            }
            _ => {}
        }
        Ok(ConstantCurvature {
            dim,
            kind,
            magnitude,
            chart,
        })
    }

    pub fn flat(dim: usize) -> Self {
        ConstantCurvature::new(dim, 0.0, SpaceKind::Flat, Chart::Stereographic).expect("flat")
    }

    /// Round sphere of radius `r` (stereographic chart).
    pub fn sphere_radius(dim: usize, r: f64) -> Result<Self, GeomError> {
        ConstantCurvature::new(dim, (dim * (dim - 1)) as f64 / (r * r), SpaceKind::Sphere, Chart::Stereographic)
    }

    /// Curvature radius, `√(D(D−1)/magnitude)`.
    pub fn radius(&self) -> f64 {
        ((self.dim * (self.dim - 1)) as f64 / self.magnitude).sqrt()
    }

    /// Scalar curvature in the `Paper` sign convention: negative on spheres.
    pub fn paper_scalar(&self) -> f64 {
        match self.kind {
            SpaceKind::Flat => 0.0,
            SpaceKind::Sphere => -self.magnitude,
            SpaceKind::Hyperbolic => self.magnitude,
        }
    }
}

impl MetricField for ConstantCurvature {
    fn dim(&self) -> usize {
        self.dim
    }

    fn components(&self, x: &[Jet3]) -> Result<Vec<Jet3>, GeomError> {
        let n = self.dim;
        let zero = x[0].zero_like();
        let mut g = vec![zero.clone(); n * n];
        match (self.kind, self.chart) {
            (SpaceKind::Flat, _) => {
                for i in 0..n {
                    g[i * n + i] = zero.constant_like(1.0);
                }
            }
            (kind, Chart::Stereographic) => {
                let r = self.radius();
                let mut r2 = zero.clone();
                for xi in &x[..n] {
                    r2.add_assign_product(xi, xi);
                }
                let denom = match kind {
                    SpaceKind::Sphere => r2 + 1.0,
                    _ => 1.0 - r2,
                };
                if denom.value() <= 0.0 {
                    return Err(GeomError::OutsideDomain {
                        point: x.iter().map(|j| j.value()).collect(),
                    });
                }
                let f = (&denom * &denom).recip().scale(4.0 * r * r);
                for i in 0..n {
                    g[i * n + i] = f.clone();
                }
            }
            (kind, Chart::Hyperspherical) => {
                let r = self.radius();
                // g_00 = r², g_kk = r² s(χ)² Π_{1≤m<k} sin²θ_m
                let s = match kind {
                    SpaceKind::Sphere => x[0].sin(),
                    _ => x[0].sinh(),
                };
                let mut f = zero.constant_like(r * r);
                g[0] = f.clone();
                f = &f * &(&s * &s);
                for k in 1..n {
                    g[k * n + k] = f.clone();
                    if k + 1 < n {
                        let sk = x[k].sin();
                        f = &f * &(&sk * &sk);
                    }
                }
            }
        }
        Ok(g)
    }

    fn domain(&self) -> Domain {
        let n = self.dim;
        match (self.kind, self.chart) {
            (SpaceKind::Flat, _) => Domain::cube(n, 1.0),
            (SpaceKind::Sphere, Chart::Stereographic) => Domain::ball(n, 2.0),
            (SpaceKind::Hyperbolic, Chart::Stereographic) => Domain::ball(n, 0.9),
            (kind, Chart::Hyperspherical) => {
                let pi = std::f64::consts::PI;
                let chi_hi = if kind == SpaceKind::Sphere { pi - 0.2 } else { 2.0 };
                let mut lo = vec![0.2; n];
                let mut hi = vec![pi - 0.2; n];
                hi[0] = chi_hi;
                if n >= 2 {
                    lo[n - 1] = -pi;
                    hi[n - 1] = pi;
                }
                Domain { lo, hi, ball: None }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{curvature_bundle, Convention};

    #[test]
    fn scalar_magnitudes_in_both_charts() {
        let p3 = [0.7, 1.1, 0.4];
        for chart in [Chart::Stereographic, Chart::Hyperspherical] {
            let s = ConstantCurvature::new(3, 6.0, SpaceKind::Sphere, chart).unwrap();
            let p: &[f64] = if chart == Chart::Stereographic { &[0.3, -0.2, 0.5] } else { &p3 };
            let b = curvature_bundle(&s, p, Convention::Paper).unwrap();
            assert!((b.scalar + 6.0).abs() < 1e-11, "{chart:?} {}", b.scalar);
            let h = ConstantCurvature::new(3, 6.0, SpaceKind::Hyperbolic, chart).unwrap();
            let b = curvature_bundle(&h, p, Convention::Standard).unwrap();
            assert!((b.scalar + 6.0).abs() < 1e-11, "{chart:?} {}", b.scalar);
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(ConstantCurvature::new(3, -1.0, SpaceKind::Sphere, Chart::Stereographic).is_err());
        assert!(ConstantCurvature::new(3, 1.0, SpaceKind::Flat, Chart::Stereographic).is_err());
        assert!(ConstantCurvature::new(3, 0.0, SpaceKind::Hyperbolic, Chart::Stereographic).is_err());
    }
}
