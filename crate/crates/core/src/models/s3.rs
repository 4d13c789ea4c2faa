//! The parallelized 3-sphere: stereographic chart plus three orthonormal
//! left-invariant Killing fields.
//!
//! With `q ∈ S³ ⊂ ℍ` and the chart `y = q⃗/(1+q₀)`, the field `V_𝖺(q) = q·e_𝖺`
//! is pushed forward as `V_y = V⃗/(1+q₀) − q⃗ V₀/(1+q₀)²`. Left-invariant fields
//! bracket like the imaginary quaternions, `[V_𝖺, V_𝖻] = 2ε_{𝖺𝖻𝖼}V_𝖼`, so the
//! normalized frame `K_𝖺 = V_𝖺/r` closes with `c_{𝖺𝖻}^𝖼 = (2/r)ε_{𝖺𝖻𝖼}`.

use crate::geom::{Domain, GeomError, MetricField};
use crate::jet::Jet3;
use crate::kk::FrameField;
use crate::tensor::linalg::invert_jets;

use super::quaternion::{left_mul, levi_civita, right_mul};

#[derive(Debug, Clone, PartialEq)]
pub struct S3Frame {
    pub radius: f64,
}

/// Orthonormal Killing frame on the stereographic 3-sphere of `radius`.
pub fn s3_killing_frame(radius: f64) -> Result<S3Frame, GeomError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(GeomError::InvalidParameter(format!("S³ radius must be positive, got {radius}")));
    }
    Ok(S3Frame { radius })
}

impl S3Frame {
    /// `c_{𝖻𝖼}^𝖺`, stored `[𝖻][𝖼][𝖺]`.
    pub fn structure_constants(&self) -> Vec<f64> {
        su2_structure(2.0 / self.radius)
    }
}

/// `scale · ε_{𝖻𝖼𝖺}` stored `[𝖻][𝖼][𝖺]`.
pub fn su2_structure(scale: f64) -> Vec<f64> {
    let mut out = vec![0.0; 27];
    for b in 0..3 {
        for c in 0..3 {
            for a in 0..3 {
                out[(b * 3 + c) * 3 + a] = scale * levi_civita(b, c, a);
            }
        }
    }
    out
}

impl FrameField for S3Frame {
    fn count(&self) -> usize {
        3
    }
    fn dim(&self) -> usize {
        3
    }
    fn components(&self, y: &[Jet3]) -> Result<Vec<Jet3>, GeomError> {
        Ok(pushed_fields(y, right_mul).into_iter().map(|v| v.scale(1.0 / self.radius)).collect())
    }
}

/// The three fields `q ↦ M_𝖺 q` for the multiplication matrices `mul(𝖺)`,
/// pushed into the stereographic chart; `[𝖺][i]` row-major.
fn pushed_fields(y: &[Jet3], mul: fn(usize) -> [[f64; 4]; 4]) -> Vec<Jet3> {
    let y = &y[..3];
    let mut r2 = y[0].zero_like();
    for yi in y {
        r2.add_assign_product(yi, yi);
    }
    let inv = (&r2 + 1.0).recip();
    // q = ((1−|y|²), 2y) / (1+|y|²)
    let q0 = (1.0 - &r2) * &inv;
    let q: [Jet3; 4] = [
        q0.clone(),
        (&y[0] * &inv).scale(2.0),
        (&y[1] * &inv).scale(2.0),
        (&y[2] * &inv).scale(2.0),
    ];
    let one_plus = (&q0 + 1.0).recip();
    let one_plus2 = &one_plus * &one_plus;
    let mut out = Vec::with_capacity(9);
    for a in 0..3 {
        let m = mul(a);
        let v: Vec<Jet3> = (0..4)
            .map(|row| {
                let mut s = q0.zero_like();
                for (n, qn) in q.iter().enumerate() {
                    if m[row][n] != 0.0 {
                        s = s + qn.scale(m[row][n]);
                    }
                }
                s
            })
            .collect();
        for i in 0..3 {
            out.push(&v[i + 1] * &one_plus - &(&q[i + 1] * &v[0]) * &one_plus2);
        }
    }
    out
}

/// Squashed 3-sphere `Σ_𝖺 λ_𝖺 ρ^𝖺⊗ρ^𝖺`, where `ρ^𝖺` is the coframe dual to
/// the right-invariant fields `e_𝖺 q`. The metric is invariant under right
/// translations, so the left-invariant frame of [`S3Frame`] stays Killing
/// while the internal Ricci tensor picks up a traceless part and
/// `𝗀_{𝖺𝖻} = κ(K_𝖺, K_𝖻)` varies over the sphere. `λ = (1, 1, 1)` is the unit
/// round sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct BergerSphere {
    pub lambdas: [f64; 3],
}

impl BergerSphere {
    pub fn new(lambdas: [f64; 3]) -> Result<BergerSphere, GeomError> {
        if lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(GeomError::InvalidParameter(format!("squashing factors must be positive, got {lambdas:?}")));
        }
        Ok(BergerSphere { lambdas })
    }
}

impl MetricField for BergerSphere {
    fn dim(&self) -> usize {
        3
    }

    fn components(&self, y: &[Jet3]) -> Result<Vec<Jet3>, GeomError> {
        // κ^{ij} = Σ_𝖺 W_𝖺^i W_𝖺^j / λ_𝖺
        let w = pushed_fields(y, left_mul);
        let mut inv = Vec::with_capacity(9);
        for i in 0..3 {
            for j in 0..3 {
                let mut s = y[0].zero_like();
                for a in 0..3 {
                    s = s + (&w[a * 3 + i] * &w[a * 3 + j]).scale(1.0 / self.lambdas[a]);
                }
                inv.push(s);
            }
        }
        Ok(invert_jets(3, &inv)?)
    }

    fn domain(&self) -> Domain {
        Domain::ball(3, 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kk::{killing_residuals, KKSpec, ZeroGauge};
    use crate::models::ConstantCurvature;
    use std::sync::Arc;

    fn spec_on(internal: Arc<dyn MetricField>, frame: Arc<dyn FrameField>) -> KKSpec {
        KKSpec {
            name: "test".into(),
            external: Arc::new(ConstantCurvature::flat(2)),
            internal,
            structure: su2_structure(2.0),
            killing: frame,
            gauge: Arc::new(ZeroGauge { count: 3, dim: 2 }),
        }
    }

    #[test]
    fn unit_berger_is_the_round_sphere() {
        let berger = BergerSphere::new([1.0, 1.0, 1.0]).unwrap();
        let round = ConstantCurvature::sphere_radius(3, 1.0).unwrap();
        for y in [[0.1, -0.3, 0.7], [1.2, 0.4, -0.5]] {
            let ys = Jet3::seed_point(&y).unwrap();
            let a = berger.components(&ys).unwrap();
            let b = round.components(&ys).unwrap();
            for (x, z) in a.iter().zip(&b) {
                assert!((x.value() - z.value()).abs() < 1e-13);
                assert!((x.derivative(&[1]) - z.derivative(&[1])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn left_invariant_frame_is_killing_for_squashed_metric() {
        let berger: Arc<dyn MetricField> = Arc::new(BergerSphere::new([0.7, 1.0, 1.6]).unwrap());
        let spec = spec_on(berger, Arc::new(s3_killing_frame(1.0).unwrap()));
        for y in [[0.2, 0.1, -0.4], [-0.9, 0.5, 0.3]] {
            let (lie, comm) = killing_residuals(&spec, &y).unwrap();
            assert!(lie < 1e-12 && comm < 1e-12, "{lie:e} {comm:e}");
        }
    }

    #[test]
    fn right_invariant_fields_are_not_killing_when_squashed() {
        #[derive(Debug)]
        struct RightInvariant;
        impl FrameField for RightInvariant {
            fn count(&self) -> usize {
                3
            }
            fn dim(&self) -> usize {
                3
            }
            fn components(&self, y: &[Jet3]) -> Result<Vec<Jet3>, GeomError> {
                Ok(pushed_fields(y, left_mul))
            }
        }
        let berger: Arc<dyn MetricField> = Arc::new(BergerSphere::new([0.7, 1.0, 1.6]).unwrap());
        let spec = spec_on(berger, Arc::new(RightInvariant));
        let (lie, _) = killing_residuals(&spec, &[0.2, 0.1, -0.4]).unwrap();
        assert!(lie > 1e-3, "{lie:e}");
    }
}
