//! Catalog of concrete geometries.
//!
//! Every entry is addressable by name plus a flat map of numeric parameters,
//! which is how both the command line and spec documents refer to them.

mod poly;
mod qk;
mod quaternion;
mod s3;
mod spaces;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geom::{Domain, GeomError, MetricField};
use crate::kk::{KKSpec, ZeroGauge};
use crate::rng::XorShift64Star;

pub use poly::{monomials, PolyFrame, PolyGauge, PolyMetric, Polynomial, Powers, Term};
pub use qk::{
    instanton_gauge_field, instanton_gauge_with, quaternionic_space_form, InstantonGauge, QKStructure, Triple,
    K_RELATION_TOL,
};
pub use quaternion::{left_mul, levi_civita, qmul, right_mul};
pub use s3::{s3_killing_frame, su2_structure, BergerSphere, S3Frame};
pub use spaces::{Chart, ConstantCurvature, SpaceKind};

pub type Params = BTreeMap<String, f64>;

/// What a catalog entry can supply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provides {
    Metric,
    KillingFrame,
    GaugeField,
    QkStructure,
    KkSpec,
}

/// A catalog entry: name, default parameters, and what it provides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub name: String,
    pub params: Params,
    pub provides: Vec<Provides>,
    pub summary: String,
}

fn descriptor(name: &str, params: &[(&str, f64)], provides: &[Provides], summary: &str) -> ModelDescriptor {
    ModelDescriptor {
        name: name.to_string(),
        params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        provides: provides.to_vec(),
        summary: summary.to_string(),
    }
}

/// All named models with their default parameters.
pub fn catalog() -> Vec<ModelDescriptor> {
    use Provides::*;
    vec![
        descriptor("flat", &[("dim", 4.0)], &[Metric], "Euclidean space"),
        descriptor(
            "sphere",
            &[("dim", 3.0), ("scalar", 6.0), ("hyperspherical", 0.0)],
            &[Metric],
            "round sphere with |R| = scalar",
        ),
        descriptor(
            "hyperbolic",
            &[("dim", 4.0), ("scalar", 12.0), ("hyperspherical", 0.0)],
            &[Metric],
            "hyperbolic space with |R| = scalar",
        ),
        descriptor(
            "s3-frame",
            &[("radius", 1.0)],
            &[Metric, KillingFrame],
            "3-sphere with orthonormal left-invariant Killing frame",
        ),
        descriptor(
            "berger",
            &[("lambda1", 0.7), ("lambda2", 1.0), ("lambda3", 1.6)],
            &[Metric],
            "squashed 3-sphere, right-invariant with factors λ",
        ),
        descriptor(
            "qk-space-form",
            &[("k", 4.0), ("chart_scale", 1.0), ("j_scale", 1.0)],
            &[Metric, QkStructure],
            "four-sphere with its quaternionic triple",
        ),
        descriptor(
            "trivial-solution",
            &[("d", 4.0), ("c", 3.0), ("r_in", -6.0), ("rex_scale", 1.0)],
            &[KkSpec],
            "A = 0 product of constant-curvature spaces",
        ),
        descriptor(
            "hopf-instanton",
            &[
                ("k", 4.0),
                ("internal_radius", 1.0),
                ("detune_internal_radius", 1.0),
                ("chart_scale", 1.0),
                ("chirality", 1.0),
            ],
            &[KkSpec, GaugeField],
            "S³ bundle over S⁴ with the one-instanton connection",
        ),
        descriptor(
            "random",
            &[("seed", 0.0), ("d", 4.0), ("eps", 0.05), ("gauge_scale", 0.3)],
            &[KkSpec],
            "polynomial external metric and gauge field over the unit S³",
        ),
        descriptor(
            "random-squashed",
            &[
                ("seed", 0.0),
                ("d", 4.0),
                ("eps", 0.05),
                ("gauge_scale", 0.3),
                ("lambda1", 0.7),
                ("lambda2", 1.0),
                ("lambda3", 1.6),
            ],
            &[KkSpec],
            "polynomial external metric and gauge field over a squashed S³",
        ),
    ]
}

pub fn descriptor_by_name(name: &str) -> Option<ModelDescriptor> {
    catalog().into_iter().find(|d| d.name == name)
}

/// Defaults of `name` overridden by `params`; unknown keys are rejected.
pub fn resolve_params(name: &str, params: &Params) -> Result<Params, GeomError> {
    let desc = descriptor_by_name(name)
        .ok_or_else(|| GeomError::InvalidParameter(format!("unknown model `{name}`")))?;
    let mut out = desc.params.clone();
    for (k, v) in params {
        match out.get_mut(k) {
            Some(slot) => *slot = *v,
            None => {
                return Err(GeomError::InvalidParameter(format!(
                    "model `{name}` has no parameter `{k}` (known: {:?})",
                    desc.params.keys().collect::<Vec<_>>()
                )))
            }
        }
    }
    Ok(out)
}

fn count_param(p: &Params, key: &str) -> Result<usize, GeomError> {
    let v = p[key];
    if v < 1.0 || v.fract() != 0.0 || v > crate::jet::MAX_DIM as f64 {
        return Err(GeomError::InvalidParameter(format!("`{key}` must be a positive integer, got {v}")));
    }
    Ok(v as usize)
}

fn seed_param(p: &Params) -> Result<u64, GeomError> {
    let seed = p["seed"];
    if seed < 0.0 || seed.fract() != 0.0 {
        return Err(GeomError::InvalidParameter(format!("seed must be a non-negative integer, got {seed}")));
    }
    Ok(seed as u64)
}

fn lambdas(p: &Params) -> [f64; 3] {
    [p["lambda1"], p["lambda2"], p["lambda3"]]
}

fn chart_param(p: &Params) -> Chart {
    if p["hyperspherical"] != 0.0 {
        Chart::Hyperspherical
    } else {
        Chart::Stereographic
    }
}

/// A metric-only model.
pub fn metric_model(name: &str, params: &Params) -> Result<Arc<dyn MetricField>, GeomError> {
    let p = resolve_params(name, params)?;
    Ok(match name {
        "flat" => Arc::new(ConstantCurvature::flat(count_param(&p, "dim")?)),
        "sphere" => Arc::new(ConstantCurvature::new(
            count_param(&p, "dim")?,
            p["scalar"],
            SpaceKind::Sphere,
            chart_param(&p),
        )?),
        "hyperbolic" => Arc::new(ConstantCurvature::new(
            count_param(&p, "dim")?,
            p["scalar"],
            SpaceKind::Hyperbolic,
            chart_param(&p),
        )?),
        "s3-frame" => Arc::new(ConstantCurvature::sphere_radius(3, positive(&p, "radius")?)?),
        "qk-space-form" => Arc::new(qk_model(&p)?),
        "berger" => Arc::new(BergerSphere::new(lambdas(&p))?),
        _ => {
            return Err(GeomError::InvalidParameter(format!(
                "model `{name}` does not provide a single metric"
            )))
        }
    })
}

fn positive(p: &Params, key: &str) -> Result<f64, GeomError> {
    let v = p[key];
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(GeomError::InvalidParameter(format!("`{key}` must be positive, got {v}")))
    }
}

fn qk_model(p: &Params) -> Result<QKStructure, GeomError> {
    Ok(QKStructure::new(p["k"], p["chart_scale"], Triple::Left)?.with_j_scale(p["j_scale"]))
}

/// The quaternionic structure of a named model.
pub fn qk_structure_model(name: &str, params: &Params) -> Result<QKStructure, GeomError> {
    let p = resolve_params(name, params)?;
    match name {
        "qk-space-form" => qk_model(&p),
        _ => Err(GeomError::InvalidParameter(format!(
            "model `{name}` does not provide a quaternionic structure"
        ))),
    }
}

/// A Kaluza-Klein spec from a named model.
pub fn kk_model(name: &str, params: &Params) -> Result<KKSpec, GeomError> {
    let p = resolve_params(name, params)?;
    match name {
        "trivial-solution" => {
            let (d, c) = (count_param(&p, "d")?, count_param(&p, "c")?);
            let r_ex = trivial_external_scalar(d, c, p["r_in"])? * p["rex_scale"];
            trivial_solution_with_external(d, c, p["r_in"], r_ex)
        }
        "hopf-instanton" => {
            let triple = if p["chirality"] >= 0.0 { Triple::Left } else { Triple::Right };
            let qk = QKStructure::new(p["k"], p["chart_scale"], triple)?;
            hopf_instanton_spec(qk, positive(&p, "internal_radius")?, positive(&p, "detune_internal_radius")?)
        }
        "random" => random_spec(count_param(&p, "d")?, seed_param(&p)?, p["eps"], p["gauge_scale"]),
        "random-squashed" => {
            random_squashed_spec(count_param(&p, "d")?, seed_param(&p)?, p["eps"], p["gauge_scale"], lambdas(&p))
        }
        _ => Err(GeomError::InvalidParameter(format!(
            "model `{name}` does not provide a Kaluza-Klein spec"
        ))),
    }
}

/// Signed (`Paper` convention) constant-curvature metric.
pub fn signed_space(dim: usize, scalar: f64) -> Result<ConstantCurvature, GeomError> {
    if scalar == 0.0 {
        return Ok(ConstantCurvature::flat(dim));
    }
    // `Paper` convention: spheres have negative scalar curvature.
    let kind = if scalar < 0.0 { SpaceKind::Sphere } else { SpaceKind::Hyperbolic };
    ConstantCurvature::new(dim, scalar.abs(), kind, Chart::Stereographic)
}

/// `R^ex = −d(d−1)R^in/(c(c−1))`; for a circle (`c = 1`) the internal space
/// is flat and the external scalar is taken to be zero.
pub fn trivial_external_scalar(d: usize, c: usize, r_in: f64) -> Result<f64, GeomError> {
    match c {
        1 => {
            if r_in != 0.0 {
                return Err(GeomError::InvalidParameter(
                    "a circle has zero curvature; use r_in = 0 with c = 1".into(),
                ));
            }
            Ok(0.0)
        }
        3 => Ok(-((d * (d - 1)) as f64) * r_in / 6.0),
        _ => Err(GeomError::InvalidParameter(format!(
            "trivial solutions ship Killing frames for c ∈ {{1, 3}}, got c = {c}"
        ))),
    }
}

/// `A ≡ 0` over constant-curvature spaces related by the trivial-solution
/// scalar relation (`Paper` sign convention for `r_in`).
pub fn trivial_solution_spec(d: usize, c: usize, r_in: f64) -> Result<KKSpec, GeomError> {
    trivial_solution_with_external(d, c, r_in, trivial_external_scalar(d, c, r_in)?)
}

/// Same construction with an explicitly chosen external scalar (for
/// detuning experiments).
pub fn trivial_solution_with_external(d: usize, c: usize, r_in: f64, r_ex: f64) -> Result<KKSpec, GeomError> {
    let external: Arc<dyn MetricField> = Arc::new(signed_space(d, r_ex)?);
    let spec = match c {
        1 => {
            trivial_external_scalar(d, c, r_in)?;
            let frame = PolyFrame {
                dim: 1,
                fields: vec![vec![Polynomial::constant(1.0, 1)]],
            };
            let circle = PolyMetric::new(1, vec![Polynomial::constant(1.0, 1)], Domain::cube(1, 1.0))?;
            KKSpec {
                name: format!("trivial-solution(d={d},c=1)"),
                external,
                internal: Arc::new(circle),
                killing: Arc::new(frame),
                gauge: Arc::new(ZeroGauge { count: 1, dim: d }),
                structure: vec![0.0],
            }
        }
        3 => {
            if r_in >= 0.0 {
                return Err(GeomError::InvalidParameter(format!(
                    "the parallelized internal 3-sphere needs r_in < 0 (Paper convention), got {r_in}"
                )));
            }
            let radius = (6.0 / r_in.abs()).sqrt();
            let frame = s3_killing_frame(radius)?;
            KKSpec {
                name: format!("trivial-solution(d={d},c=3)"),
                external,
                internal: Arc::new(ConstantCurvature::sphere_radius(3, radius)?),
                structure: frame.structure_constants(),
                killing: Arc::new(frame),
                gauge: Arc::new(ZeroGauge { count: 3, dim: d }),
            }
        }
        _ => {
            return Err(GeomError::InvalidParameter(format!(
                "trivial solutions ship Killing frames for c ∈ {{1, 3}}, got c = {c}"
            )))
        }
    };
    Ok(spec)
}

/// Quaternionic space form + internal `S³` + instanton. The gauge field is
/// built for the undetuned radius; `detune` multiplies the internal radius
/// (and consistently the frame and structure constants) afterwards.
pub fn hopf_instanton_spec(qk: QKStructure, internal_radius: f64, detune: f64) -> Result<KKSpec, GeomError> {
    let r_in = 6.0 / (internal_radius * internal_radius);
    let gauge = instanton_gauge_with(qk.clone(), r_in)?;
    let radius = internal_radius * detune;
    let frame = s3_killing_frame(radius)?;
    Ok(KKSpec {
        name: format!("hopf-instanton(k={},radius={radius},{:?})", qk.k, qk.triple),
        external: Arc::new(qk),
        internal: Arc::new(ConstantCurvature::sphere_radius(3, radius)?),
        structure: frame.structure_constants(),
        killing: Arc::new(frame),
        gauge: Arc::new(gauge),
    })
}

/// The flagship configuration: `k = 4` over the unit `S³`.
pub fn hopf_instanton_default() -> KKSpec {
    hopf_instanton_spec(quaternionic_space_form(4.0, 1.0).expect("k = 4"), 1.0, 1.0).expect("unit S³")
}

/// Random non-solution spec: `g = δ + eps·(degree ≤ 2)` on `[−½, ½]^d`,
/// random degree-≤2 gauge field, internal unit `S³` with its frame.
pub fn random_spec(d: usize, seed: u64, eps: f64, gauge_scale: f64) -> Result<KKSpec, GeomError> {
    random_spec_with_internal(d, seed, eps, gauge_scale, Arc::new(ConstantCurvature::sphere_radius(3, 1.0)?))
}

/// As [`random_spec`] but over a squashed [`BergerSphere`], which makes the
/// internal Cotton tensor, the traceless internal Ricci tensor and the
/// internal gradients of `F²` nonzero.
pub fn random_squashed_spec(
    d: usize,
    seed: u64,
    eps: f64,
    gauge_scale: f64,
    lambdas: [f64; 3],
) -> Result<KKSpec, GeomError> {
    let mut spec = random_spec_with_internal(d, seed, eps, gauge_scale, Arc::new(BergerSphere::new(lambdas)?))?;
    spec.name = format!("random-squashed(d={d},seed={seed},λ={lambdas:?})");
    Ok(spec)
}

fn random_spec_with_internal(
    d: usize,
    seed: u64,
    eps: f64,
    gauge_scale: f64,
    internal: Arc<dyn MetricField>,
) -> Result<KKSpec, GeomError> {
    if !(eps > 0.0 && eps < 0.2) {
        return Err(GeomError::InvalidParameter(format!("eps must lie in (0, 0.2), got {eps}")));
    }
    let mut rng = XorShift64Star::new(seed);
    let external = PolyMetric::random_perturbation(d, 2, eps, 0.5, &mut rng);
    let gauge = PolyGauge::random(3, d, 2, gauge_scale, &mut rng);
    let frame = s3_killing_frame(1.0)?;
    Ok(KKSpec {
        name: format!("random(d={d},seed={seed})"),
        external: Arc::new(external),
        internal,
        structure: frame.structure_constants(),
        killing: Arc::new(frame),
        gauge: Arc::new(gauge),
    })
}
