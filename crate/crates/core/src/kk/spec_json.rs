//! JSON documents describing a [`KKSpec`].
//!
//! Two forms are accepted. A named catalog model:
//!
//! ```json
//! { "model": { "name": "hopf-instanton", "params": { "k": 4.0 } } }
//! ```
//!
//! or a custom spec assembled from parts:
//!
//! ```json
//! { "custom": {
//!     "name": "circle bundle",
//!     "external": { "polynomial": { "dim": 2, "upper": [...], "domain": {...} } },
//!     "internal": { "named": { "name": "sphere", "params": { "dim": 3 } } },
//!     "killing":  { "s3": { "radius": 1.0 } },
//!     "gauge":    { "zero": {} },
//!     "structure": { "su2": 2.0 } } }
//! ```
//!
//! Unknown keys are rejected at every level.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{GeomError, MetricField};
use crate::kk::{FrameField, GaugeField, KKSpec, ZeroGauge};
use crate::models::{self, Params, PolyFrame, PolyGauge, PolyMetric};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed spec document: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SpecDocument {
    Model(NamedModel),
    Custom(CustomSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedModel {
    pub name: String,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSpec {
    #[serde(default = "default_name")]
    pub name: String,
    pub external: MetricDoc,
    pub internal: MetricDoc,
    pub killing: FrameDoc,
    pub gauge: GaugeDoc,
    pub structure: StructureDoc,
}

fn default_name() -> String {
    "custom".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricDoc {
    Named(NamedModel),
    Polynomial(PolyMetric),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FrameDoc {
    S3 { radius: f64 },
    Polynomial(PolyFrame),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GaugeDoc {
    Zero {},
    Polynomial(PolyGauge),
    Instanton {
        k: f64,
        #[serde(default = "one")]
        chart_scale: f64,
        #[serde(default)]
        triple: Option<models::Triple>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StructureDoc {
    /// `scale · ε`.
    Su2(f64),
    /// All zero for `n` generators.
    Abelian(usize),
    /// `c_{𝖻𝖼}^𝖺` flattened `[𝖻][𝖼][𝖺]`.
    Explicit(Vec<f64>),
}

impl MetricDoc {
    fn build(&self) -> Result<Arc<dyn MetricField>, GeomError> {
        match self {
            MetricDoc::Named(m) => models::metric_model(&m.name, &m.params),
            MetricDoc::Polynomial(p) => {
                let p = PolyMetric::new(p.dim, p.upper.clone(), p.domain.clone())?;
                Ok(Arc::new(p))
            }
        }
    }
}

fn check_poly_fields(dim: usize, fields: &[Vec<models::Polynomial>], what: &str) -> Result<(), GeomError> {
    for row in fields {
        if row.len() != dim {
            return Err(GeomError::InvalidParameter(format!("{what} row has {} entries, expected {dim}", row.len())));
        }
        for p in row {
            p.check_vars(dim)?;
        }
    }
    Ok(())
}

impl CustomSpec {
    pub fn build(&self) -> Result<KKSpec, GeomError> {
        let external = self.external.build()?;
        let internal = self.internal.build()?;
        let killing: Arc<dyn FrameField> = match &self.killing {
            FrameDoc::S3 { radius } => Arc::new(models::s3_killing_frame(*radius)?),
            FrameDoc::Polynomial(f) => {
                check_poly_fields(f.dim, &f.fields, "Killing field")?;
                Arc::new(f.clone())
            }
        };
        let n = killing.count();
        let gauge: Arc<dyn GaugeField> = match &self.gauge {
            GaugeDoc::Zero {} => Arc::new(ZeroGauge {
                count: n,
                dim: external.dim(),
            }),
            GaugeDoc::Polynomial(g) => {
                check_poly_fields(g.dim, &g.fields, "gauge field")?;
                Arc::new(g.clone())
            }
            GaugeDoc::Instanton {
                k,
                chart_scale,
                triple,
            } => {
                let qk = models::QKStructure::new(*k, *chart_scale, triple.unwrap_or(models::Triple::Left))?;
                Arc::new(models::InstantonGauge { structure: qk })
            }
        };
        let structure = match &self.structure {
            StructureDoc::Su2(s) => models::su2_structure(*s),
            StructureDoc::Abelian(n) => vec![0.0; n * n * n],
            StructureDoc::Explicit(v) => v.clone(),
        };
        let spec = KKSpec {
            name: self.name.clone(),
            external,
            internal,
            killing,
            gauge,
            structure,
        };
        spec.check_dimensions()?;
        Ok(spec)
    }
}

impl SpecDocument {
    pub fn build(&self) -> Result<KKSpec, GeomError> {
        match self {
            SpecDocument::Model(m) => models::kk_model(&m.name, &m.params),
            SpecDocument::Custom(c) => c.build(),
        }
    }
}

/// Parse and build a spec from JSON text.
pub fn parse_spec(text: &str) -> Result<KKSpec, SpecError> {
    let doc: SpecDocument = serde_json::from_str(text)?;
    Ok(doc.build()?)
}

/// Read, parse and build a spec file.
pub fn load_spec(path: &Path) -> Result<KKSpec, SpecError> {
    let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_spec(&text)
}
