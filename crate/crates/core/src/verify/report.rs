//! Residual bookkeeping and the JSON report.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::tensor::DenseTensor;

/// Smallest scale used when normalizing a residual.
pub const SCALE_FLOOR: f64 = 1e-30;
/// Default relative tolerance for solution certification.
pub const DEFAULT_TOL_REL: f64 = 1e-7;
/// Absolute threshold under which a residual counts as an analytic zero.
pub const DEFAULT_TOL_ABS: f64 = 1e-9;
/// Version of the report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Every displayed equation the verifier evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EquationId {
    #[serde(rename = "W-8a")]
    W8a,
    #[serde(rename = "W-8b")]
    W8b,
    #[serde(rename = "W-8c")]
    W8c,
    #[serde(rename = "W-8d")]
    W8d,
    #[serde(rename = "W-8e")]
    W8e,
    #[serde(rename = "W-8f")]
    W8f,
    #[serde(rename = "W-8g")]
    W8g,
    #[serde(rename = "W-8h")]
    W8h,
    #[serde(rename = "C-9a")]
    C9a,
    #[serde(rename = "C-9b")]
    C9b,
    #[serde(rename = "REL-10")]
    Rel10,
    #[serde(rename = "REX-12")]
    Rex12,
    #[serde(rename = "IN-13a")]
    In13a,
    #[serde(rename = "IN-13b")]
    In13b,
    #[serde(rename = "EX-16a")]
    Ex16a,
    #[serde(rename = "EX-16b")]
    Ex16b,
    #[serde(rename = "FF-17")]
    Ff17,
    #[serde(rename = "FF-18")]
    Ff18,
    #[serde(rename = "F2-21")]
    F2_21,
    #[serde(rename = "QK-1a")]
    Qk1a,
    #[serde(rename = "QK-1b")]
    Qk1b,
    #[serde(rename = "QK-2a")]
    Qk2a,
    #[serde(rename = "QK-2b")]
    Qk2b,
    #[serde(rename = "QK-3a")]
    Qk3a,
    #[serde(rename = "QK-3b")]
    Qk3b,
    #[serde(rename = "GBAR-22a")]
    Gbar22a,
    #[serde(rename = "GBAR-22b")]
    Gbar22b,
}

/// Grouping used by the CLI suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Flatness,
    Integrability,
    CurvatureForms,
    Quaternionic,
}

impl EquationId {
    pub const ALL: [EquationId; 27] = [
        EquationId::W8a,
        EquationId::W8b,
        EquationId::W8c,
        EquationId::W8d,
        EquationId::W8e,
        EquationId::W8f,
        EquationId::W8g,
        EquationId::W8h,
        EquationId::C9a,
        EquationId::C9b,
        EquationId::Rel10,
        EquationId::Rex12,
        EquationId::In13a,
        EquationId::In13b,
        EquationId::Ex16a,
        EquationId::Ex16b,
        EquationId::Ff17,
        EquationId::Ff18,
        EquationId::F2_21,
        EquationId::Qk1a,
        EquationId::Qk1b,
        EquationId::Qk2a,
        EquationId::Qk2b,
        EquationId::Qk3a,
        EquationId::Qk3b,
        EquationId::Gbar22a,
        EquationId::Gbar22b,
    ];

    pub fn tag(self) -> &'static str {
        use EquationId::*;
        match self {
            W8a => "W-8a",
            W8b => "W-8b",
            W8c => "W-8c",
            W8d => "W-8d",
            W8e => "W-8e",
            W8f => "W-8f",
            W8g => "W-8g",
            W8h => "W-8h",
            C9a => "C-9a",
            C9b => "C-9b",
            Rel10 => "REL-10",
            Rex12 => "REX-12",
            In13a => "IN-13a",
            In13b => "IN-13b",
            Ex16a => "EX-16a",
            Ex16b => "EX-16b",
            Ff17 => "FF-17",
            Ff18 => "FF-18",
            F2_21 => "F2-21",
            Qk1a => "QK-1a",
            Qk1b => "QK-1b",
            Qk2a => "QK-2a",
            Qk2b => "QK-2b",
            Qk3a => "QK-3a",
            Qk3b => "QK-3b",
            Gbar22a => "GBAR-22a",
            Gbar22b => "GBAR-22b",
        }
    }

    pub fn from_tag(tag: &str) -> Option<EquationId> {
        EquationId::ALL.into_iter().find(|e| e.tag() == tag)
    }

    pub fn family(self) -> Family {
        use EquationId::*;
        match self {
            W8a | W8b | W8c | W8d | W8e | W8f | W8g | W8h => Family::Flatness,
            C9a | C9b => Family::Integrability,
            Rel10 | Rex12 | In13a | In13b | Ex16a | Ex16b | Ff17 | Ff18 | F2_21 => Family::CurvatureForms,
            Qk1a | Qk1b | Qk2a | Qk2b | Qk3a | Qk3b | Gbar22a | Gbar22b => Family::Quaternionic,
        }
    }

    /// True for the equations that characterize conformal flatness itself
    /// (as opposed to consequences that only hold on the solution branch).
    pub fn is_defining(self) -> bool {
        matches!(self.family(), Family::Flatness | Family::Integrability)
    }
}

impl fmt::Display for EquationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// One equation written as a list of signed terms summing to zero.
///
/// The residual is the sum of the terms; its scale is the largest single
/// term, so cancellations between large terms are measured relative to the
/// terms themselves.
#[derive(Debug, Clone, Default)]
pub struct Balance {
    terms: Vec<(&'static str, DenseTensor)>,
}

impl Balance {
    pub fn new() -> Balance {
        Balance { terms: Vec::new() }
    }

    /// Adds a term as it stands on the left-hand side.
    pub fn lhs(mut self, name: &'static str, t: DenseTensor) -> Balance {
        self.terms.push((name, t));
        self
    }

    /// Adds a right-hand-side term (moved to the left with a minus sign).
    pub fn rhs(mut self, name: &'static str, t: DenseTensor) -> Balance {
        self.terms.push((name, t.scale(-1.0)));
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = (&'static str, &DenseTensor)> {
        self.terms.iter().map(|(n, t)| (*n, t))
    }

    /// Sum of all terms.
    pub fn residual(&self) -> DenseTensor {
        let mut it = self.terms.iter();
        let first = it.next().expect("balance without terms").1.clone();
        it.fold(first, |acc, (_, t)| acc.plus(t))
    }

    pub fn scale(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, t)| t.max_abs())
            .fold(SCALE_FLOOR, f64::max)
    }

    pub fn measure(&self) -> Measure {
        let abs = self.residual().max_abs();
        let scale = self.scale();
        Measure {
            abs,
            scale,
            rel: abs / scale,
        }
    }
}

/// Size of a residual at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    pub abs: f64,
    pub scale: f64,
    pub rel: f64,
}

impl Measure {
    pub fn passes(&self, tol: &Tolerance) -> bool {
        self.abs <= tol.abs || self.rel <= tol.rel
    }
}

/// Pass thresholds: a residual passes if it is an analytic zero in absolute
/// terms or small relative to its scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: DEFAULT_TOL_REL,
            abs: DEFAULT_TOL_ABS,
        }
    }
}

/// Residual of one equation (or one variant of it) at one point.
#[derive(Debug, Clone)]
pub struct PointResidual {
    pub tag: String,
    pub variant: Option<&'static str>,
    /// `Err(reason)` when the equation does not apply at this point.
    pub outcome: Result<Measure, String>,
    /// Whether the equation is a consequence that only holds on the
    /// solution branch.
    pub branch: bool,
}

impl PointResidual {
    pub fn of(id: EquationId, b: &Balance) -> PointResidual {
        PointResidual {
            tag: id.tag().to_string(),
            variant: None,
            outcome: Ok(b.measure()),
            branch: !id.is_defining(),
        }
    }

    pub fn variant(id: EquationId, variant: &'static str, b: &Balance) -> PointResidual {
        PointResidual {
            variant: Some(variant),
            ..PointResidual::of(id, b)
        }
    }

    pub fn not_applicable(id: EquationId, variant: Option<&'static str>, reason: impl Into<String>) -> PointResidual {
        PointResidual {
            tag: id.tag().to_string(),
            variant,
            outcome: Err(reason.into()),
            branch: !id.is_defining(),
        }
    }

    /// Residual of a named check that is not one of the displayed equations
    /// (used by the reduction comparator).
    pub fn named(tag: impl Into<String>, variant: Option<&'static str>, b: &Balance) -> PointResidual {
        PointResidual {
            tag: tag.into(),
            variant,
            outcome: Ok(b.measure()),
            branch: false,
        }
    }

    pub fn key(&self) -> (String, Option<&'static str>) {
        (self.tag.clone(), self.variant)
    }
}

/// Aggregate of one equation over all sample points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub tag: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub max_abs: f64,
    pub max_rel: f64,
    /// Index (into the sampled points) of the largest relative residual.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmax_point: Option<usize>,
    pub pass: bool,
    pub in_verdict: bool,
}

/// Folds per-point residuals into entries, in first-seen order.
pub fn aggregate(per_point: &[Vec<PointResidual>], tol: &Tolerance) -> Vec<(Entry, bool)> {
    let mut order: Vec<(String, Option<&'static str>)> = Vec::new();
    let mut acc: BTreeMap<(String, Option<&'static str>), (Entry, bool)> = BTreeMap::new();
    for (ip, residuals) in per_point.iter().enumerate() {
        for r in residuals {
            let key = r.key();
            let slot = acc.entry(key.clone()).or_insert_with(|| {
                order.push(key.clone());
                (
                    Entry {
                        tag: r.tag.clone(),
                        variant: r.variant.map(str::to_string),
                        applicable: false,
                        note: None,
                        max_abs: 0.0,
                        max_rel: 0.0,
                        argmax_point: None,
                        pass: true,
                        in_verdict: false,
                    },
                    r.branch,
                )
            });
            let e = &mut slot.0;
            match &r.outcome {
                Ok(m) => {
                    e.applicable = true;
                    e.max_abs = e.max_abs.max(m.abs);
                    if e.argmax_point.is_none() || m.rel > e.max_rel || m.rel.is_nan() {
                        e.max_rel = m.rel;
                        e.argmax_point = Some(ip);
                    }
                    if !m.passes(tol) {
                        e.pass = false;
                    }
                }
                Err(reason) => {
                    if e.note.is_none() {
                        e.note = Some(reason.clone());
                    }
                }
            }
        }
    }
    order
        .into_iter()
        .map(|k| {
            let (mut e, branch) = acc.remove(&k).expect("key recorded");
            if e.applicable {
                // Residuals at points where the equation does not apply do
                // not count; the note documents them.
                if e.note.is_some() {
                    e.note = Some(format!("not applicable at some points: {}", e.note.take().unwrap()));
                }
            } else {
                e.pass = true;
            }
            (e, branch)
        })
        .collect()
}

/// Spread (max − min over points) of the scalars that must be constant on
/// a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constancy {
    pub r_ex: f64,
    pub r_in: f64,
    pub f2: f64,
    /// Largest spread over the entries of `𝗀_{𝖺𝖻}`.
    pub gbar: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Per-tag outcome under both sign conventions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub tag: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub paper_pass: bool,
    pub standard_pass: bool,
    pub paper_max_rel: f64,
    pub standard_max_rel: f64,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    /// Equations whose literal form failed; any of them fails the verdict.
    pub failing: Vec<String>,
    /// Tags for which neither the literal form nor any variant passed.
    pub unresolved: Vec<String>,
}

/// Everything that is reproducible from the run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBody {
    pub suite: String,
    pub model: String,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
    pub points: usize,
    pub tolerance: Tolerance,
    pub convention: String,
    /// Sampled chart points (external coordinates first).
    pub sample_points: Vec<Vec<f64>>,
    /// Whether every defining equation passed, which enables the
    /// solution-branch consequences in the verdict.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution_branch: Option<bool>,
    pub entries: Vec<Entry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constancy: Option<Constancy>,
    pub derived: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Vec<ComparisonRow>>,
    pub verdict: Verdict,
}

/// Run facts that legitimately differ between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub timestamp_unix: u64,
    pub elapsed_seconds: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub schema_version: u32,
    pub body: ReportBody,
    pub metadata: Metadata,
}

impl ResidualReport {
    /// Serialized body only; identical runs give identical bytes.
    pub fn body_json(&self) -> String {
        serde_json::to_string_pretty(&self.body).expect("report body serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn entry(&self, tag: &str, variant: Option<&str>) -> Option<&Entry> {
        self.body
            .entries
            .iter()
            .find(|e| e.tag == tag && e.variant.as_deref() == variant)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{Block, Slot};

    fn vec2(a: f64, b: f64) -> DenseTensor {
        DenseTensor::new(vec![Slot::down(2, Block::External)], vec![a, b]).unwrap()
    }

    #[test]
    fn balance_scale_is_largest_term() {
        let b = Balance::new().lhs("x", vec2(3.0, 1.0)).rhs("y", vec2(3.0, 0.5));
        let m = b.measure();
        assert_eq!(m.abs, 0.5);
        assert_eq!(m.scale, 3.0);
        assert!((m.rel - 0.5 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_terms_use_the_floor() {
        let b = Balance::new().lhs("x", vec2(0.0, 0.0));
        assert_eq!(b.measure().scale, SCALE_FLOOR);
        assert!(b.measure().passes(&Tolerance::default()));
    }

    #[test]
    fn tags_round_trip() {
        for id in EquationId::ALL {
            assert_eq!(EquationId::from_tag(id.tag()), Some(id));
            let js = serde_json::to_string(&id).unwrap();
            assert_eq!(js, format!("\"{}\"", id.tag()));
        }
    }

    #[test]
    fn aggregate_tracks_worst_point() {
        let mk = |abs: f64| PointResidual {
            tag: "W-8b".into(),
            variant: None,
            outcome: Ok(Measure { abs, scale: 1.0, rel: abs }),
            branch: false,
        };
        let per = vec![vec![mk(1e-12)], vec![mk(1e-3)], vec![mk(1e-11)]];
        let out = aggregate(&per, &Tolerance::default());
        assert_eq!(out.len(), 1);
        let e = &out[0].0;
        assert_eq!(e.argmax_point, Some(1));
        assert!(!e.pass);
        assert_eq!(e.max_abs, 1e-3);
    }
}
