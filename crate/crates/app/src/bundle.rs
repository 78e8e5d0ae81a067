//! The serialized report: one versioned document with one record per
//! requested analysis. Floats are [`Real`]s, so loading a written bundle
//! gives back an equal bundle.

use std::collections::BTreeMap;

use hwl_core::bellman::{BellmanPoint, CertificateReport};
use hwl_core::conditions::{ConditionReport, EvalMode, SigmaKReport, TestingReport};
use hwl_core::dyadic::{DyadicIndex, IntervalMap};
use hwl_core::norms::{ChainBound, SignSearchResult};
use hwl_core::operators::SearchMode;
use serde::{Deserialize, Serialize};

use crate::config::AnalysisId;
use crate::real::Real;

pub const SCHEMA: &str = "hwl-bundle/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisBundle {
    pub schema: String,
    pub metadata: Metadata,
    pub analyses: Vec<AnalysisRecord>,
}

impl AnalysisBundle {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes") + "\n"
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn record(&self, id: AnalysisId) -> Option<&AnalysisRecord> {
        self.analyses.iter().find(|r| r.id == id)
    }

    /// Certificate reports whose margins fall below the tolerance.
    pub fn failed_certificates(&self) -> Vec<&CertificateDto> {
        self.analyses
            .iter()
            .filter_map(|r| match &r.result {
                Some(AnalysisResult::Certificates { reports }) => Some(reports),
                _ => None,
            })
            .flatten()
            .filter(|c| !c.margins_ok)
            .collect()
    }

    pub fn has_capacity_skips(&self) -> bool {
        self.analyses
            .iter()
            .any(|r| matches!(&r.skip, Some(s) if s.kind == SkipKind::Capacity))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub depth: u32,
    pub seeds: BTreeMap<String, u64>,
    pub versions: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Skipped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipKind {
    /// The analysis exceeds a size cap at this depth.
    Capacity,
    /// Any other error, captured instead of aborting the run.
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Skip {
    pub kind: SkipKind,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisRecord {
    pub id: AnalysisId,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<AnalysisResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skip: Option<Skip>,
}

impl AnalysisRecord {
    pub fn ok(id: AnalysisId, result: AnalysisResult) -> Self {
        AnalysisRecord {
            id,
            status: Status::Ok,
            result: Some(result),
            skip: None,
        }
    }

    pub fn skipped(id: AnalysisId, error: &hwl_core::Error) -> Self {
        let kind = match error {
            hwl_core::Error::Capacity { .. } => SkipKind::Capacity,
            _ => SkipKind::Error,
        };
        AnalysisRecord {
            id,
            status: Status::Skipped,
            result: None,
            skip: Some(Skip {
                kind,
                reason: error.to_string(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AnalysisResult {
    Condition(ConditionDto),
    /// The same condition for `v` and for `w`, or a condition and its
    /// `(v, w)`-swapped twin.
    ConditionPair {
        first: ConditionDto,
        second: ConditionDto,
    },
    Testing {
        first: TestingDto,
        second: TestingDto,
    },
    SigmaK(SigmaKDto),
    SignSearch(SignSearchDto),
    Norm {
        value: Real,
    },
    Embedding {
        norm_sq: Real,
        testing: Real,
        ratio: Real,
    },
    Chain(ChainDto),
    Certificates {
        reports: Vec<CertificateDto>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexDto {
    pub level: u32,
    pub pos: u64,
}

impl From<DyadicIndex> for IndexDto {
    fn from(i: DyadicIndex) -> Self {
        IndexDto {
            level: i.level(),
            pos: i.pos(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalValue {
    pub level: u32,
    pub pos: u64,
    pub value: Real,
}

fn flatten(map: &IntervalMap<f64>) -> Vec<IntervalValue> {
    map.iter()
        .map(|(i, v)| IntervalValue {
            level: i.level(),
            pos: i.pos(),
            value: Real(*v),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionDto {
    pub name: String,
    pub constant: Real,
    pub witness: IndexDto,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_interval: Vec<IntervalValue>,
}

impl From<&ConditionReport> for ConditionDto {
    fn from(r: &ConditionReport) -> Self {
        ConditionDto {
            name: r.name.to_string(),
            constant: Real(r.constant),
            witness: r.witness.into(),
            per_interval: r.per_interval.as_ref().map(flatten).unwrap_or_default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestingDto {
    pub report: ConditionDto,
    /// Evaluation mode per internal interval, heap order.
    pub modes: Vec<String>,
    pub evaluations: u64,
}

fn mode_name(m: EvalMode) -> String {
    match m {
        EvalMode::Exhaustive => "exhaustive",
        EvalMode::Sampled => "sampled",
        EvalMode::Greedy => "greedy",
    }
    .into()
}

impl From<&TestingReport> for TestingDto {
    fn from(t: &TestingReport) -> Self {
        TestingDto {
            report: (&t.report).into(),
            modes: t.modes.values().iter().map(|m| mode_name(*m)).collect(),
            evaluations: t.evaluations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaKDto {
    pub q: Real,
    /// The joint `A₂` constant divided out by the normalization.
    pub scale: Real,
    /// Family index per internal interval, heap order.
    pub family: Vec<u32>,
    pub per_k: Vec<ConditionDto>,
    pub aggregate: ConditionDto,
}

impl From<&SigmaKReport> for SigmaKDto {
    fn from(r: &SigmaKReport) -> Self {
        SigmaKDto {
            q: Real(r.families.q),
            scale: Real(r.families.scale),
            family: r.families.family.values().to_vec(),
            per_k: r.per_k.iter().map(Into::into).collect(),
            aggregate: (&r.aggregate).into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignSearchDto {
    pub lower_bound: Real,
    pub upper_bound: Option<Real>,
    /// `±1` per internal interval, heap order.
    pub best_sigma: Vec<i8>,
    pub mode: String,
    pub evaluations: u64,
    pub seed: Option<u64>,
}

impl From<&SignSearchResult> for SignSearchDto {
    fn from(r: &SignSearchResult) -> Self {
        let mode = match r.mode {
            SearchMode::Exhaustive => "exhaustive",
            SearchMode::Sampled { .. } => "sampled",
            SearchMode::Greedy { .. } => "greedy",
        };
        SignSearchDto {
            lower_bound: Real(r.lower_bound),
            upper_bound: r.upper_bound.map(Real),
            best_sigma: r.best_sigma.signs().to_vec(),
            mode: mode.into(),
            evaluations: r.evaluations,
            seed: r.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainDto {
    pub a2: Real,
    pub cond12: Real,
    pub cond13: Real,
    pub t0_norm: Real,
    pub bound: Real,
}

impl From<&ChainBound> for ChainDto {
    fn from(c: &ChainBound) -> Self {
        ChainDto {
            a2: Real(c.a2),
            cond12: Real(c.cond12),
            cond13: Real(c.cond13),
            t0_norm: Real(c.t0_norm),
            bound: Real(c.bound),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedReal {
    pub name: String,
    pub value: Real,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckDto {
    pub name: String,
    pub evaluations: usize,
    pub worst_margin: Real,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceDto {
    pub name: String,
    pub evaluations: usize,
    pub max_error: Real,
    pub tolerance: Real,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureDto {
    pub check: String,
    pub point: Vec<NamedReal>,
    pub margin: Real,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDto {
    pub certificate: String,
    pub params: Vec<NamedReal>,
    pub seed: u64,
    pub samples: usize,
    pub worst_margin: Real,
    pub best_constant_estimate: Real,
    pub required_constant: Real,
    pub margins_ok: bool,
    pub tolerances_ok: bool,
    pub checks: Vec<CheckDto>,
    pub tolerances: Vec<ToleranceDto>,
    pub constants: Vec<NamedReal>,
    pub failures: Vec<FailureDto>,
}

fn named(name: &str, value: f64) -> NamedReal {
    NamedReal {
        name: name.into(),
        value: Real(value),
    }
}

fn point(p: &BellmanPoint) -> Vec<NamedReal> {
    BellmanPoint::NAMES
        .iter()
        .zip(p.to_array())
        .map(|(n, v)| named(n, v))
        .collect()
}

impl From<&CertificateReport> for CertificateDto {
    fn from(r: &CertificateReport) -> Self {
        CertificateDto {
            certificate: r.id.name().into(),
            params: r
                .id
                .params()
                .iter()
                .map(|p| named(p.name, p.value))
                .collect(),
            seed: r.seed,
            samples: r.samples,
            worst_margin: Real(r.worst_margin),
            best_constant_estimate: Real(r.best_constant_estimate),
            required_constant: Real(r.required_constant),
            margins_ok: r.margins_ok(),
            tolerances_ok: r.tolerances_ok(),
            checks: r
                .checks
                .iter()
                .map(|c| CheckDto {
                    name: c.name.into(),
                    evaluations: c.evaluations,
                    worst_margin: Real(c.worst_margin),
                })
                .collect(),
            tolerances: r
                .tolerances
                .iter()
                .map(|t| ToleranceDto {
                    name: t.name.into(),
                    evaluations: t.evaluations,
                    max_error: Real(t.max_error),
                    tolerance: Real(t.tolerance),
                })
                .collect(),
            constants: r.constants.iter().map(|c| named(c.name, c.value)).collect(),
            failures: r
                .failures
                .iter()
                .map(|f| FailureDto {
                    check: f.check.into(),
                    point: point(&f.point),
                    margin: Real(f.margin),
                })
                .collect(),
        }
    }
}
