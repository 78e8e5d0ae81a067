//! Runs the analyses of a scenario and assembles the bundle.
//!
//! Analyses are independent, so they run concurrently; results are
//! collected in execution order, so the bundle does not depend on
//! scheduling. Per-analysis errors become skip records.

use std::collections::BTreeMap;
use std::time::Instant;

use hwl_core::bellman::{
    embedding_fun_constant, merge, run_certificate_shard, CertificateId, CertificateReport,
    SamplerConfig, DEFAULT_REGIME,
};
use hwl_core::conditions::{self, ConditionId, ConditionReport};
use hwl_core::dyadic::{alpha_coefficients, DyadicModel, Weight};
use hwl_core::norms;
use hwl_core::operators::SearchMode;
use rayon::prelude::*;

use crate::bundle::{
    AnalysisBundle, AnalysisRecord, AnalysisResult, ChainDto, Metadata, SigmaKDto, SignSearchDto,
    TestingDto, SCHEMA,
};
use crate::config::{
    normalize_analyses, AnalysisId, ConfigError, ModeConfig, ScenarioConfig, SignSearch,
};
use crate::real::Real;
use crate::weights::{generate_weights, WeightSpec};

type CoreResult<T> = hwl_core::Result<T>;

impl ModeConfig {
    /// The sign-search mode; seeds are checked by config validation.
    pub fn search_mode(&self) -> SearchMode {
        let seed = self.sign_seed.unwrap_or(0);
        match self.sign_search {
            SignSearch::Exhaustive => SearchMode::Exhaustive,
            SignSearch::Sampled => SearchMode::Sampled {
                n: self.sign_samples,
                seed,
            },
            SignSearch::Greedy => SearchMode::Greedy {
                restarts: self.greedy_restarts,
                seed,
            },
        }
    }

    fn sampler(&self) -> SamplerConfig {
        SamplerConfig {
            samples: self.certificate_samples,
            seed: self.certificate_seed.unwrap_or(0),
            shards: self.shards,
        }
    }

    /// The certificates behind one certificate analysis.
    pub fn certificates(&self, id: AnalysisId) -> Vec<CertificateId> {
        match id {
            AnalysisId::CertAlphaSmall => self
                .alphas_small
                .iter()
                .map(|&alpha| CertificateId::AlphaSmall { alpha })
                .collect(),
            AnalysisId::CertAlphaLarge => self
                .alphas_large
                .iter()
                .map(|&alpha| CertificateId::AlphaLarge { alpha })
                .collect(),
            AnalysisId::CertEmbedding => vec![CertificateId::Embedding {
                c_dom: self.c_dom,
                c_fun: embedding_fun_constant(self.c_dom),
            }],
            AnalysisId::CertSeven => {
                vec![CertificateId::Seven {
                    c_dom: self.c_dom,
                    c_reg: DEFAULT_REGIME,
                }]
            }
            AnalysisId::CertNine => vec![CertificateId::Nine { c_dom: self.c_dom }],
            _ => Vec::new(),
        }
    }
}

/// Runs every shard concurrently and merges them; equal to the sequential
/// run because shard seeds are fixed and the merge is order-independent of
/// scheduling.
pub fn run_certificate_parallel(
    id: CertificateId,
    cfg: &SamplerConfig,
) -> CoreResult<CertificateReport> {
    let shards = (0..cfg.shards)
        .into_par_iter()
        .map(|s| run_certificate_shard(id, cfg, s))
        .collect::<CoreResult<Vec<_>>>()?;
    merge(shards)
}

fn condition(r: &ConditionReport) -> AnalysisResult {
    AnalysisResult::Condition(r.into())
}

fn pair(a: &ConditionReport, b: &ConditionReport) -> AnalysisResult {
    AnalysisResult::ConditionPair {
        first: a.into(),
        second: b.into(),
    }
}

/// One analysis on a fixed weight pair.
pub fn run_analysis(
    v: &Weight,
    w: &Weight,
    id: AnalysisId,
    mode: &ModeConfig,
) -> CoreResult<AnalysisResult> {
    use AnalysisId::*;
    Ok(match id {
        JointA2 => condition(&conditions::joint_a2(v, w)?),
        Cond12 => condition(&conditions::cond_12(v, w)?),
        Cond13 => condition(&conditions::cond_13(v, w)?),
        SawyerTsigma => {
            let (a, b) = conditions::sawyer_tsigma_test(v, w, mode.search_mode())?;
            AnalysisResult::Testing {
                first: TestingDto::from(&a),
                second: TestingDto::from(&b),
            }
        }
        SawyerT0 => {
            let (a, b) = conditions::sawyer_t0_test(v, w)?;
            pair(&a, &b)
        }
        SigmaK => AnalysisResult::SigmaK(SigmaKDto::from(&conditions::sigma_k_families(
            v, w, mode.q,
        )?)),
        Lemma33 => condition(&conditions::lemma33_constant(v, w, mode.lemma33_exponent)?),
        Bump => condition(&conditions::bump_condition(v, w, mode.bump_eta)?),
        Fkp => pair(
            &conditions::fkp_condition(v)?,
            &conditions::fkp_condition(w)?,
        ),
        Doubling => pair(
            &conditions::doubling_constant(v)?,
            &conditions::doubling_constant(w)?,
        ),
        EmbeddingTesting => {
            let alpha = alpha_coefficients(v, w)?;
            condition(&conditions::embedding_testing(w, &alpha)?)
        }
        SquareTesting => {
            let map = norms::square_function_testing(v, w)?;
            condition(&ConditionReport::from_map(ConditionId::SquareTesting, map))
        }
        SupSignNorm => AnalysisResult::SignSearch(SignSearchDto::from(&norms::sup_sign_norm(
            v,
            w,
            mode.search_mode(),
        )?)),
        T0Norm => AnalysisResult::Norm {
            value: Real(norms::t0_norm(v, w)?),
        },
        SquareNorm => AnalysisResult::Norm {
            value: Real(norms::square_function_norm(v, w)?),
        },
        EmbeddingNorm => {
            let alpha = alpha_coefficients(v, w)?;
            let norm_sq = norms::embedding_norm_sq(w, &alpha)?;
            let testing = conditions::embedding_testing(w, &alpha)?.constant;
            let ratio = if testing > 0.0 {
                norm_sq / testing
            } else {
                0.0
            };
            AnalysisResult::Embedding {
                norm_sq: Real(norm_sq),
                testing: Real(testing),
                ratio: Real(ratio),
            }
        }
        ChainBound => AnalysisResult::Chain(ChainDto::from(&norms::four_sum_chain_bound(v, w)?)),
        CertAlphaSmall | CertAlphaLarge | CertEmbedding | CertSeven | CertNine => {
            let cfg = mode.sampler();
            let reports = mode
                .certificates(id)
                .into_iter()
                .map(|c| run_certificate_parallel(c, &cfg).map(|r| (&r).into()))
                .collect::<CoreResult<Vec<_>>>()?;
            AnalysisResult::Certificates { reports }
        }
        All => {
            return Err(hwl_core::Error::Domain(
                "`all` must be expanded before running",
            ))
        }
    })
}

/// Runs `ids` (normalized first) and returns one record per analysis.
pub fn run_analyses(
    v: &Weight,
    w: &Weight,
    ids: &[AnalysisId],
    mode: &ModeConfig,
) -> Vec<AnalysisRecord> {
    normalize_analyses(ids)
        .into_par_iter()
        .map(|id| match run_analysis(v, w, id, mode) {
            Ok(r) => AnalysisRecord::ok(id, r),
            Err(e) => AnalysisRecord::skipped(id, &e),
        })
        .collect()
}

fn spec_seeds(prefix: &str, spec: &WeightSpec, out: &mut BTreeMap<String, u64>) {
    match spec {
        WeightSpec::Lognormal { seed, .. } => {
            out.insert(prefix.into(), *seed);
        }
        WeightSpec::ReciprocalOf { other, seed, .. } => {
            out.insert(prefix.into(), *seed);
            spec_seeds(&format!("{prefix}.other"), other, out);
        }
        _ => {}
    }
}

pub fn metadata(cfg: &ScenarioConfig) -> Metadata {
    let mut seeds = BTreeMap::new();
    spec_seeds("weight_spec_v", &cfg.weight_spec_v, &mut seeds);
    spec_seeds("weight_spec_w", &cfg.weight_spec_w, &mut seeds);
    if let Some(s) = cfg.mode.sign_seed {
        seeds.insert("sign_seed".into(), s);
    }
    if let Some(s) = cfg.mode.certificate_seed {
        seeds.insert("certificate_seed".into(), s);
    }
    let versions = BTreeMap::from([
        ("hwl".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("hwl-core".to_string(), hwl_core::VERSION.to_string()),
    ]);
    Metadata {
        depth: cfg.depth,
        seeds,
        versions,
        wall_time_ms: None,
    }
}

/// Generates the weights, runs the analyses and assembles the bundle.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<AnalysisBundle, ConfigError> {
    cfg.validate()?;
    let start = Instant::now();
    let model = DyadicModel::new(cfg.depth).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let v = generate_weights(&cfg.weight_spec_v, model)
        .map_err(|e| ConfigError::Invalid(format!("weight_spec_v: {e}")))?;
    let w = generate_weights(&cfg.weight_spec_w, model)
        .map_err(|e| ConfigError::Invalid(format!("weight_spec_w: {e}")))?;
    let analyses = run_analyses(&v, &w, &cfg.analyses, &cfg.mode);
    let mut metadata = metadata(cfg);
    if cfg.output.timing {
        metadata.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    }
    Ok(AnalysisBundle {
        schema: SCHEMA.into(),
        metadata,
        analyses,
    })
}

/// The constant of a condition-type result, first member for pairs.
pub fn headline_constant(r: &AnalysisResult) -> Option<f64> {
    match r {
        AnalysisResult::Condition(c) => Some(c.constant.0),
        AnalysisResult::ConditionPair { first, .. } => Some(first.constant.0),
        AnalysisResult::Testing { first, .. } => Some(first.report.constant.0),
        AnalysisResult::SigmaK(s) => Some(s.aggregate.constant.0),
        AnalysisResult::SignSearch(s) => Some(s.lower_bound.0),
        AnalysisResult::Norm { value } => Some(value.0),
        AnalysisResult::Embedding { norm_sq, .. } => Some(norm_sq.0),
        AnalysisResult::Chain(c) => Some(c.bound.0),
        AnalysisResult::Certificates { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{SkipKind, Status};

    fn cfg(depth: u32, v: WeightSpec, w: WeightSpec, analyses: Vec<AnalysisId>) -> ScenarioConfig {
        ScenarioConfig {
            depth,
            weight_spec_v: v,
            weight_spec_w: w,
            analyses,
            mode: ModeConfig {
                certificate_seed: Some(1),
                certificate_samples: 2000,
                ..Default::default()
            },
            output: Default::default(),
        }
    }

    fn constant(r: &AnalysisBundle, id: AnalysisId) -> f64 {
        headline_constant(r.record(id).unwrap().result.as_ref().unwrap()).unwrap()
    }

    #[test]
    fn constant_weights_give_trivial_constants() {
        let one = WeightSpec::Constant { value: 1.0 };
        let b = run_scenario(&cfg(3, one.clone(), one, vec![AnalysisId::All])).unwrap();
        assert_eq!(b.analyses.len(), AnalysisId::EVERY.len());
        assert!((constant(&b, AnalysisId::JointA2) - 1.0).abs() < 1e-12);
        assert_eq!(constant(&b, AnalysisId::Cond12), 0.0);
        assert!((constant(&b, AnalysisId::SupSignNorm) - 1.0).abs() < 1e-9);
        assert_eq!(constant(&b, AnalysisId::T0Norm), 0.0);
        assert!(b.failed_certificates().is_empty());
    }

    #[test]
    fn depth_one_pair() {
        let w = WeightSpec::Explicit {
            values: vec![1.0, 3.0],
        };
        let v = WeightSpec::Explicit {
            values: vec![2.0, 1.0],
        };
        let b = run_scenario(&cfg(1, v, w, vec![AnalysisId::JointA2, AnalysisId::Cond12])).unwrap();
        assert!((constant(&b, AnalysisId::JointA2) - 3.0).abs() < 1e-12);
        assert!((constant(&b, AnalysisId::Cond12) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_search_at_depth_six_is_a_capacity_skip() {
        let spec = WeightSpec::Lognormal {
            sigma: 0.5,
            seed: 3,
        };
        let ids = vec![
            AnalysisId::SupSignNorm,
            AnalysisId::JointA2,
            AnalysisId::T0Norm,
        ];
        let b = run_scenario(&cfg(6, spec.clone(), spec, ids)).unwrap();
        let rec = b.record(AnalysisId::SupSignNorm).unwrap();
        assert_eq!(rec.status, Status::Skipped);
        assert_eq!(rec.skip.as_ref().unwrap().kind, SkipKind::Capacity);
        assert!(b.has_capacity_skips());
        assert_eq!(b.record(AnalysisId::JointA2).unwrap().status, Status::Ok);
        assert_eq!(b.record(AnalysisId::T0Norm).unwrap().status, Status::Ok);
    }

    #[test]
    fn reruns_are_identical_and_round_trip() {
        let v = WeightSpec::Lognormal {
            sigma: 1.0,
            seed: 5,
        };
        let w = WeightSpec::ReciprocalOf {
            other: Box::new(v.clone()),
            jitter: 0.3,
            seed: 6,
        };
        let c = cfg(3, v, w, vec![AnalysisId::All]);
        let (a, b) = (run_scenario(&c).unwrap(), run_scenario(&c).unwrap());
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(AnalysisBundle::from_json(&a.to_json()).unwrap(), a);
        assert_eq!(a.metadata.seeds["weight_spec_w.other"], 5);
    }

    #[test]
    fn parallel_shards_match_sequential() {
        let id = CertificateId::AlphaSmall { alpha: 0.25 };
        let cfg = SamplerConfig {
            samples: 3000,
            seed: 2,
            shards: 4,
        };
        let par = run_certificate_parallel(id, &cfg).unwrap();
        let seq = hwl_core::bellman::run_certificate(id, &cfg).unwrap();
        assert_eq!(par, seq);
    }
}
