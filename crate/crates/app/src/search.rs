//! Random and mutation search for weight pairs on which one condition is
//! much larger than another.
//!
//! The first quarter of the budget draws independent lognormal pairs; the
//! rest mutates members of an elite pool. Specimens are generated in
//! batches on a single seeded stream and evaluated concurrently, so the
//! result depends only on the seed.

use std::cmp::Ordering;

use hwl_core::conditions::{self, ConditionReport};
use hwl_core::dyadic::{alpha_coefficients, DyadicModel, Weight};
use hwl_core::norms::square_function_testing;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{AnalysisRecord, AnalysisResult, ConditionDto};
use crate::config::AnalysisId;
use crate::real::Real;

/// Conditions the search can compare; each is a single best constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SearchTarget {
    #[value(name = "joint_a2")]
    JointA2,
    #[value(name = "cond_12")]
    #[serde(rename = "cond_12")]
    Cond12,
    #[value(name = "cond_13")]
    #[serde(rename = "cond_13")]
    Cond13,
    #[value(name = "sawyer_t0_first")]
    SawyerT0First,
    #[value(name = "sawyer_t0_second")]
    SawyerT0Second,
    #[value(name = "embedding_testing")]
    EmbeddingTesting,
    #[value(name = "square_testing")]
    SquareTesting,
}

impl SearchTarget {
    pub fn evaluate(self, v: &Weight, w: &Weight) -> hwl_core::Result<ConditionReport> {
        use SearchTarget::*;
        match self {
            JointA2 => conditions::joint_a2(v, w),
            Cond12 => conditions::cond_12(v, w),
            Cond13 => conditions::cond_13(v, w),
            SawyerT0First => Ok(conditions::sawyer_t0_test(v, w)?.0),
            SawyerT0Second => Ok(conditions::sawyer_t0_test(v, w)?.1),
            EmbeddingTesting => conditions::embedding_testing(w, &alpha_coefficients(v, w)?),
            SquareTesting => Ok(ConditionReport::from_map(
                conditions::ConditionId::SquareTesting,
                square_function_testing(v, w)?,
            )),
        }
    }

    fn analysis(self) -> AnalysisId {
        use SearchTarget::*;
        match self {
            JointA2 => AnalysisId::JointA2,
            Cond12 => AnalysisId::Cond12,
            Cond13 => AnalysisId::Cond13,
            SawyerT0First | SawyerT0Second => AnalysisId::SawyerT0,
            EmbeddingTesting => AnalysisId::EmbeddingTesting,
            SquareTesting => AnalysisId::SquareTesting,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SearchParams {
    pub from: SearchTarget,
    pub to: SearchTarget,
    pub budget: u64,
    pub seed: u64,
    pub depth: u32,
    pub top: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Specimen {
    /// Position in generation order, a stable tie-breaker.
    pub index: u64,
    pub ratio: Real,
    pub v: Vec<Real>,
    pub w: Vec<Real>,
    /// Full reports of both conditions.
    pub analyses: Vec<AnalysisRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchReport {
    pub schema: String,
    pub from: SearchTarget,
    pub to: SearchTarget,
    pub depth: u32,
    pub seed: u64,
    pub budget: u64,
    pub evaluations: u64,
    /// The ratio on constant weights.
    pub baseline_ratio: Real,
    pub best: Vec<Specimen>,
}

impl SearchReport {
    pub fn best_ratio(&self) -> Option<f64> {
        self.best.first().map(|s| s.ratio.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// `to / from`, with `0/0 = 0`.
pub fn ratio(from: f64, to: f64) -> f64 {
    if to == 0.0 {
        0.0
    } else {
        to / from
    }
}

const BATCH: usize = 256;
const ELITE: usize = 16;
/// Leaf values stay in `[1/LEAF_CAP, LEAF_CAP]` so averages stay finite.
const LEAF_CAP: f64 = 1e8;

type Pair = (Vec<f64>, Vec<f64>);

fn clamp(x: f64) -> f64 {
    x.clamp(1.0 / LEAF_CAP, LEAF_CAP)
}

fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> Pair {
    let sigma = rng.random_range(0.1..3.0);
    let d = Normal::<f64>::new(0.0, sigma).expect("positive sigma");
    let mut draw = || {
        (0..n)
            .map(|_| clamp(d.sample(rng).exp()))
            .collect::<Vec<f64>>()
    };
    (draw(), draw())
}

/// One of: jitter every leaf, rescale a dyadic block of one weight, swap
/// the weights, or replace one weight by a jittered reciprocal of the other.
fn mutate(rng: &mut ChaCha8Rng, parent: &Pair, depth: u32) -> Pair {
    let (mut v, mut w) = parent.clone();
    let n = v.len();
    match rng.random_range(0..4) {
        0 => {
            let d = Normal::<f64>::new(0.0, rng.random_range(0.01..0.5)).expect("positive sigma");
            for x in v.iter_mut().chain(w.iter_mut()) {
                *x = clamp(*x * d.sample(rng).exp());
            }
        }
        1 => {
            let level = rng.random_range(0..=depth);
            let len = n >> level;
            let start = rng.random_range(0..1usize << level) * len;
            let factor = rng.random_range(-4.0f64..4.0).exp();
            let target = if rng.random_bool(0.5) { &mut v } else { &mut w };
            for x in &mut target[start..start + len] {
                *x = clamp(*x * factor);
            }
        }
        2 => std::mem::swap(&mut v, &mut w),
        _ => {
            let d = Normal::<f64>::new(0.0, 0.2).expect("positive sigma");
            if rng.random_bool(0.5) {
                w = v.iter().map(|x| clamp(d.sample(rng).exp() / x)).collect();
            } else {
                v = w.iter().map(|x| clamp(d.sample(rng).exp() / x)).collect();
            }
        }
    }
    (v, w)
}

struct Scored {
    index: u64,
    ratio: f64,
    pair: Pair,
}

/// Higher ratio first, then earlier index.
fn rank(a: &Scored, b: &Scored) -> Ordering {
    b.ratio.total_cmp(&a.ratio).then(a.index.cmp(&b.index))
}

fn weights(model: DyadicModel, pair: &Pair) -> hwl_core::Result<(Weight, Weight)> {
    Ok((
        Weight::from_values(model, pair.0.clone())?,
        Weight::from_values(model, pair.1.clone())?,
    ))
}

fn score(p: &SearchParams, model: DyadicModel, pair: &Pair) -> f64 {
    let eval = || -> hwl_core::Result<f64> {
        let (v, w) = weights(model, pair)?;
        Ok(ratio(
            p.from.evaluate(&v, &w)?.constant,
            p.to.evaluate(&v, &w)?.constant,
        ))
    };
    // a specimen that cannot be evaluated never ranks
    eval()
        .ok()
        .filter(|r| !r.is_nan())
        .unwrap_or(f64::NEG_INFINITY)
}

fn record(target: SearchTarget, v: &Weight, w: &Weight) -> AnalysisRecord {
    match target.evaluate(v, w) {
        Ok(r) => AnalysisRecord::ok(
            target.analysis(),
            AnalysisResult::Condition(ConditionDto::from(&r)),
        ),
        Err(e) => AnalysisRecord::skipped(target.analysis(), &e),
    }
}

pub fn search_separation(p: &SearchParams) -> hwl_core::Result<SearchReport> {
    let model = DyadicModel::new(p.depth)?;
    let n = model.leaf_count();
    let ones = (vec![1.0; n], vec![1.0; n]);
    let baseline = score(p, model, &ones).max(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let random_phase = p.budget.div_ceil(4);
    let mut elite: Vec<Scored> = Vec::new();
    let mut top: Vec<Scored> = Vec::new();
    let mut next = 0u64;
    while next < p.budget {
        let size = (p.budget - next).min(BATCH as u64);
        let batch: Vec<(u64, Pair)> = (next..next + size)
            .map(|index| {
                let pair = if index < random_phase || elite.is_empty() {
                    random_pair(&mut rng, n)
                } else {
                    let parent = &elite[rng.random_range(0..elite.len())].pair;
                    mutate(&mut rng, parent, p.depth)
                };
                (index, pair)
            })
            .collect();
        let scored: Vec<Scored> = batch
            .into_par_iter()
            .map(|(index, pair)| Scored {
                index,
                ratio: score(p, model, &pair),
                pair,
            })
            .collect();
        for s in scored.into_iter().filter(|s| s.ratio > f64::NEG_INFINITY) {
            elite.push(Scored {
                index: s.index,
                ratio: s.ratio,
                pair: s.pair.clone(),
            });
            top.push(s);
        }
        elite.sort_by(rank);
        elite.truncate(ELITE);
        top.sort_by(rank);
        top.truncate(p.top);
        next += size;
    }
    let best = top
        .into_iter()
        .map(|s| {
            let (v, w) = weights(model, &s.pair)?;
            Ok(Specimen {
                index: s.index,
                ratio: Real(s.ratio),
                analyses: vec![record(p.from, &v, &w), record(p.to, &v, &w)],
                v: s.pair.0.into_iter().map(Real).collect(),
                w: s.pair.1.into_iter().map(Real).collect(),
            })
        })
        .collect::<hwl_core::Result<Vec<_>>>()?;
    Ok(SearchReport {
        schema: "hwl-search/1".into(),
        from: p.from,
        to: p.to,
        depth: p.depth,
        seed: p.seed,
        budget: p.budget,
        evaluations: p.budget,
        baseline_ratio: Real(baseline),
        best,
    })
}
