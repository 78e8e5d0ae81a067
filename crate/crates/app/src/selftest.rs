//! The fixed invariant suite behind `hwl selftest`: identities and
//! dominations at depths up to 4 on seeded random weights, plus short
//! certificate runs. The report holds no timings, so reruns are
//! byte-identical.

use hwl_core::bellman::{CertificateId, SamplerConfig};
use hwl_core::conditions::{self, ConditionId, ConditionReport};
use hwl_core::dyadic::{
    alpha_coefficients, disbalanced_haar, haar_coefficients, DyadicModel, LeafFunction, Weight,
};
use hwl_core::norms;
use hwl_core::operators::{direct_bilinear, four_sum_decomposition, SearchMode, SignPattern};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bundle::CertificateDto;
use crate::real::Real;
use crate::scenario::run_certificate_parallel;

pub const SEED: u64 = 20_240_601;
const PAIRS_PER_DEPTH: usize = 4;
const CERT_SAMPLES: usize = 10_000;
/// Relative tolerance of the exact identities.
const IDENTITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    /// Largest relative error for identities, largest normalized excess
    /// for inequalities; the check passes when it is at most `tolerance`.
    pub worst: Real,
    pub tolerance: Real,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelftestReport {
    pub schema: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub certificates: Vec<CertificateDto>,
    pub passed: bool,
}

impl SelftestReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

struct Check {
    name: &'static str,
    cases: usize,
    worst: f64,
    tolerance: f64,
}

impl Check {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Check {
            name,
            cases: 0,
            worst: 0.0,
            tolerance,
        }
    }

    fn identity(&mut self, a: f64, b: f64) {
        self.record((a - b).abs() / (1.0 + a.abs().max(b.abs())));
    }

    /// Records the excess of `a` over `b`, relative to `b`.
    fn at_most(&mut self, a: f64, b: f64) {
        self.record(((a - b) / (1.0 + b.abs())).max(0.0));
    }

    fn record(&mut self, e: f64) {
        self.cases += 1;
        // NaN must fail, so it replaces the running maximum
        if e.is_nan() || e > self.worst {
            self.worst = e;
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name.into(),
            cases: self.cases,
            worst: Real(self.worst),
            tolerance: Real(self.tolerance),
            passed: self.worst <= self.tolerance,
        }
    }
}

fn weight(rng: &mut ChaCha8Rng, model: DyadicModel) -> hwl_core::Result<Weight> {
    Weight::from_values(
        model,
        (0..model.leaf_count())
            .map(|_| rng.random_range(-2.0f64..2.0).exp())
            .collect(),
    )
}

fn function(rng: &mut ChaCha8Rng, model: DyadicModel) -> hwl_core::Result<LeafFunction> {
    LeafFunction::new(
        model,
        (0..model.leaf_count())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect(),
    )
}

fn per(r: &ConditionReport) -> &hwl_core::dyadic::IntervalMap<f64> {
    r.per_interval.as_ref().expect("maps are kept")
}

pub fn invariant_checks() -> hwl_core::Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut parseval = Check::new("parseval", IDENTITY_TOL);
    let mut haar_w = Check::new("disbalanced_haar", IDENTITY_TOL);
    let mut four_sum = Check::new("four_sum_identity", IDENTITY_TOL);
    let mut sign_avg = Check::new("sign_average_identity", IDENTITY_TOL);
    let mut rank_one = Check::new("rank_one_norm", IDENTITY_TOL);
    let mut tsigma = Check::new("tsigma_testing_below_norm", IDENTITY_TOL);
    let mut t0 = Check::new("t0_testing_below_norm", IDENTITY_TOL);
    let mut square = Check::new("square_testing_matches_cond_12", IDENTITY_TOL);
    let mut square_norm = Check::new("square_testing_below_norm", IDENTITY_TOL);
    let mut embed_low = Check::new("embedding_testing_below_norm", IDENTITY_TOL);
    let mut embed_high = Check::new("embedding_norm_below_16_testing", IDENTITY_TOL);
    let mut chain = Check::new("sup_sign_norm_below_chain_bound", IDENTITY_TOL);
    for depth in 1..=4 {
        let model = DyadicModel::new(depth)?;
        for _ in 0..PAIRS_PER_DEPTH {
            let (v, w) = (weight(&mut rng, model)?, weight(&mut rng, model)?);
            let (f, g) = (function(&mut rng, model)?, function(&mut rng, model)?);
            let sigma = SignPattern::from_bits(model, rng.random());

            let c = haar_coefficients(&f);
            parseval.identity(
                c.values().iter().map(|c| c * c).sum::<f64>() + f.integral().powi(2),
                f.norm_sq(),
            );
            for i in model.internal() {
                let h = disbalanced_haar(&w, i)?.to_leaf_function(model);
                haar_w.identity(h.inner(w.base())? / w.average(i), 0.0);
                haar_w.identity(h.weighted_norm_sq(&w)?, 1.0);
                let m = norms::assemble(&norms::OperatorSpec::HaarProjection(i), &v, &w)?;
                rank_one.identity(
                    norms::spectral_norm(&m)?,
                    (v.average(i) * w.average(i)).sqrt(),
                );
            }
            let parts = four_sum_decomposition(&f, &g, &sigma, &v, &w)?;
            four_sum.identity(parts.total, direct_bilinear(&f, &g, &sigma, &v, &w)?);
            let (lhs, rhs) = norms::sign_average_identity(&g, &v)?;
            sign_avg.identity(lhs, rhs);

            let sup = norms::sup_sign_norm(&v, &w, SearchMode::Exhaustive)?.lower_bound;
            let adj = norms::sup_sign_norm(&w, &v, SearchMode::Exhaustive)?.lower_bound;
            let (a, b) = conditions::sawyer_tsigma_test(&v, &w, SearchMode::Exhaustive)?;
            tsigma.at_most(a.report.constant, sup * sup);
            tsigma.at_most(b.report.constant, adj * adj);
            let t0n = norms::t0_norm(&v, &w)?;
            let (a, b) = conditions::sawyer_t0_test(&v, &w)?;
            t0.at_most(a.constant, t0n * t0n);
            t0.at_most(b.constant, t0n * t0n);

            let c12 = conditions::cond_12(&v, &w)?;
            let st = norms::square_function_testing(&v, &w)?;
            for j in model.internal() {
                square.identity(st[j], per(&c12)[j]);
            }
            let sn = norms::square_function_norm(&v, &w)?;
            let st = ConditionReport::from_map(ConditionId::SquareTesting, st);
            square_norm.at_most(st.constant, sn * sn);

            let alpha = alpha_coefficients(&v, &w)?;
            let e = norms::embedding_norm_sq(&w, &alpha)?;
            let t = conditions::embedding_testing(&w, &alpha)?.constant;
            embed_low.at_most(t, e);
            embed_high.at_most(e, 16.0 * t);
            chain.at_most(sup, norms::four_sum_chain_bound(&v, &w)?.bound);
        }
    }
    Ok([
        parseval,
        haar_w,
        four_sum,
        sign_avg,
        rank_one,
        tsigma,
        t0,
        square,
        square_norm,
        embed_low,
        embed_high,
        chain,
    ]
    .into_iter()
    .map(Check::finish)
    .collect())
}

fn certificates() -> Vec<CertificateId> {
    let mut ids: Vec<CertificateId> = [0.1, 0.25, 0.4, 0.49]
        .into_iter()
        .map(|alpha| CertificateId::AlphaSmall { alpha })
        .collect();
    ids.extend(
        [0.6, 0.75, 1.0]
            .into_iter()
            .map(|alpha| CertificateId::AlphaLarge { alpha }),
    );
    ids.push(CertificateId::Embedding {
        c_dom: 1.0,
        c_fun: hwl_core::bellman::embedding_fun_constant(1.0),
    });
    ids.push(CertificateId::Seven {
        c_dom: 1.0,
        c_reg: hwl_core::bellman::DEFAULT_REGIME,
    });
    ids.push(CertificateId::Nine { c_dom: 1.0 });
    ids
}

pub fn run_selftest() -> hwl_core::Result<SelftestReport> {
    let checks = invariant_checks()?;
    let cfg = SamplerConfig {
        samples: CERT_SAMPLES,
        seed: SEED,
        shards: 4,
    };
    let certificates = certificates()
        .into_iter()
        .map(|id| run_certificate_parallel(id, &cfg).map(|r| CertificateDto::from(&r)))
        .collect::<hwl_core::Result<Vec<_>>>()?;
    let passed = checks.iter().all(|c| c.passed)
        && certificates.iter().all(|c| c.margins_ok && c.tolerances_ok);
    Ok(SelftestReport {
        schema: "hwl-selftest/1".into(),
        seed: SEED,
        checks,
        certificates,
        passed,
    })
}
