//! Numeric certificates for the Bellman functions behind the sufficiency
//! proofs: closed-form Hessians against finite differences, concavity on the
//! domain, and midpoint-drop inequalities on sampled admissible triples.
//!
//! Every margin is floating-point evidence, not a proof. Margins are
//! normalized by the natural scale of the function at the sampled point, so a
//! single tolerance [`MARGIN_TOL`] applies to every check.

mod embedding;
mod nine;
mod power;
mod seven;

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::DenseMatrix;
use crate::rng::{coin, log_uniform, seeded, uniform};
use crate::{Error, Result, Rng64};

pub use embedding::{
    cert_embedding, cert_embedding_with, composition_error, embedding_fun_constant,
    embedding_hessian, embedding_value,
};
pub use nine::{
    cert_nine, cert_nine_with, grid_infimum, neg_d2p, nine_p, nine_p_hessian, nine_q, NINE_DOMAIN,
    NINE_P_CONSTANT,
};
pub use power::{
    alpha_large_hessian, alpha_large_value, alpha_small_value, c_alpha_grid, cert_alpha_large,
    cert_alpha_small, large_alpha_constant, lhs_46, power_hessian, small_alpha_constant,
};
pub use seven::{
    cert_seven, cert_seven_with, in_small_k_regime, p_k_derivative, regime_constant, seven_p,
    seven_q, stationarity_residual, sup_s_objective, sup_s_value, DEFAULT_REGIME,
};

/// Normalized margins below `-MARGIN_TOL` are failures.
pub const MARGIN_TOL: f64 = 1e-9;
/// Closed-form against finite-difference Hessians, relative.
pub const HESSIAN_TOL: f64 = 1e-5;
/// Chained finite-difference Hessian against the composition rule, relative.
pub const COMPOSITION_TOL: f64 = 1e-6;
/// Default relative step of [`fd_hessian`].
pub const DEFAULT_H_REL: f64 = 1e-4;
/// Failures kept per report (the worst ones).
pub const MAX_FAILURES: usize = 32;
/// Finite-difference Hessians are checked on every `HESSIAN_EVERY`-th sample.
pub const HESSIAN_EVERY: usize = 10;

/// A point of a Bellman domain. Certificates use the sub-tuple they need and
/// leave the rest at zero; the power functions use `x`, `y` only.
#[allow(non_snake_case)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BellmanPoint {
    pub X: f64,
    pub x: f64,
    pub w: f64,
    pub Y: f64,
    pub y: f64,
    pub v: f64,
    pub K: f64,
    pub M: f64,
    pub N: f64,
}

const DOMAIN_SLACK: f64 = 1e-12;

fn le(a: f64, b: f64) -> bool {
    a <= b + DOMAIN_SLACK * libm::fabs(b)
}

impl BellmanPoint {
    pub const NAMES: [&'static str; 9] = ["X", "x", "w", "Y", "y", "v", "K", "M", "N"];

    pub fn xy(x: f64, y: f64) -> Self {
        BellmanPoint {
            x,
            y,
            ..Default::default()
        }
    }

    pub fn to_array(&self) -> [f64; 9] {
        [
            self.X, self.x, self.w, self.Y, self.y, self.v, self.K, self.M, self.N,
        ]
    }

    #[allow(non_snake_case)]
    pub fn from_array(a: [f64; 9]) -> Self {
        let [X, x, w, Y, y, v, K, M, N] = a;
        BellmanPoint {
            X,
            x,
            w,
            Y,
            y,
            v,
            K,
            M,
            N,
        }
    }

    pub fn midpoint(a: &Self, b: &Self) -> Self {
        let (p, q) = (a.to_array(), b.to_array());
        Self::from_array(core::array::from_fn(|i| 0.5 * (p[i] + q[i])))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.to_array().iter().all(|c| c.is_finite() && *c >= 0.0)
    }

    /// `x, y ≥ 0`, `xy ≤ 1`.
    pub fn in_power_domain(&self) -> bool {
        self.x >= 0.0 && self.y >= 0.0 && le(self.x * self.y, 1.0)
    }

    /// `x² ≤ Xw`, `M ≤ C_dom·w`.
    pub fn in_embedding_domain(&self, c_dom: f64) -> bool {
        self.is_nonnegative() && le(self.x * self.x, self.X * self.w) && le(self.M, c_dom * self.w)
    }

    /// The embedding constraints for both halves plus `K ≤ C_dom·√(wv)`.
    pub fn in_seven_domain(&self, c_dom: f64) -> bool {
        self.in_embedding_domain(c_dom)
            && le(self.y * self.y, self.Y * self.v)
            && le(self.N, c_dom * self.v)
            && le(self.K, c_dom * libm::sqrt(self.w * self.v))
    }
}

/// `F(a) − (F(a₋) + F(a₊))/2`.
pub fn midpoint_drop<F: Fn(&BellmanPoint) -> f64>(
    f: F,
    a: &BellmanPoint,
    a_minus: &BellmanPoint,
    a_plus: &BellmanPoint,
) -> Result<f64> {
    if !(a.is_nonnegative() && a_minus.is_nonnegative() && a_plus.is_nonnegative()) {
        return Err(Error::Domain(
            "Bellman points must be finite and nonnegative",
        ));
    }
    let drop = f(a) - 0.5 * (f(a_minus) + f(a_plus));
    if drop.is_finite() {
        Ok(drop)
    } else {
        Err(Error::Domain("function not finite at the triple"))
    }
}

#[derive(Clone, Copy)]
enum Side {
    Central,
    Forward,
    Backward,
}

impl Side {
    /// First-difference stencil: (offset in steps, weight times h).
    fn first(self) -> [(f64, f64); 2] {
        match self {
            Side::Central => [(1.0, 0.5), (-1.0, -0.5)],
            Side::Forward => [(1.0, 1.0), (0.0, -1.0)],
            Side::Backward => [(0.0, 1.0), (-1.0, -1.0)],
        }
    }

    /// Second-difference stencil: (offset in steps, weight times h²).
    fn second(self) -> [(f64, f64); 3] {
        match self {
            Side::Central => [(1.0, 1.0), (0.0, -2.0), (-1.0, 1.0)],
            Side::Forward => [(2.0, 1.0), (1.0, -2.0), (0.0, 1.0)],
            Side::Backward => [(0.0, 1.0), (-1.0, -2.0), (-2.0, 1.0)],
        }
    }
}

/// Finite-difference Hessian of `f` at `p`.
///
/// `f` returns `None` outside its domain. Steps are `h_rel·|p_i|` (or `h_rel`
/// at zero coordinates). Central differences are used where both neighbours
/// are in the domain, one-sided ones otherwise; if a stencil point still
/// falls outside, every step is shrunk tenfold once before giving up with
/// [`Error::Stencil`].
pub fn fd_hessian<F: Fn(&[f64]) -> Option<f64>>(
    f: F,
    p: &[f64],
    h_rel: f64,
) -> Result<DenseMatrix> {
    if !(h_rel > 0.0 && h_rel.is_finite()) {
        return Err(Error::Domain("step must be positive"));
    }
    if !f(p).is_some_and(f64::is_finite) {
        return Err(Error::Domain("function undefined at the base point"));
    }
    for scale in [1.0, 0.1] {
        let h: Vec<f64> = p
            .iter()
            .map(|&c| {
                if c == 0.0 {
                    h_rel * scale
                } else {
                    h_rel * scale * libm::fabs(c)
                }
            })
            .collect();
        if let Some(m) = stencil(&f, p, &h) {
            return Ok(m);
        }
    }
    Err(Error::Stencil)
}

fn stencil<F: Fn(&[f64]) -> Option<f64>>(f: &F, p: &[f64], h: &[f64]) -> Option<DenseMatrix> {
    let k = p.len();
    let mut q = p.to_vec();
    let mut eval = |moves: &[(usize, f64)]| -> Option<f64> {
        q.copy_from_slice(p);
        for &(i, steps) in moves {
            q[i] += steps * h[i];
        }
        f(&q).filter(|v| v.is_finite())
    };
    let mut sides = Vec::with_capacity(k);
    for i in 0..k {
        let side = if eval(&[(i, 1.0)]).is_some() && eval(&[(i, -1.0)]).is_some() {
            Side::Central
        } else if eval(&[(i, 1.0)]).is_some() && eval(&[(i, 2.0)]).is_some() {
            Side::Forward
        } else if eval(&[(i, -1.0)]).is_some() && eval(&[(i, -2.0)]).is_some() {
            Side::Backward
        } else {
            return None;
        };
        sides.push(side);
    }
    let mut m = DenseMatrix::zeros(k, k);
    for i in 0..k {
        let mut d = 0.0;
        for (s, c) in sides[i].second() {
            d += c * eval(&[(i, s)])?;
        }
        m.set(i, i, d / (h[i] * h[i]));
        for j in 0..i {
            let mut d = 0.0;
            for (si, ci) in sides[i].first() {
                for (sj, cj) in sides[j].first() {
                    d += ci * cj * eval(&[(i, si), (j, sj)])?;
                }
            }
            let d = d / (h[i] * h[j]);
            m.set(i, j, d);
            m.set(j, i, d);
        }
    }
    Some(m)
}

/// Scale-free distance between two Hessians at `p`:
/// `‖D(A − B)D‖_max / (‖D B D‖_max + |f|)` with `D = diag(|p_i|)` (unit where
/// `p_i = 0`).
pub fn hessian_rel_error(a: &DenseMatrix, b: &DenseMatrix, p: &[f64], f_value: f64) -> f64 {
    let d: Vec<f64> = p
        .iter()
        .map(|&c| if c == 0.0 { 1.0 } else { libm::fabs(c) })
        .collect();
    let (mut diff, mut size) = (0.0f64, 0.0f64);
    for i in 0..b.rows() {
        for j in 0..b.cols() {
            let s = d[i] * d[j];
            diff = diff.max(libm::fabs(a.get(i, j) - b.get(i, j)) * s);
            size = size.max(libm::fabs(b.get(i, j)) * s);
        }
    }
    let denom = size + libm::fabs(f_value);
    if denom == 0.0 {
        diff
    } else {
        diff / denom
    }
}

/// Sample count, master seed and shard count of a certificate run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplerConfig {
    pub samples: usize,
    pub seed: u64,
    pub shards: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            samples: 100_000,
            seed: 0,
            shards: 8,
        }
    }
}

impl SamplerConfig {
    fn validate(&self) -> Result<()> {
        if self.shards == 0 {
            return Err(Error::Config {
                reason: "at least one shard",
                required: 1.0,
            });
        }
        Ok(())
    }

    /// Samples drawn by `shard`; the remainder goes to the first shards.
    pub fn shard_len(&self, shard: usize) -> usize {
        let (q, r) = (self.samples / self.shards, self.samples % self.shards);
        q + usize::from(shard < r)
    }
}

/// Which certificate, with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CertificateId {
    /// `B = (xy)^α`, `α ∈ (0, 1/2)`.
    AlphaSmall { alpha: f64 },
    /// `B = (xy)^{1/2} − ¼(xy)^α`, `α ∈ (1/2, 1]`.
    AlphaLarge { alpha: f64 },
    /// `B = C_fun(X − x²/(w+M))` on `M ≤ C_dom·w`.
    Embedding { c_dom: f64, c_fun: f64 },
    /// `B = Q + P` of the bilinear embedding, with regime constant `c_reg`.
    Seven { c_dom: f64, c_reg: f64 },
    /// `P = X − x²/w` and `Q = X − x²/(w+M)` of the square-function proof.
    Nine { c_dom: f64 },
}

impl CertificateId {
    pub fn name(&self) -> &'static str {
        match self {
            CertificateId::AlphaSmall { .. } => "alpha_small",
            CertificateId::AlphaLarge { .. } => "alpha_large",
            CertificateId::Embedding { .. } => "embedding",
            CertificateId::Seven { .. } => "seven",
            CertificateId::Nine { .. } => "nine",
        }
    }

    /// Parameters as named values, in a fixed order.
    pub fn params(&self) -> Vec<NamedValue> {
        let nv = NamedValue::new;
        match *self {
            CertificateId::AlphaSmall { alpha } | CertificateId::AlphaLarge { alpha } => {
                vec![nv("alpha", alpha)]
            }
            CertificateId::Embedding { c_dom, c_fun } => {
                vec![nv("c_dom", c_dom), nv("c_fun", c_fun)]
            }
            CertificateId::Seven { c_dom, c_reg } => vec![nv("c_dom", c_dom), nv("c_reg", c_reg)],
            CertificateId::Nine { c_dom } => vec![nv("c_dom", c_dom)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CertificateId::AlphaSmall { alpha } => {
                if !(alpha > 0.0 && alpha < 0.5) {
                    return Err(Error::Domain("alpha must lie in (0, 1/2)"));
                }
            }
            CertificateId::AlphaLarge { alpha } => {
                if !(alpha > 0.5 && alpha <= 1.0) {
                    return Err(Error::Domain("alpha must lie in (1/2, 1]"));
                }
            }
            CertificateId::Embedding { c_dom, c_fun } => {
                check_c_dom(c_dom)?;
                let need = embedding_fun_constant(c_dom);
                if !(c_fun >= need * (1.0 - DOMAIN_SLACK)) {
                    return Err(Error::Config {
                        reason: "C_fun too small for C_dom",
                        required: need,
                    });
                }
            }
            CertificateId::Seven { c_dom, c_reg } => {
                check_c_dom(c_dom)?;
                if !(c_reg > 0.0 && c_reg < 1.0) {
                    return Err(Error::Config {
                        reason: "regime constant must lie in (0, 1)",
                        required: 1.0,
                    });
                }
            }
            CertificateId::Nine { c_dom } => {
                if !(c_dom > 0.0 && c_dom.is_finite()) {
                    return Err(Error::Config {
                        reason: "C_dom must be positive",
                        required: 0.0,
                    });
                }
            }
        }
        Ok(())
    }
}

fn check_c_dom(c_dom: f64) -> Result<()> {
    if !(c_dom >= 1.0 && c_dom.is_finite()) {
        return Err(Error::Config {
            reason: "C_dom must be at least 1",
            required: 1.0,
        });
    }
    Ok(())
}

/// A named real (a constant or an estimate).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NamedValue {
    pub name: &'static str,
    pub value: f64,
}

impl NamedValue {
    pub fn new(name: &'static str, value: f64) -> Self {
        NamedValue { name, value }
    }
}

/// Worst normalized margin of one inequality over its evaluations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckSummary {
    pub name: &'static str,
    pub evaluations: usize,
    pub worst_margin: f64,
}

/// Largest error of a comparison that must stay below `tolerance`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToleranceCheck {
    pub name: &'static str,
    pub evaluations: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

/// A sampled configuration with a margin below `-MARGIN_TOL`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Failure {
    pub check: &'static str,
    pub point: BellmanPoint,
    pub margin: f64,
}

/// Outcome of one certificate run.
///
/// `worst_margin` is the minimum over all margin checks; `failures` is
/// nonempty exactly when it is below `-MARGIN_TOL`. `constants` holds the
/// estimated constants (minimum over samples) next to the ones the proof
/// requires (suffix `_required`).
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport {
    pub id: CertificateId,
    pub seed: u64,
    pub samples: usize,
    pub worst_margin: f64,
    pub best_constant_estimate: f64,
    pub required_constant: f64,
    pub checks: Vec<CheckSummary>,
    pub tolerances: Vec<ToleranceCheck>,
    pub constants: Vec<NamedValue>,
    pub failures: Vec<Failure>,
}

impl CertificateReport {
    pub(crate) fn new(id: CertificateId, seed: u64, checks: &[&'static str]) -> Self {
        CertificateReport {
            id,
            seed,
            samples: 0,
            worst_margin: f64::INFINITY,
            best_constant_estimate: f64::INFINITY,
            required_constant: f64::NAN,
            checks: checks
                .iter()
                .map(|&name| CheckSummary {
                    name,
                    evaluations: 0,
                    worst_margin: f64::INFINITY,
                })
                .collect(),
            tolerances: Vec::new(),
            constants: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn margins_ok(&self) -> bool {
        self.worst_margin >= -MARGIN_TOL
    }

    pub fn tolerances_ok(&self) -> bool {
        self.tolerances.iter().all(|t| t.max_error <= t.tolerance)
    }

    pub fn passed(&self) -> bool {
        self.margins_ok() && self.tolerances_ok()
    }

    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn tolerance(&self, name: &str) -> Option<&ToleranceCheck> {
        self.tolerances.iter().find(|c| c.name == name)
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.value)
    }

    pub(crate) fn margin(&mut self, check: &'static str, margin: f64, point: &BellmanPoint) {
        let margin = if margin.is_nan() {
            f64::NEG_INFINITY
        } else {
            margin
        };
        let slot = match self.checks.iter_mut().find(|c| c.name == check) {
            Some(slot) => slot,
            None => {
                self.checks.push(CheckSummary {
                    name: check,
                    evaluations: 0,
                    worst_margin: f64::INFINITY,
                });
                self.checks.last_mut().expect("just pushed")
            }
        };
        slot.evaluations += 1;
        slot.worst_margin = slot.worst_margin.min(margin);
        self.worst_margin = self.worst_margin.min(margin);
        if margin < -MARGIN_TOL {
            self.push_failure(Failure {
                check,
                point: *point,
                margin,
            });
        }
    }

    fn push_failure(&mut self, f: Failure) {
        self.failures.push(f);
        if self.failures.len() > 2 * MAX_FAILURES {
            self.trim_failures();
        }
    }

    fn trim_failures(&mut self) {
        self.failures.sort_by(|a, b| a.margin.total_cmp(&b.margin));
        self.failures.truncate(MAX_FAILURES);
    }

    pub(crate) fn tolerance_error(&mut self, name: &'static str, error: f64, tolerance: f64) {
        let error = if error.is_nan() { f64::INFINITY } else { error };
        match self.tolerances.iter_mut().find(|t| t.name == name) {
            Some(t) => {
                t.evaluations += 1;
                t.max_error = t.max_error.max(error);
            }
            None => self.tolerances.push(ToleranceCheck {
                name,
                evaluations: 1,
                max_error: error,
                tolerance,
            }),
        }
    }

    /// Lowers the named constant to `value` (minimum reduction).
    pub(crate) fn constant_min(&mut self, name: &'static str, value: f64) {
        if value.is_nan() {
            return;
        }
        match self.constants.iter_mut().find(|c| c.name == name) {
            Some(c) => c.value = c.value.min(value),
            None => self.constants.push(NamedValue { name, value }),
        }
    }

    /// Compares a finite-difference Hessian of `f` at `p` with `closed`.
    pub(crate) fn hessian_check<F: Fn(&[f64]) -> Option<f64>>(
        &mut self,
        name: &'static str,
        f: F,
        p: &[f64],
        closed: &DenseMatrix,
        tolerance: f64,
    ) {
        let value = f(p).unwrap_or(f64::NAN);
        let err = match fd_hessian(f, p, DEFAULT_H_REL) {
            Ok(fd) => hessian_rel_error(&fd, closed, p, value),
            Err(_) => f64::INFINITY,
        };
        self.tolerance_error(name, err, tolerance);
    }

    fn finish(mut self, best: &'static str, required: f64) -> Self {
        self.best_constant_estimate = self.constant(best).unwrap_or(f64::INFINITY);
        self.required_constant = required;
        self.trim_failures();
        self
    }
}

/// Merges shard reports of the same certificate (in shard order).
pub fn merge(reports: Vec<CertificateReport>) -> Result<CertificateReport> {
    let mut it = reports.into_iter();
    let mut acc = it.next().ok_or(Error::Domain("nothing to merge"))?;
    for r in it {
        if r.id != acc.id || r.seed != acc.seed {
            return Err(Error::Domain("merging reports of different runs"));
        }
        acc.samples += r.samples;
        acc.worst_margin = acc.worst_margin.min(r.worst_margin);
        acc.best_constant_estimate = acc.best_constant_estimate.min(r.best_constant_estimate);
        for c in r.checks {
            match acc.checks.iter_mut().find(|a| a.name == c.name) {
                Some(a) => {
                    a.evaluations += c.evaluations;
                    a.worst_margin = a.worst_margin.min(c.worst_margin);
                }
                None => acc.checks.push(c),
            }
        }
        for t in r.tolerances {
            match acc.tolerances.iter_mut().find(|a| a.name == t.name) {
                Some(a) => {
                    a.evaluations += t.evaluations;
                    a.max_error = a.max_error.max(t.max_error);
                }
                None => acc.tolerances.push(t),
            }
        }
        for c in r.constants {
            acc.constant_min(c.name, c.value);
        }
        acc.failures.extend(r.failures);
        acc.trim_failures();
    }
    Ok(acc)
}

/// One shard of a certificate run; shard `s` draws from
/// `derive_seed(seed, s)`. Deterministic checks (grids) run in shard 0.
pub fn run_certificate_shard(
    id: CertificateId,
    cfg: &SamplerConfig,
    shard: usize,
) -> Result<CertificateReport> {
    id.validate()?;
    cfg.validate()?;
    if shard >= cfg.shards {
        return Err(Error::Domain("shard index out of range"));
    }
    let mut s = Sampler {
        rng: seeded(cfg.seed, shard as u64),
    };
    let n = cfg.shard_len(shard);
    let first = shard == 0;
    let report = match id {
        CertificateId::AlphaSmall { alpha } => power::run_small(id, alpha, &mut s, n, first),
        CertificateId::AlphaLarge { alpha } => power::run_large(id, alpha, &mut s, n),
        CertificateId::Embedding { c_dom, c_fun } => embedding::run(id, c_dom, c_fun, &mut s, n),
        CertificateId::Seven { c_dom, c_reg } => seven::run(id, c_dom, c_reg, &mut s, n),
        CertificateId::Nine { c_dom } => nine::run(id, c_dom, &mut s, n),
    };
    let mut report = report;
    report.seed = cfg.seed;
    report.samples = n;
    Ok(report)
}

/// All shards of a certificate run, sequentially, merged.
pub fn run_certificate(id: CertificateId, cfg: &SamplerConfig) -> Result<CertificateReport> {
    id.validate()?;
    cfg.validate()?;
    let shards = (0..cfg.shards)
        .map(|s| run_certificate_shard(id, cfg, s))
        .collect::<Result<Vec<_>>>()?;
    merge(shards)
}

/// Draws Bellman points.
///
/// Coordinates are log-uniform on `[1e-3, 1e3]` and then projected into the
/// domain; one draw in sixteen is pushed onto a domain boundary.
pub(crate) struct Sampler {
    pub rng: Rng64,
}

const BOUNDARY_P: f64 = 1.0 / 16.0;

impl Sampler {
    pub fn coord(&mut self) -> f64 {
        log_uniform(&mut self.rng, 1e-3, 1e3)
    }

    pub fn unit(&mut self) -> f64 {
        uniform(&mut self.rng, 0.0, 1.0)
    }

    pub fn between(&mut self, lo: f64, hi: f64) -> f64 {
        uniform(&mut self.rng, lo, hi)
    }

    pub fn log_between(&mut self, lo: f64, hi: f64) -> f64 {
        log_uniform(&mut self.rng, lo, hi)
    }

    pub fn coin(&mut self, p: f64) -> bool {
        coin(&mut self.rng, p)
    }

    pub fn boundary(&mut self) -> bool {
        self.coin(BOUNDARY_P)
    }

    /// Ratio `u` in `x = √(Xw)·u`: 1 on the boundary, else uniform.
    pub fn ratio(&mut self) -> f64 {
        if self.boundary() {
            1.0
        } else {
            self.unit()
        }
    }

    /// Fraction of a cap: 0 or 1 on the boundary, else uniform.
    pub fn fraction(&mut self) -> f64 {
        if self.boundary() {
            if self.coin(0.5) {
                1.0
            } else {
                0.0
            }
        } else {
            self.unit()
        }
    }

    /// Supermartingale slack as a fraction of the room left: zero one time in
    /// sixteen, else log-uniform on `[1e-6, 1]`.
    pub fn slack(&mut self) -> f64 {
        if self.boundary() {
            0.0
        } else {
            self.log_between(1e-6, 1.0)
        }
    }

    /// `(X, x, w)` with `x² ≤ Xw`.
    pub fn triple(&mut self) -> [f64; 3] {
        let (big, w) = (self.coord(), self.coord());
        [big, libm::sqrt(big * w) * self.ratio(), w]
    }

    /// Two triples, either independent or multiplicatively close.
    pub fn triple_pair(&mut self) -> [[f64; 3]; 2] {
        let a = self.triple();
        if self.coin(0.5) {
            return [a, self.triple()];
        }
        let eps = self.log_between(1e-4, 1.0);
        let jiggle = |c: f64, s: &mut Self| c * libm::exp(eps * s.between(-1.0, 1.0));
        let big = jiggle(a[0], self);
        let w = jiggle(a[2], self);
        let x = jiggle(a[1], self).min(libm::sqrt(big * w));
        [a, [big, x, w]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        libm::fabs(a - b) <= tol
    }

    #[test]
    fn fd_hessian_of_product() {
        let h = fd_hessian(|p| Some(p[0] * p[1]), &[1.0, 1.0], DEFAULT_H_REL).unwrap();
        assert!(close(h.get(0, 1), 1.0, 1e-6) && close(h.get(1, 0), 1.0, 1e-6));
        assert!(close(h.get(0, 0), 0.0, 1e-7) && close(h.get(1, 1), 0.0, 1e-7));
    }

    #[test]
    fn fd_hessian_of_quarter_power() {
        let f = |p: &[f64]| Some(libm::pow(p[0] * p[1], 0.25));
        let h = fd_hessian(f, &[1.0, 1.0], DEFAULT_H_REL).unwrap();
        let form = h.get(0, 0) + 2.0 * h.get(0, 1) + h.get(1, 1);
        assert!(close(form, -0.25, 1e-6), "{form}");
    }

    #[test]
    fn fd_hessian_exact_on_quadratics() {
        let f = |p: &[f64]| Some(3.0 * p[0] * p[0] - 2.0 * p[0] * p[1] + 0.5 * p[1] * p[1]);
        for h_rel in [1e-2, 1e-4] {
            let h = fd_hessian(f, &[2.0, -1.0], h_rel).unwrap();
            assert!(close(h.get(0, 0), 6.0, 1e-6) && close(h.get(0, 1), -2.0, 1e-6));
            assert!(close(h.get(1, 1), 1.0, 1e-6));
        }
    }

    #[test]
    fn fd_hessian_one_sided_at_boundary() {
        // sqrt is undefined left of 0: the x-stencil must go forward
        let f = |p: &[f64]| (p[0] >= 0.0).then(|| p[0] * p[0] + p[0] * p[1]);
        let h = fd_hessian(f, &[0.0, 1.0], 1e-4).unwrap();
        assert!(close(h.get(0, 0), 2.0, 1e-6) && close(h.get(0, 1), 1.0, 1e-6));
    }

    #[test]
    fn fd_hessian_stencil_error() {
        let f = |p: &[f64]| (p[0] == 1.0).then_some(1.0);
        assert_eq!(fd_hessian(f, &[1.0], 1e-4), Err(Error::Stencil));
    }

    #[test]
    fn midpoint_drop_examples() {
        let f = |p: &BellmanPoint| libm::pow(p.x * p.y, 0.25);
        let a = BellmanPoint::xy(1.0, 1.0);
        assert_eq!(midpoint_drop(f, &a, &a, &a).unwrap(), 0.0);
        let lin = |p: &BellmanPoint| 2.0 * p.x - p.y;
        let (m, p) = (BellmanPoint::xy(0.5, 2.0), BellmanPoint::xy(1.5, 0.0));
        assert!(close(midpoint_drop(lin, &a, &m, &p).unwrap(), 0.0, 1e-15));
        let (m, p) = (BellmanPoint::xy(0.5, 1.5), BellmanPoint::xy(1.5, 0.5));
        let d = midpoint_drop(f, &a, &m, &p).unwrap();
        assert!(close(d, 1.0 - libm::pow(0.75, 0.25), 1e-15));
        assert!(close(d, 0.0694, 1e-4));
        let bad = BellmanPoint::xy(-1.0, 1.0);
        assert!(midpoint_drop(f, &a, &bad, &p).is_err());
    }

    #[test]
    fn shard_lengths_cover_samples() {
        let cfg = SamplerConfig {
            samples: 1003,
            seed: 1,
            shards: 8,
        };
        assert_eq!((0..8).map(|s| cfg.shard_len(s)).sum::<usize>(), 1003);
    }

    #[test]
    fn domains() {
        let p = BellmanPoint {
            X: 1.0,
            x: 1.0,
            w: 1.0,
            M: 1.0,
            ..Default::default()
        };
        assert!(p.in_embedding_domain(1.0));
        assert!(!p.in_embedding_domain(0.5));
        assert!(BellmanPoint::xy(2.0, 0.5).in_power_domain());
        assert!(!BellmanPoint::xy(2.0, 0.6).in_power_domain());
    }

    #[test]
    fn merge_is_shard_count_independent_in_totals() {
        let id = CertificateId::Nine { c_dom: 1.0 };
        let a = run_certificate(
            id,
            &SamplerConfig {
                samples: 400,
                seed: 9,
                shards: 1,
            },
        )
        .unwrap();
        let b = run_certificate(
            id,
            &SamplerConfig {
                samples: 400,
                seed: 9,
                shards: 4,
            },
        )
        .unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.checks.len(), b.checks.len());
        let again = run_certificate(
            id,
            &SamplerConfig {
                samples: 400,
                seed: 9,
                shards: 4,
            },
        );
        assert_eq!(again.unwrap(), b);
    }
}
