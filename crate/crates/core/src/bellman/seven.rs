//! The nine-variable function `B = Q + P` of the bilinear embedding:
//!
//! - `Q = C_fun(X + Y − x²/(w+M) − y²/(v+N))`,
//! - `P = C_fun(X + Y) − sup_{s>0} (x²/(w+sK) + y²/(v+K/s))`,
//!
//! on `x² ≤ Xw`, `y² ≤ Yv`, `M ≤ C_dom·w`, `N ≤ C_dom·v`, `K ≤ C_dom·√(wv)`.
//!
//! `P` drops in `K` only in the small-`K` regime
//! `(x²/w + y²/v)K ≤ c_reg·xy`; with `c_reg < 1` the envelope derivative
//! gives `∂P/∂K ≥ 2(1 − c_reg)²·xy/(wv)` there.

use super::{
    embedding_hessian, run_certificate, BellmanPoint, CertificateId, CertificateReport, Sampler,
    SamplerConfig, HESSIAN_EVERY, HESSIAN_TOL,
};
use crate::linalg::DenseMatrix;
use crate::Result;

/// Default regime constant.
pub const DEFAULT_REGIME: f64 = 0.5;

const LOG_S: f64 = 40.0;
const GOLDEN_TOL: f64 = 1e-4;
const LOG_S_TOL: f64 = 1e-12;
const SUP_TOL: f64 = 1e-10;
const STATIONARY_TOL: f64 = 1e-8;

/// `x²/(w+sK) + y²/(v+K/s)`.
pub fn sup_s_objective(x: f64, w: f64, y: f64, v: f64, k: f64, s: f64) -> f64 {
    x * x / (w + s * k) + y * y / (v + k / s)
}

/// Derivative of the objective with respect to `log s`.
fn slope(x: f64, w: f64, y: f64, v: f64, k: f64, t: f64) -> f64 {
    let s = libm::exp(t);
    let (a, b) = (w + s * k, v + k / s);
    -x * x * s * k / (a * a) + y * y * (k / s) / (b * b)
}

/// Supremum over `s > 0` of [`sup_s_objective`], with a maximizer.
///
/// The derivative in `s` has the sign of `(yw − xK) + s(yK − xv)`, so it
/// changes sign at most once. The slopes at the ends of the window
/// `log s ∈ [−40, 40]` tell the shape: an interior peak is located by
/// golden-section search to `1e-4` and then bisection on the sign of the
/// derivative to `1e-12`; otherwise the supremum is the limit `x²/w`
/// (`s → 0`) or `y²/v` (`s → ∞`) and `s* = 0` or `s* = ∞` is reported.
/// `K = 0` returns `x²/w + y²/v` with `s* = 1`.
pub fn sup_s_value(x: f64, w: f64, y: f64, v: f64, k: f64) -> (f64, f64) {
    let (left, right) = (x * x / w, y * y / v);
    if k == 0.0 {
        return (1.0, left + right);
    }
    let f = |t: f64| sup_s_objective(x, w, y, v, k, libm::exp(t));
    let df = |t: f64| slope(x, w, y, v, k, t);
    let (falls, rises) = (df(-LOG_S) <= 0.0, df(LOG_S) >= 0.0);
    if falls || rises {
        // monotone, flat, or a valley: the supremum is a limit
        let lo = if falls {
            left.max(f(-LOG_S))
        } else {
            f64::NEG_INFINITY
        };
        let hi = if rises {
            right.max(f(LOG_S))
        } else {
            f64::NEG_INFINITY
        };
        return if lo >= hi {
            (0.0, lo)
        } else {
            (f64::INFINITY, hi)
        };
    }
    let g = 0.5 * (libm::sqrt(5.0) - 1.0);
    let (mut a, mut b) = (-LOG_S, LOG_S);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > GOLDEN_TOL {
        // flat stretches in floating point are resolved by the slope
        let left_side = fc > fd || (fc == fd && df(0.5 * (c + d)) < 0.0);
        if left_side {
            b = d;
            (d, fd) = (c, fc);
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            (c, fc) = (d, fd);
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if !(df(a) > 0.0 && df(b) < 0.0) {
        (a, b) = (-LOG_S, LOG_S);
    }
    while b - a > LOG_S_TOL {
        let mid = 0.5 * (a + b);
        if df(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let t = 0.5 * (a + b);
    let inner = f(t);
    if left > inner && left >= right {
        (0.0, left)
    } else if right > inner {
        (f64::INFINITY, right)
    } else {
        (libm::exp(t), inner)
    }
}

/// Relative residual of `sK x²/(w+sK)² = (K/s) y²/(v+K/s)²`.
pub fn stationarity_residual(x: f64, w: f64, y: f64, v: f64, k: f64, s: f64) -> f64 {
    let (a, b) = (w + s * k, v + k / s);
    let lhs = s * k * x * x / (a * a);
    let rhs = (k / s) * y * y / (b * b);
    if lhs + rhs == 0.0 {
        0.0
    } else {
        libm::fabs(lhs - rhs) / (lhs + rhs)
    }
}

/// `(x²/w + y²/v)K ≤ c·xy`; equality counts as inside.
pub fn in_small_k_regime(p: &BellmanPoint, c: f64) -> bool {
    (p.x * p.x / p.w + p.y * p.y / p.v) * p.K <= c * p.x * p.y
}

/// `2(1 − c_reg)²`.
pub fn regime_constant(c_reg: f64) -> f64 {
    2.0 * (1.0 - c_reg) * (1.0 - c_reg)
}

pub fn seven_q(c_fun: f64, p: &BellmanPoint) -> f64 {
    c_fun * (p.X + p.Y - p.x * p.x / (p.w + p.M) - p.y * p.y / (p.v + p.N))
}

pub fn seven_p(c_fun: f64, p: &BellmanPoint) -> f64 {
    c_fun * (p.X + p.Y) - sup_s_value(p.x, p.w, p.y, p.v, p.K).1
}

/// `∂P/∂K` by the envelope theorem at the returned maximizer. At `K = 0`
/// every `s` is a maximizer and the right derivative is `2xy/(wv)`.
pub fn p_k_derivative(p: &BellmanPoint) -> f64 {
    if p.K == 0.0 {
        return 2.0 * p.x * p.y / (p.w * p.v);
    }
    let (s, _) = sup_s_value(p.x, p.w, p.y, p.v, p.K);
    derivative_at(p, s)
}

fn derivative_at(p: &BellmanPoint, s: f64) -> f64 {
    if s == 0.0 || s.is_infinite() {
        return 0.0;
    }
    let (a, b) = (p.w + s * p.K, p.v + p.K / s);
    p.x * p.x * s / (a * a) + p.y * p.y / (s * b * b)
}

/// Certificate with the default regime constant.
pub fn cert_seven(c_dom: f64, cfg: &SamplerConfig) -> Result<CertificateReport> {
    cert_seven_with(c_dom, DEFAULT_REGIME, cfg)
}

pub fn cert_seven_with(c_dom: f64, c_reg: f64, cfg: &SamplerConfig) -> Result<CertificateReport> {
    run_certificate(CertificateId::Seven { c_dom, c_reg }, cfg)
}

/// Hessian of `Q` in the coordinates `(X, x, w, Y, y, v, M, N)`.
fn q_hessian(c_fun: f64, p: &BellmanPoint) -> DenseMatrix {
    let mut h = DenseMatrix::zeros(8, 8);
    let first = BellmanPoint {
        X: p.X,
        x: p.x,
        w: p.w,
        M: p.M,
        ..Default::default()
    };
    let second = BellmanPoint {
        X: p.Y,
        x: p.y,
        w: p.v,
        M: p.N,
        ..Default::default()
    };
    for (part, idx) in [(first, [0, 1, 2, 6]), (second, [3, 4, 5, 7])] {
        let e = embedding_hessian(c_fun, &part);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                h.set(i, j, e.get(a, b));
            }
        }
    }
    h
}

fn q_coords(p: &BellmanPoint) -> [f64; 8] {
    [p.X, p.x, p.w, p.Y, p.y, p.v, p.M, p.N]
}

fn q_fn(c_fun: f64) -> impl Fn(&[f64]) -> Option<f64> {
    move |c: &[f64]| {
        let p = BellmanPoint {
            X: c[0],
            x: c[1],
            w: c[2],
            Y: c[3],
            y: c[4],
            v: c[5],
            M: c[6],
            N: c[7],
            K: 0.0,
        };
        (p.w + p.M > 0.0 && p.v + p.N > 0.0).then(|| seven_q(c_fun, &p))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Slack {
    K,
    M,
    N,
    All,
    Flat,
}

pub(super) fn run(
    id: CertificateId,
    c_dom: f64,
    c_reg: f64,
    s: &mut Sampler,
    n: usize,
) -> CertificateReport {
    let c_fun = super::embedding_fun_constant(c_dom);
    let gamma1 = regime_constant(c_reg);
    let mut r = CertificateReport::new(
        id,
        0,
        &[
            "bounds",
            "q_drop",
            "p_concavity",
            "p_drop",
            "p_derivative",
            "dichotomy",
        ],
    );
    r.constant_min("gamma1_required", gamma1);
    r.constant_min("gamma2_required", 1.0);
    r.constant_min("gamma3_required", 1.0);
    for k in 0..n {
        let [f0, f1] = s.triple_pair();
        let [g0, g1] = s.triple_pair();
        let mid = |i: usize, a: &[f64; 3], b: &[f64; 3]| 0.5 * (a[i] + b[i]);
        let (x, w, y, v) = (
            mid(1, &f0, &f1),
            mid(2, &f0, &f1),
            mid(1, &g0, &g1),
            mid(2, &g0, &g1),
        );
        let mut cap_k = c_dom * libm::sqrt(w * v);
        if s.coin(0.5) {
            let load = x * x / w + y * y / v;
            if load > 0.0 {
                cap_k = cap_k.min(c_reg * x * y / load);
            }
        }
        let side = |f: &[f64; 3], g: &[f64; 3], s: &mut Sampler| BellmanPoint {
            X: f[0],
            x: f[1],
            w: f[2],
            Y: g[0],
            y: g[1],
            v: g[2],
            K: s.fraction() * cap_k.min(c_dom * libm::sqrt(f[2] * g[2])),
            M: s.fraction() * c_dom * f[2],
            N: s.fraction() * c_dom * g[2],
        };
        let am = side(&f0, &g0, s);
        let ap = side(&f1, &g1, s);
        let mut a = BellmanPoint::midpoint(&am, &ap);
        let mode = [Slack::K, Slack::M, Slack::N, Slack::All, Slack::Flat]
            [((s.unit() * 5.0) as usize).min(4)];
        let room = |on: bool, cap: f64, cur: f64, s: &mut Sampler| {
            if on {
                s.slack() * (cap - cur).max(0.0)
            } else {
                0.0
            }
        };
        let h_k = room(matches!(mode, Slack::K | Slack::All), cap_k, a.K, s);
        let h_m = room(matches!(mode, Slack::M | Slack::All), c_dom * w, a.M, s);
        let h_n = room(matches!(mode, Slack::N | Slack::All), c_dom * v, a.N, s);
        a.K += h_k;
        a.M += h_m;
        a.N += h_n;

        let scale = c_fun * (a.X + a.Y);
        let q = |p: &BellmanPoint| seven_q(c_fun, p);
        let (sa, sup_a) = sup_s_value(a.x, a.w, a.y, a.v, a.K);
        let p_val = |p: &BellmanPoint| c_fun * (p.X + p.Y) - sup_s_value(p.x, p.w, p.y, p.v, p.K).1;
        let (qa, pa) = (q(&a), c_fun * (a.X + a.Y) - sup_a);
        r.margin("bounds", qa.min(pa).min(2.0 * scale - qa - pa) / scale, &a);

        let drop_q = qa - 0.5 * (q(&am) + q(&ap));
        let rhs_q = x * x / (w * w) * h_m + y * y / (v * v) * h_n;
        r.margin("q_drop", (drop_q - rhs_q) / scale, &a);
        if mode == Slack::M && rhs_q > 1e-6 * scale {
            r.constant_min("gamma2", drop_q / rhs_q);
        }
        if mode == Slack::N && rhs_q > 1e-6 * scale {
            r.constant_min("gamma3", drop_q / rhs_q);
        }

        let drop_p = pa - 0.5 * (p_val(&am) + p_val(&ap));
        r.margin("p_concavity", drop_p / scale, &a);
        let unit = x * y / (w * v);
        let regime = in_small_k_regime(&a, c_reg);
        if regime {
            let rhs_p = gamma1 * unit * h_k;
            r.margin("p_drop", (drop_p - rhs_p) / scale, &a);
            if unit * h_k > 1e-6 * scale {
                r.constant_min("gamma1", drop_p / (unit * h_k));
            }
            if unit > 0.0 {
                let d = if a.K == 0.0 {
                    2.0 * unit
                } else {
                    derivative_at(&a, sa)
                };
                r.margin("p_derivative", d / unit - gamma1, &a);
                r.constant_min("gamma1_derivative", d / unit);
            }
        }
        let rhs_b = if regime { gamma1 * unit * h_k } else { rhs_q };
        r.margin("dichotomy", (drop_q + drop_p - rhs_b) / scale, &a);

        if k % HESSIAN_EVERY == 0 {
            // Hessians are compared at interior points: M, N off their zero bound
            let hp = BellmanPoint {
                M: a.M.max(1e-3 * c_dom * a.w),
                N: a.N.max(1e-3 * c_dom * a.v),
                ..a
            };
            r.hessian_check(
                "hessian",
                q_fn(c_fun),
                &q_coords(&hp),
                &q_hessian(c_fun, &hp),
                HESSIAN_TOL,
            );
            if a.K > 0.0 {
                let mut worst = 0.0f64;
                for _ in 0..100 {
                    let t = s.log_between(1e-12, 1e12);
                    let obj = sup_s_objective(a.x, a.w, a.y, a.v, a.K, t);
                    worst = worst.max((obj - sup_a) / sup_a.max(f64::MIN_POSITIVE));
                }
                r.tolerance_error("sup_s_dominance", worst, SUP_TOL);
                if sa > 0.0 && sa.is_finite() {
                    let res = stationarity_residual(a.x, a.w, a.y, a.v, a.K, sa);
                    r.tolerance_error("stationarity", res, STATIONARY_TOL);
                }
            }
        }
    }
    r.finish("gamma1", gamma1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        libm::fabs(a - b) <= tol
    }

    #[test]
    fn sup_s_identities() {
        assert_eq!(sup_s_value(2.0, 1.0, 3.0, 2.0, 0.0), (1.0, 4.0 + 4.5));
        let (_, v) = sup_s_value(1.0, 1.0, 1.0, 1.0, 1.0);
        assert!(close(v, 1.0, 1e-15));
        for s in [1e-3, 0.5, 1.0, 7.0] {
            assert!(close(
                sup_s_objective(1.0, 1.0, 1.0, 1.0, 1.0, s),
                1.0,
                1e-15
            ));
        }
        assert_eq!(sup_s_value(2.0, 4.0, 0.0, 1.0, 1.0), (0.0, 1.0));
        assert_eq!(sup_s_value(0.0, 4.0, 2.0, 1.0, 1.0), (f64::INFINITY, 4.0));
        // a valley: falls from x²/w = 14.0 then rises to y²/v = 5729.6
        let (s, value) = sup_s_value(6.4887, 3.0103, 7.5694, 0.01, 4.3335);
        assert_eq!(s, f64::INFINITY);
        assert!(close(value, 7.5694 * 7.5694 / 0.01, 1e-12));
    }

    #[test]
    fn sup_s_matches_closed_form_maximizer() {
        // interior maximizer s* = (yw − xK)/(xv − yK) when both are positive
        let (x, w, y, v, k) = (1.0, 2.0, 1.5, 3.0, 0.4);
        let s_star = (y * w - x * k) / (x * v - y * k);
        let (s, value) = sup_s_value(x, w, y, v, k);
        assert!(
            close(libm::log(s), libm::log(s_star), 1e-10),
            "{s} vs {s_star}"
        );
        assert!(close(value, sup_s_objective(x, w, y, v, k, s_star), 1e-14));
        assert!(stationarity_residual(x, w, y, v, k, s) < 1e-10);
    }

    #[test]
    fn regime_membership() {
        let p = BellmanPoint {
            x: 1.0,
            w: 1.0,
            y: 1.0,
            v: 1.0,
            K: 1.0,
            ..Default::default()
        };
        assert!(in_small_k_regime(&p, 2.0));
        assert!(!in_small_k_regime(&p, 1.999));
        assert!(close(sup_s_value(1.0, 1.0, 1.0, 1.0, 1.0).1, 1.0, 1e-15));
    }

    #[test]
    fn m_slack_drop_beats_capped_derivative() {
        let c_fun = 4.0;
        let base = BellmanPoint {
            X: 1.0,
            x: 1.0,
            w: 1.0,
            Y: 1.0,
            y: 0.5,
            v: 1.0,
            ..Default::default()
        };
        let (m_minus, m_plus, h) = (0.2, 0.4, 0.3);
        let am = BellmanPoint { M: m_minus, ..base };
        let ap = BellmanPoint { M: m_plus, ..base };
        let a = BellmanPoint {
            M: 0.5 * (m_minus + m_plus) + h,
            ..base
        };
        let drop = seven_q(c_fun, &a) - 0.5 * (seven_q(c_fun, &am) + seven_q(c_fun, &ap));
        let m_max = 1.0 * base.w;
        assert!(drop >= c_fun * base.x * base.x / ((base.w + m_max) * (base.w + m_max)) * h);
    }

    #[test]
    fn derivative_bound_in_regime() {
        let p = BellmanPoint {
            x: 1.0,
            w: 1.0,
            y: 1.0,
            v: 1.0,
            K: 0.25,
            ..Default::default()
        };
        assert!(in_small_k_regime(&p, 0.5));
        assert!(p_k_derivative(&p) >= regime_constant(0.5));
    }

    #[test]
    fn certificate_runs_clean() {
        let cfg = SamplerConfig {
            samples: 2000,
            seed: 6,
            shards: 2,
        };
        let r = cert_seven(1.0, &cfg).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.constant("gamma1").unwrap() >= regime_constant(DEFAULT_REGIME));
    }

    #[test]
    fn regime_constant_must_be_below_one() {
        let cfg = SamplerConfig {
            samples: 10,
            seed: 0,
            shards: 1,
        };
        assert!(cert_seven_with(1.0, 1.0, &cfg).is_err());
    }
}
