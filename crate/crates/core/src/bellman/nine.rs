//! The square-function pair `P = X − x²/w`, `Q = X − x²/(w+M)` on
//! `x² ≤ Xw`, `M ≤ C·w`.
//!
//! Required constants: `Q` drops by at least `x²/((1+C)²w²)` per unit of
//! `M`-slack. For `P`, on `t ∈ [−1/2, 1/2]` the segment keeps
//! `x_t ∈ [x/2, 3x/2]`, `w_t ∈ [w/2, 3w/2]`, so `−p'' ≥ (1/12)(x²/w)·inf|…|²`
//! and the drop is at least `(3/4)(1/12) = 1/16` of the infimum term.

use super::{
    midpoint_drop, run_certificate, BellmanPoint, CertificateId, CertificateReport, Sampler,
    SamplerConfig, DEFAULT_H_REL, HESSIAN_EVERY, HESSIAN_TOL,
};
use crate::linalg::DenseMatrix;
use crate::Result;

/// Default `C` of `M ≤ C·w`.
pub const NINE_DOMAIN: f64 = 1.0;
/// Constant of the `P`-drop.
pub const NINE_P_CONSTANT: f64 = 1.0 / 16.0;

const GRID: usize = 41;
const CLOSED_FORM_TOL: f64 = 1e-12;

pub fn nine_p(p: &BellmanPoint) -> f64 {
    p.X - p.x * p.x / p.w
}

pub fn nine_q(p: &BellmanPoint) -> f64 {
    p.X - p.x * p.x / (p.w + p.M)
}

/// Hessian of `P` in `(X, x, w)`.
pub fn nine_p_hessian(p: &BellmanPoint) -> DenseMatrix {
    let (x, w) = (p.x, p.w);
    let mut h = DenseMatrix::zeros(3, 3);
    h.set(1, 1, -2.0 / w);
    h.set(1, 2, 2.0 * x / (w * w));
    h.set(2, 1, 2.0 * x / (w * w));
    h.set(2, 2, -2.0 * x * x / (w * w * w));
    h
}

/// `−d²P = 2(x²/w)(dx/x − dw/w)²`.
pub fn neg_d2p(x: f64, w: f64, dx: f64, dw: f64) -> f64 {
    let r = dx / x - dw / w;
    2.0 * x * x / w * r * r
}

/// `inf |c₁a − c₂b|²` over the 41-point grid of `[1/2, 2]²`.
pub fn grid_infimum(a: f64, b: f64) -> f64 {
    let node = |i: usize| 0.5 + 1.5 * i as f64 / (GRID - 1) as f64;
    let mut best = f64::INFINITY;
    for i in 0..GRID {
        for j in 0..GRID {
            let d = node(i) * a - node(j) * b;
            best = best.min(d * d);
        }
    }
    best
}

/// Certificate with `C = 1`.
pub fn cert_nine(cfg: &SamplerConfig) -> Result<CertificateReport> {
    cert_nine_with(NINE_DOMAIN, cfg)
}

pub fn cert_nine_with(c_dom: f64, cfg: &SamplerConfig) -> Result<CertificateReport> {
    run_certificate(CertificateId::Nine { c_dom }, cfg)
}

fn p_fn(c: &[f64]) -> Option<f64> {
    (c[2] > 0.0).then(|| c[0] - c[1] * c[1] / c[2])
}

fn point(s: &mut Sampler, t: [f64; 3], c_dom: f64) -> BellmanPoint {
    BellmanPoint {
        X: t[0],
        x: t[1],
        w: t[2],
        M: c_dom * t[2] * s.fraction(),
        ..Default::default()
    }
}

pub(super) fn run(id: CertificateId, c_dom: f64, s: &mut Sampler, n: usize) -> CertificateReport {
    let mut r = CertificateReport::new(id, 0, &["bounds", "q_drop", "p_drop"]);
    let c_q = 1.0 / ((1.0 + c_dom) * (1.0 + c_dom));
    r.constant_min("c_q_required", c_q);
    r.constant_min("c_p_required", NINE_P_CONSTANT);
    for k in 0..n {
        let [t0, t1] = s.triple_pair();
        let (am, ap) = (point(s, t0, c_dom), point(s, t1, c_dom));
        let mut a = BellmanPoint::midpoint(&am, &ap);
        let h = s.slack() * (c_dom * a.w - a.M).max(0.0);
        a.M += h;

        let scale = a.X;
        let (pv, qv) = (nine_p(&a), nine_q(&a));
        r.margin("bounds", pv.min(qv).min(2.0 * scale - pv - qv) / scale, &a);

        let drop_q = midpoint_drop(nine_q, &a, &am, &ap).unwrap_or(f64::NAN);
        let unit_q = a.x * a.x / (a.w * a.w) * h;
        r.margin("q_drop", (drop_q - c_q * unit_q) / scale, &a);
        if unit_q > 1e-6 * scale {
            r.constant_min("c_q", drop_q / unit_q);
        }

        let drop_p = midpoint_drop(nine_p, &a, &am, &ap).unwrap_or(f64::NAN);
        let unit_p = if a.x == 0.0 {
            0.0
        } else {
            a.x * a.x / a.w * grid_infimum((am.x - ap.x) / a.x, (am.w - ap.w) / a.w)
        };
        r.margin("p_drop", (drop_p - NINE_P_CONSTANT * unit_p) / scale, &a);
        if unit_p > 1e-6 * scale {
            r.constant_min("c_p", drop_p / unit_p);
        }

        if k % HESSIAN_EVERY == 0 {
            let c = [a.X, a.x, a.w];
            let closed = nine_p_hessian(&a);
            r.hessian_check("hessian", p_fn, &c, &closed, HESSIAN_TOL);
            let u = [
                s.between(-1.0, 1.0),
                s.between(-1.0, 1.0),
                s.between(-1.0, 1.0),
            ];
            let d = [u[0] * a.X, u[1] * a.x, u[2] * a.w];
            let target = neg_d2p(a.x, a.w, d[1], d[2]);
            let spread: f64 = u.iter().map(|c| libm::fabs(*c)).sum();
            let size = (2.0 * a.x * a.x / a.w + libm::fabs(pv)) * spread * spread;
            let quad = |m: &DenseMatrix| {
                let mut q = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        q += d[i] * m.get(i, j) * d[j];
                    }
                }
                q
            };
            let err = libm::fabs(-quad(&closed) - target) / size;
            r.tolerance_error("d2p_closed_form", err, CLOSED_FORM_TOL);
            let err = super::fd_hessian(p_fn, &c, DEFAULT_H_REL)
                .map_or(f64::INFINITY, |fd| libm::fabs(-quad(&fd) - target) / size);
            r.tolerance_error("d2p_identity", err, HESSIAN_TOL);
        }
    }
    r.finish("c_p", NINE_P_CONSTANT)
}
