//! The embedding function `B(X, x, w, M) = C_fun(X − x²/(w+M))` on
//! `x² ≤ Xw`, `M ≤ C_dom·w`.
//!
//! `C_fun = (1 + C_dom)²` is the least constant with `∂B/∂M ≥ x²/w²` on the
//! whole domain, since `w + M ≤ (1 + C_dom)w`.

use super::{
    hessian_rel_error, midpoint_drop, run_certificate, BellmanPoint, CertificateId,
    CertificateReport, Sampler, SamplerConfig, COMPOSITION_TOL, DEFAULT_H_REL, HESSIAN_EVERY,
    HESSIAN_TOL,
};
use crate::linalg::{symmetric_eigenvalues, DenseMatrix};
use crate::{Error, Result};

/// `(1 + C_dom)²`.
pub fn embedding_fun_constant(c_dom: f64) -> f64 {
    (1.0 + c_dom) * (1.0 + c_dom)
}

/// `C_fun(X − x²/(w+M))`.
pub fn embedding_value(c_fun: f64, p: &BellmanPoint) -> f64 {
    c_fun * (p.X - p.x * p.x / (p.w + p.M))
}

/// Closed-form Hessian in the coordinates `(X, x, w, M)`. With `s = w + M`
/// it is `−(2C/s)·uuᵀ`, `u = (0, 1, −x/s, −x/s)`.
pub fn embedding_hessian(c_fun: f64, p: &BellmanPoint) -> DenseMatrix {
    let s = p.w + p.M;
    let u = [0.0, 1.0, -p.x / s, -p.x / s];
    DenseMatrix::from_fn(4, 4, |i, j| -2.0 * c_fun / s * u[i] * u[j])
}

fn coords(p: &BellmanPoint) -> [f64; 4] {
    [p.X, p.x, p.w, p.M]
}

fn value_fn(c_fun: f64) -> impl Fn(&[f64]) -> Option<f64> {
    move |c: &[f64]| (c[2] + c[3] > 0.0).then(|| c_fun * (c[0] - c[1] * c[1] / (c[2] + c[3])))
}

/// Relative mismatch of the composition rule
/// `d²Q = JᵀH_B J + ∂B/∂M · M'' e_w e_wᵀ` for `Q(X, x, w) = B(X, x, w, M(w))`
/// with the quadratic `M(w') = M + m1(w' − w) + m2(w' − w)²`; the left side
/// by finite differences.
pub fn composition_error(c_fun: f64, p: &BellmanPoint, m1: f64, m2: f64) -> Result<f64> {
    let (w0, m0) = (p.w, p.M);
    let q = move |c: &[f64]| {
        let dw = c[2] - w0;
        let s = c[2] + m0 + m1 * dw + m2 * dw * dw;
        (s > 0.0).then(|| c_fun * (c[0] - c[1] * c[1] / s))
    };
    let base = [p.X, p.x, p.w];
    let fd = super::fd_hessian(q, &base, DEFAULT_H_REL)?;
    let hb = embedding_hessian(c_fun, p);
    // columns of J: dX, dx, dw (+ m1 dM)
    let jac = |a: usize, i: usize| -> f64 {
        match (a, i) {
            (3, 2) => m1,
            (a, i) if a == i => 1.0,
            _ => 0.0,
        }
    };
    let s = p.w + p.M;
    let b_m = c_fun * p.x * p.x / (s * s);
    let rhs = DenseMatrix::from_fn(3, 3, |i, j| {
        let mut v = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                v += jac(a, i) * hb.get(a, b) * jac(b, j);
            }
        }
        if i == 2 && j == 2 {
            v += b_m * 2.0 * m2;
        }
        v
    });
    let value = q(&base).ok_or(Error::Domain("composition undefined at the point"))?;
    Ok(hessian_rel_error(&fd, &rhs, &base, value))
}

/// Certificate with `C_fun = (1 + C_dom)²`.
pub fn cert_embedding(c_dom: f64, cfg: &SamplerConfig) -> Result<CertificateReport> {
    cert_embedding_with(c_dom, embedding_fun_constant(c_dom), cfg)
}

/// Certificate with an explicit `C_fun`; too small a value is a
/// configuration error carrying the required minimum.
pub fn cert_embedding_with(
    c_dom: f64,
    c_fun: f64,
    cfg: &SamplerConfig,
) -> Result<CertificateReport> {
    run_certificate(CertificateId::Embedding { c_dom, c_fun }, cfg)
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

pub(super) fn run(
    id: CertificateId,
    c_dom: f64,
    c_fun: f64,
    s: &mut Sampler,
    n: usize,
) -> CertificateReport {
    let mut r = CertificateReport::new(id, 0, &["bounds", "dbdm", "nsd", "drop_chain"]);
    r.constant_min("gamma_required", 1.0);
    let b = |p: &BellmanPoint| embedding_value(c_fun, p);
    for k in 0..n {
        let [t0, t1] = s.triple_pair();
        let (am, ap) = (point(s, t0, c_dom), point(s, t1, c_dom));
        let mut a = BellmanPoint::midpoint(&am, &ap);
        let h = s.slack() * (c_dom * a.w - a.M).max(0.0);
        a.M += h;

        let scale = c_fun * a.X;
        let value = b(&a);
        r.margin("bounds", value.min(scale - value) / scale, &a);
        let sm = a.w + a.M;
        let dbdm = if a.x == 0.0 {
            0.0
        } else {
            c_fun * a.w * a.w / (sm * sm) - 1.0
        };
        r.margin("dbdm", dbdm, &a);

        let hess = embedding_hessian(c_fun, &a);
        let c = coords(&a);
        let dhd = DenseMatrix::from_fn(4, 4, |i, j| c[i] * hess.get(i, j) * c[j]);
        let size = dhd.data().iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v))) + libm::fabs(value);
        let top = symmetric_eigenvalues(&dhd).map_or(f64::NAN, |ev| ev[ev.len() - 1]);
        r.margin("nsd", -top / size, &a);

        let drop = midpoint_drop(b, &a, &am, &ap).unwrap_or(f64::NAN);
        let rhs = a.x * a.x / (a.w * a.w) * h;
        r.margin("drop_chain", (drop - rhs) / scale, &a);
        if rhs > 1e-6 * scale {
            r.constant_min("gamma", drop / rhs);
        }

        if k % HESSIAN_EVERY == 0 {
            // Hessians are compared at interior points: M off its zero bound
            let hp = BellmanPoint {
                M: a.M.max(1e-3 * c_dom * a.w),
                ..a
            };
            let hc = coords(&hp);
            r.hessian_check(
                "hessian",
                value_fn(c_fun),
                &hc,
                &embedding_hessian(c_fun, &hp),
                HESSIAN_TOL,
            );
            let m1 = hp.M / hp.w * s.between(-1.0, 1.0);
            let m2 = hp.M / (hp.w * hp.w) * s.between(-1.0, 1.0);
            let err = composition_error(c_fun, &hp, m1, m2).unwrap_or(f64::INFINITY);
            r.tolerance_error("composition", err, COMPOSITION_TOL);
        }
    }
    r.finish("gamma", 1.0)
}
