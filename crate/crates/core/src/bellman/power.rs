//! The power-type Bellman functions on `D = {x, y ≥ 0, xy ≤ 1}`:
//! `(xy)^α` for `α < 1/2` and `(xy)^{1/2} − ¼(xy)^α` for `α > 1/2`.
//!
//! Required constants follow the proof's own chain: along the segment
//! `t ∈ [−1/2, 1/2]` the point stays within `[x/2, 3x/2] × [y/2, 3y/2]`, and
//! `∫_{−1/2}^{1/2} (1 − |t|) dt = 3/4`.

use super::{
    run_certificate, BellmanPoint, CertificateId, CertificateReport, Sampler, SamplerConfig,
    HESSIAN_EVERY, HESSIAN_TOL,
};
use crate::linalg::DenseMatrix;
use crate::Result;

const GRID_STEPS: i32 = 200;
const TINY_PRODUCT: f64 = 1e-8;

/// `1 − ½{[(1−λ)(1−μ)]^α + [(1+λ)(1+μ)]^α}`.
pub fn lhs_46(alpha: f64, lambda: f64, mu: f64) -> f64 {
    1.0 - 0.5
        * (libm::pow((1.0 - lambda) * (1.0 - mu), alpha)
            + libm::pow((1.0 + lambda) * (1.0 + mu), alpha))
}

/// Constant of the `λ, μ` inequality guaranteed by the Hessian bound:
/// `¾·α(1−2α)(4/9)^{1−α}`.
pub fn small_alpha_constant(alpha: f64) -> f64 {
    0.75 * alpha * (1.0 - 2.0 * alpha) * libm::pow(4.0 / 9.0, 1.0 - alpha)
}

/// Constant of the drop `≥ c (xy)^α |Δx/x| |Δy/y|` for `α > 1/2`:
/// `(3/64)·α(2α−1)(9/4)^{α−1}`.
pub fn large_alpha_constant(alpha: f64) -> f64 {
    3.0 / 64.0 * alpha * (2.0 * alpha - 1.0) * libm::pow(9.0 / 4.0, alpha - 1.0)
}

pub fn alpha_small_value(alpha: f64, x: f64, y: f64) -> f64 {
    libm::pow(x * y, alpha)
}

pub fn alpha_large_value(alpha: f64, x: f64, y: f64) -> f64 {
    libm::sqrt(x * y) - 0.25 * libm::pow(x * y, alpha)
}

/// Hessian of `(xy)^β` at `x, y > 0`.
pub fn power_hessian(beta: f64, x: f64, y: f64) -> [[f64; 2]; 2] {
    let b = beta * libm::pow(x * y, beta);
    let off = b * beta / (x * y);
    [
        [b * (beta - 1.0) / (x * x), off],
        [off, b * (beta - 1.0) / (y * y)],
    ]
}

/// Hessian of `(xy)^{1/2} − ¼(xy)^α`.
pub fn alpha_large_hessian(alpha: f64, x: f64, y: f64) -> [[f64; 2]; 2] {
    let (h, g) = (power_hessian(0.5, x, y), power_hessian(alpha, x, y));
    core::array::from_fn(|i| core::array::from_fn(|j| h[i][j] - 0.25 * g[i][j]))
}

fn form(h: [[f64; 2]; 2], xi: f64, eta: f64) -> f64 {
    h[0][0] * xi * xi + 2.0 * h[0][1] * xi * eta + h[1][1] * eta * eta
}

fn matrix(h: [[f64; 2]; 2]) -> DenseMatrix {
    DenseMatrix::from_fn(2, 2, |i, j| h[i][j])
}

/// Minimum of `lhs_46/|λμ|` over the `0.01` grid of `[−1, 1]²` (`λμ ≠ 0`).
pub fn c_alpha_grid(alpha: f64) -> f64 {
    let mut best = f64::INFINITY;
    grid(|l, m| {
        if l != 0.0 && m != 0.0 {
            best = best.min(lhs_46(alpha, l, m) / libm::fabs(l * m));
        }
    });
    best
}

fn grid(mut f: impl FnMut(f64, f64)) {
    let step = |i: i32| f64::from(i - GRID_STEPS / 2) / f64::from(GRID_STEPS / 2);
    for i in 0..=GRID_STEPS {
        for j in 0..=GRID_STEPS {
            f(step(i), step(j));
        }
    }
}

/// Certificate for `(xy)^α`, `α ∈ (0, 1/2)`.
pub fn cert_alpha_small(alpha: f64, cfg: &SamplerConfig) -> Result<CertificateReport> {
    run_certificate(CertificateId::AlphaSmall { alpha }, cfg)
}

/// Certificate for `(xy)^{1/2} − ¼(xy)^α`, `α ∈ (1/2, 1]`.
pub fn cert_alpha_large(alpha: f64, cfg: &SamplerConfig) -> Result<CertificateReport> {
    run_certificate(CertificateId::AlphaLarge { alpha }, cfg)
}

/// A point of `D`; products above 1 are reflected by `(x, y) ↦ (1/y, 1/x)`.
fn power_point(s: &mut Sampler) -> (f64, f64) {
    let (mut x, mut y) = (s.coord(), s.coord());
    if x * y > 1.0 {
        (x, y) = (1.0 / y, 1.0 / x);
    }
    if s.boundary() {
        let r = libm::sqrt(x * y);
        (x, y) = (x / r, y / r);
    }
    (x, y)
}

/// `λ, μ` with `((1±λ)x, (1±μ)y) ∈ D`, by rejection with fallback `μ = −λ`.
fn admissible(s: &mut Sampler, x: f64, y: f64) -> (f64, f64) {
    let scale = if s.coin(0.5) {
        1.0
    } else {
        s.log_between(1e-4, 1.0)
    };
    let p = x * y;
    for _ in 0..64 {
        let (l, m) = (scale * s.between(-1.0, 1.0), scale * s.between(-1.0, 1.0));
        if (1.0 + l) * (1.0 + m) * p <= 1.0 && (1.0 - l) * (1.0 - m) * p <= 1.0 {
            return (l, m);
        }
    }
    let l = scale * s.between(-1.0, 1.0);
    (l, -l)
}

struct Triple {
    a: BellmanPoint,
    minus: BellmanPoint,
    plus: BellmanPoint,
    lambda: f64,
    mu: f64,
}

fn triple(s: &mut Sampler) -> Triple {
    let (x, y) = power_point(s);
    let (lambda, mu) = admissible(s, x, y);
    Triple {
        a: BellmanPoint::xy(x, y),
        minus: BellmanPoint::xy((1.0 - lambda) * x, (1.0 - mu) * y),
        plus: BellmanPoint::xy((1.0 + lambda) * x, (1.0 + mu) * y),
        lambda,
        mu,
    }
}

fn quadrant(f: impl Fn(f64, f64) -> f64) -> impl Fn(&[f64]) -> Option<f64> {
    move |p: &[f64]| (p[0] >= 0.0 && p[1] >= 0.0).then(|| f(p[0], p[1]))
}

pub(super) fn run_small(
    id: CertificateId,
    alpha: f64,
    s: &mut Sampler,
    n: usize,
    first: bool,
) -> CertificateReport {
    let mut r = CertificateReport::new(id, 0, &["grid_46", "bounds", "hessian_segment", "drop_44"]);
    let c_req = small_alpha_constant(alpha);
    let c_hess = c_req / 0.75;
    r.constant_min("c_alpha_required", c_req);
    if first {
        grid(|l, m| {
            let lhs = lhs_46(alpha, l, m);
            // failures record (λ, μ) in the (x, y) slots
            let p = BellmanPoint::xy(l, m);
            r.margin("grid_46", lhs - c_req * libm::fabs(l * m), &p);
            if l != 0.0 && m != 0.0 {
                r.constant_min("c_alpha_grid", lhs / libm::fabs(l * m));
            }
        });
    }
    let b = |p: &BellmanPoint| alpha_small_value(alpha, p.x, p.y);
    for k in 0..n {
        let t = triple(s);
        let (x, y) = (t.a.x, t.a.y);
        let scale = b(&t.a);
        let lm = libm::fabs(t.lambda * t.mu);
        r.margin("bounds", b(&t.a).min(scale - b(&t.a)) / scale, &t.a);

        let drop = super::midpoint_drop(b, &t.a, &t.minus, &t.plus).unwrap_or(f64::NAN);
        r.margin("drop_44", (drop - c_req * scale * lm) / scale, &t.a);
        if lm > TINY_PRODUCT {
            r.constant_min("c_alpha_drop", drop / (scale * lm));
        }

        let (xi, eta) = (t.lambda * x, t.mu * y);
        let tt = s.between(-0.5, 0.5);
        let hq = form(power_hessian(alpha, x + tt * xi, y + tt * eta), xi, eta);
        let weight = libm::fabs(xi * eta) * libm::pow(x * y, alpha - 1.0);
        r.margin("hessian_segment", (-c_hess * weight - hq) / scale, &t.a);
        if lm > TINY_PRODUCT {
            r.constant_min("c_hessian", -hq / weight);
        }

        if k % HESSIAN_EVERY == 0 {
            let f = quadrant(|x, y| alpha_small_value(alpha, x, y));
            r.hessian_check(
                "hessian",
                f,
                &[x, y],
                &matrix(power_hessian(alpha, x, y)),
                HESSIAN_TOL,
            );
        }
    }
    r.constant_min("c_hessian_required", c_hess);
    r.finish("c_alpha_grid", c_req)
}

pub(super) fn run_large(
    id: CertificateId,
    alpha: f64,
    s: &mut Sampler,
    n: usize,
) -> CertificateReport {
    let mut r = CertificateReport::new(
        id,
        0,
        &[
            "bounds_47",
            "hessian_pointwise",
            "hessian_segment",
            "drop_48",
        ],
    );
    let c_req = large_alpha_constant(alpha);
    let c_hess = c_req * 16.0 / 3.0;
    r.constant_min("c_alpha_required", c_req);
    r.constant_min("c_hessian_required", c_hess);
    let b = |p: &BellmanPoint| alpha_large_value(alpha, p.x, p.y);
    for k in 0..n {
        let t = triple(s);
        let (x, y) = (t.a.x, t.a.y);
        let p = x * y;
        let scale = libm::sqrt(p);
        let value = b(&t.a);
        r.margin("bounds_47", value.min(scale - value) / scale, &t.a);

        let (xi, eta) = (t.lambda * x, t.mu * y);
        let gap = alpha * (2.0 * alpha - 1.0) * libm::pow(p, alpha - 0.5);
        let hq = form(alpha_large_hessian(alpha, x, y), xi, eta);
        let bound = -0.25 * gap * scale * libm::fabs(xi * eta) / p;
        r.margin("hessian_pointwise", (bound - hq) / scale, &t.a);

        let tt = s.between(-0.5, 0.5);
        let hq = form(
            alpha_large_hessian(alpha, x + tt * xi, y + tt * eta),
            xi,
            eta,
        );
        let weight = libm::fabs(xi * eta) * libm::pow(p, alpha - 1.0);
        r.margin("hessian_segment", (-c_hess * weight - hq) / scale, &t.a);

        let lm = libm::fabs(t.lambda * t.mu);
        if lm > TINY_PRODUCT {
            r.constant_min("c_hessian", -hq / weight);
        }
        let drop = super::midpoint_drop(b, &t.a, &t.minus, &t.plus).unwrap_or(f64::NAN);
        let rhs_unit = libm::pow(p, alpha) * 4.0 * lm;
        r.margin("drop_48", (drop - c_req * rhs_unit) / scale, &t.a);
        if lm > TINY_PRODUCT {
            r.constant_min("c_alpha_drop", drop / rhs_unit);
        }

        if k % HESSIAN_EVERY == 0 {
            let f = quadrant(|x, y| alpha_large_value(alpha, x, y));
            let h = matrix(alpha_large_hessian(alpha, x, y));
            r.hessian_check("hessian", f, &[x, y], &h, HESSIAN_TOL);
        }
    }
    r.finish("c_alpha_drop", c_req)
}
