//! The operators: Haar multipliers `T_σ`, their weighted versions
//! `M_v^{1/2} T_σ M_w^{1/2}`, the positive operator `T₀`, the square
//! function, the four-sum decomposition and the embedding forms.

use alloc::vec;
use alloc::vec::Vec;

use crate::dyadic::{
    alpha_coefficients, coefficients_from_averages, disbalanced_haar, haar_coefficients,
    AlphaCoefficients, DyadicIndex, DyadicModel, LeafFunction, Weight,
};
use crate::linalg::DenseMatrix;
use crate::{Error, Result};

/// A sign `σ_I ∈ {+1, −1}` for every internal interval, in heap order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignPattern {
    model: DyadicModel,
    signs: Vec<i8>,
}

impl SignPattern {
    pub fn all_plus(model: DyadicModel) -> Self {
        SignPattern {
            model,
            signs: vec![1; model.internal_count()],
        }
    }

    /// Pattern number `bits` of the exhaustive enumeration: bit `i` set
    /// means `σ = −1` at heap index `i`.
    pub fn from_bits(model: DyadicModel, bits: u64) -> Self {
        SignPattern {
            model,
            signs: (0..model.internal_count())
                .map(|i| if i < 64 && bits >> i & 1 == 1 { -1 } else { 1 })
                .collect(),
        }
    }

    pub fn from_signs(model: DyadicModel, signs: Vec<i8>) -> Result<Self> {
        if signs.len() != model.internal_count() {
            return Err(Error::InvalidLength {
                expected: model.internal_count(),
                found: signs.len(),
            });
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::Domain("signs must be +1 or -1"));
        }
        Ok(SignPattern { model, signs })
    }

    pub fn model(&self) -> DyadicModel {
        self.model
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn get(&self, idx: DyadicIndex) -> f64 {
        self.signs[idx.heap()] as f64
    }

    pub fn flip(&mut self, heap: usize) {
        self.signs[heap] = -self.signs[heap];
    }

    pub fn negated(&self) -> Self {
        SignPattern {
            model: self.model,
            signs: self.signs.iter().map(|s| -s).collect(),
        }
    }
}

/// How a supremum over sign patterns is searched.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    /// Every pattern; exact.
    Exhaustive,
    /// `n` uniformly random patterns.
    Sampled { n: u64, seed: u64 },
    /// Coordinate ascent by single sign flips from `restarts` random starts.
    Greedy { restarts: u32, seed: u64 },
}

/// `T_σ f = Σ_I σ_I (f, h_I) h_I`.
pub fn apply_t_sigma(f: &LeafFunction, sigma: &SignPattern) -> Result<LeafFunction> {
    let model = f.model();
    model.ensure_same(sigma.model)?;
    let c = haar_coefficients(f);
    Ok(synthesize(model, |i| sigma.get(i) * c[i]))
}

/// `Σ_I d_I h_I` on the leaves.
pub(crate) fn synthesize(
    model: DyadicModel,
    mut d: impl FnMut(DyadicIndex) -> f64,
) -> LeafFunction {
    let n = model.depth();
    let mut out = vec![0.0; model.leaf_count()];
    for i in model.internal() {
        let amp = d(i) / libm::sqrt(i.len());
        if amp == 0.0 {
            continue;
        }
        for k in i.left().leaf_range(n) {
            out[k] += amp;
        }
        for k in i.right().leaf_range(n) {
            out[k] -= amp;
        }
    }
    LeafFunction::new(model, out).expect("leaf count")
}

/// `v^{1/2} · T_σ(w^{1/2} · f)`.
pub fn apply_weighted_t_sigma(
    f: &LeafFunction,
    sigma: &SignPattern,
    v: &Weight,
    w: &Weight,
) -> Result<LeafFunction> {
    let model = f.model();
    model.ensure_same(v.model())?;
    model.ensure_same(w.model())?;
    let inner = apply_t_sigma(&f.mul(&w.sqrt())?, sigma)?;
    inner.mul(&v.sqrt())
}

/// `T₀ f = Σ_I |I|^{-1} ⟨f⟩_I α_I χ_I`.
pub fn apply_t0(f: &LeafFunction, alpha: &AlphaCoefficients) -> Result<LeafFunction> {
    let model = f.model();
    model.ensure_same(alpha.model())?;
    let avg = f.averages();
    let n = model.depth();
    let mut out = vec![0.0; model.leaf_count()];
    for i in model.internal() {
        let c = avg[i] * alpha.get(i) / i.len();
        if c != 0.0 {
            for k in i.leaf_range(n) {
                out[k] += c;
            }
        }
    }
    LeafFunction::new(model, out)
}

/// The leaf-pair kernel `k(x, y) = Σ_I |I|^{-2} χ_I(x) χ_I(y) α_I`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    model: DyadicModel,
    matrix: DenseMatrix,
}

impl KernelMatrix {
    pub fn model(&self) -> DyadicModel {
        self.model
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    /// `(T₀ f)(x) = 2^-N Σ_y k(x, y) f(y)`.
    pub fn apply(&self, f: &LeafFunction) -> Result<LeafFunction> {
        self.model.ensure_same(f.model())?;
        let mut out = vec![0.0; self.model.leaf_count()];
        self.matrix.mul_vec(f.values(), &mut out);
        let d = self.model.leaf_measure();
        out.iter_mut().for_each(|v| *v *= d);
        LeafFunction::new(self.model, out)
    }
}

pub fn kernel_matrix(alpha: &AlphaCoefficients) -> KernelMatrix {
    let model = alpha.model();
    let n = model.leaf_count();
    let mut m = DenseMatrix::zeros(n, n);
    for i in model.internal() {
        let c = alpha.get(i) / (i.len() * i.len());
        if c == 0.0 {
            continue;
        }
        let r = i.leaf_range(model.depth());
        for x in r.clone() {
            for y in r.clone() {
                m.add_to(x, y, c);
            }
        }
    }
    KernelMatrix { model, matrix: m }
}

/// `S(f)(x) = (Σ_{I ∋ x} |⟨f⟩_{I₋} − ⟨f⟩_{I₊}|²)^{1/2}` over internal `I`.
pub fn square_function(f: &LeafFunction) -> LeafFunction {
    square_function_local(f, DyadicIndex::ROOT)
}

/// The square function with the sum restricted to internal `I ⊆ j`; zero
/// outside `j`.
pub fn square_function_local(f: &LeafFunction, j: DyadicIndex) -> LeafFunction {
    let model = f.model();
    let avg = f.averages();
    let mut sq = vec![0.0; model.leaf_count()];
    for i in model.subtree(j) {
        let d = avg[i.left()] - avg[i.right()];
        for k in i.leaf_range(model.depth()) {
            sq[k] += d * d;
        }
    }
    LeafFunction::new(model, sq.into_iter().map(libm::sqrt).collect()).expect("leaf count")
}

/// The four sums of the disbalanced-Haar expansion of
/// `(T_σ w^{1/2} f, v^{1/2} g)`.
///
/// `sigma1` pairs the two disbalanced coefficients (the `D_ε` part),
/// `sigma2` and `sigma3` pair one coefficient with an average (`Π_ε`,
/// `Π'_ε`), and `sigma4` pairs two averages; it equals a quarter of the
/// signed `T₀` form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourSumDecomposition {
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    pub sigma4: f64,
    pub total: f64,
}

pub fn four_sum_decomposition(
    f: &LeafFunction,
    g: &LeafFunction,
    sigma: &SignPattern,
    v: &Weight,
    w: &Weight,
) -> Result<FourSumDecomposition> {
    let model = f.model();
    for m in [g.model(), sigma.model, v.model(), w.model()] {
        model.ensure_same(m)?;
    }
    let fw = f.mul(&w.sqrt())?;
    let gv = g.mul(&v.sqrt())?;
    let (fw_avg, gv_avg) = (fw.averages(), gv.averages());
    let (fw_h, gv_h) = (
        coefficients_from_averages(&fw_avg),
        coefficients_from_averages(&gv_avg),
    );
    let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
    for i in model.internal() {
        let dw = disbalanced_haar(w, i)?;
        let dv = disbalanced_haar(v, i)?;
        let len = i.len();
        let (mf, mg) = (fw_avg[i], gv_avg[i]);
        // ∫ f w^{1/2} h^w_I and ∫ g v^{1/2} h^v_I, via x h = h^w + A χ
        let af = dw.x * fw_h[i] - dw.a * mf * len;
        let ag = dv.x * gv_h[i] - dv.a * mg * len;
        let k = sigma.get(i) / (dv.x * dw.x);
        s1 += k * ag * af;
        s2 += k * ag * mf * dw.a * len;
        s3 += k * mg * af * dv.a * len;
        s4 += k * mg * mf * dv.a * dw.a * len * len;
    }
    Ok(FourSumDecomposition {
        sigma1: s1,
        sigma2: s2,
        sigma3: s3,
        sigma4: s4,
        total: s1 + s2 + s3 + s4,
    })
}

/// `(v^{1/2} T_σ(w^{1/2} f), g)` evaluated directly.
pub fn direct_bilinear(
    f: &LeafFunction,
    g: &LeafFunction,
    sigma: &SignPattern,
    v: &Weight,
    w: &Weight,
) -> Result<f64> {
    apply_weighted_t_sigma(f, sigma, v, w)?.inner(g)
}

/// `Σ_I ⟨f w^{1/2}⟩_I² α_I`.
pub fn embedding_form(f: &LeafFunction, w: &Weight, alpha: &AlphaCoefficients) -> Result<f64> {
    f.model().ensure_same(alpha.model())?;
    let avg = f.mul(&w.sqrt())?.averages();
    Ok(alpha.map().iter().map(|(i, a)| avg[i] * avg[i] * a).sum())
}

/// `Σ_I ⟨g v^{1/2}⟩_I ⟨f w^{1/2}⟩_I α_I` with `α` derived from `(v, w)`.
pub fn bilinear_t0_form(f: &LeafFunction, g: &LeafFunction, v: &Weight, w: &Weight) -> Result<f64> {
    let alpha = alpha_coefficients(v, w)?;
    let fa = f.mul(&w.sqrt())?.averages();
    let ga = g.mul(&v.sqrt())?.averages();
    Ok(alpha.map().iter().map(|(i, a)| ga[i] * fa[i] * a).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::haar_function;

    fn model(n: u32) -> DyadicModel {
        DyadicModel::new(n).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        libm::fabs(a - b) <= tol * (1.0 + libm::fabs(b))
    }

    fn lf(m: DyadicModel, v: &[f64]) -> LeafFunction {
        LeafFunction::new(m, v.to_vec()).unwrap()
    }

    fn wt(m: DyadicModel, v: &[f64]) -> Weight {
        Weight::from_values(m, v.to_vec()).unwrap()
    }

    #[test]
    fn t_sigma_examples() {
        let m = model(3);
        let f = LeafFunction::from_fn(m, |i| i as f64 * 0.7 - 2.45);
        let out = apply_t_sigma(&f, &SignPattern::all_plus(m)).unwrap();
        let mean = f.integral();
        for (a, b) in out.values().iter().zip(f.values()) {
            assert!(close(*a, b - mean, 1e-14));
        }
        let c = LeafFunction::constant(m, 4.0);
        assert!(apply_t_sigma(&c, &SignPattern::from_bits(m, 0b1011001))
            .unwrap()
            .values()
            .iter()
            .all(|v| *v == 0.0));

        let m1 = model(1);
        let out = apply_t_sigma(&lf(m1, &[2.0, 0.0]), &SignPattern::from_bits(m1, 1)).unwrap();
        assert_eq!(out.values(), &[-1.0, 1.0]);
    }

    #[test]
    fn weighted_t_sigma_example() {
        let m = model(1);
        let out = apply_weighted_t_sigma(
            &lf(m, &[2.0, 0.0]),
            &SignPattern::from_bits(m, 1),
            &wt(m, &[4.0, 4.0]),
            &wt(m, &[1.0, 1.0]),
        )
        .unwrap();
        assert_eq!(out.values(), &[-2.0, 2.0]);
    }

    #[test]
    fn sign_flip_covariance() {
        let m = model(4);
        let f = LeafFunction::from_fn(m, |i| libm::cos(i as f64));
        let s = SignPattern::from_bits(m, 0x1234);
        let a = apply_t_sigma(&f, &s).unwrap();
        let b = apply_t_sigma(&f, &s.negated()).unwrap();
        assert!(a.values().iter().zip(b.values()).all(|(x, y)| *x == -*y));
    }

    #[test]
    fn t0_examples() {
        let m = model(1);
        let one = LeafFunction::constant(m, 1.0);
        let zero = apply_t0(&one, &AlphaCoefficients::zero(m)).unwrap();
        assert!(zero.values().iter().all(|v| *v == 0.0));
        let a = AlphaCoefficients::single(m, DyadicIndex::ROOT, 1.0).unwrap();
        assert_eq!(apply_t0(&one, &a).unwrap().values(), &[1.0, 1.0]);
    }

    #[test]
    fn kernel_examples() {
        let m = model(1);
        let k = kernel_matrix(&AlphaCoefficients::single(m, DyadicIndex::ROOT, 1.0).unwrap());
        assert_eq!(k.matrix().data(), &[1.0; 4]);
        let k0 = kernel_matrix(&AlphaCoefficients::zero(model(3)));
        assert!(k0.matrix().data().iter().all(|v| *v == 0.0));

        let m = model(3);
        let v = Weight::new(LeafFunction::from_fn(m, |i| 1.0 + (i * i % 5) as f64)).unwrap();
        let w = Weight::new(LeafFunction::from_fn(m, |i| 2.0 + (i % 3) as f64)).unwrap();
        let alpha = alpha_coefficients(&v, &w).unwrap();
        let k = kernel_matrix(&alpha);
        assert!(k.matrix().is_symmetric(0.0));
        let f = LeafFunction::from_fn(m, |i| libm::sin(i as f64 + 0.5));
        let via_k = k.apply(&f).unwrap();
        let direct = apply_t0(&f, &alpha).unwrap();
        for (a, b) in via_k.values().iter().zip(direct.values()) {
            assert!(close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn square_function_examples() {
        let m = model(1);
        assert_eq!(square_function(&lf(m, &[1.0, -1.0])).values(), &[2.0, 2.0]);
        let c = square_function(&LeafFunction::constant(model(4), 3.0));
        assert!(c.values().iter().all(|v| *v == 0.0));
        let m = model(3);
        let f = LeafFunction::from_fn(m, |i| (i as f64 - 3.0) * 0.25);
        let (s, s3) = (square_function(&f), square_function(&f.scale(-3.0)));
        for (a, b) in s.values().iter().zip(s3.values()) {
            assert!(close(*b, 3.0 * a, 1e-14));
        }
    }

    #[test]
    fn four_sum_balanced_weights() {
        let m = model(3);
        let one = Weight::constant(m, 1.0).unwrap();
        let f = LeafFunction::from_fn(m, |i| libm::sin(i as f64));
        let g = LeafFunction::from_fn(m, |i| libm::cos(2.0 * i as f64));
        let s = SignPattern::from_bits(m, 0b0110101);
        let d = four_sum_decomposition(&f, &g, &s, &one, &one).unwrap();
        assert_eq!((d.sigma2, d.sigma3, d.sigma4), (0.0, 0.0, 0.0));
        let direct = apply_t_sigma(&f, &s).unwrap().inner(&g).unwrap();
        assert!(close(d.sigma1, direct, 1e-13));
    }

    #[test]
    fn four_sum_depth_two_example() {
        let m = model(2);
        let w = wt(m, &[1.0, 3.0, 2.0, 2.0]);
        let v = wt(m, &[2.0, 1.0, 1.0, 1.0]);
        let f = lf(m, &[0.3, -1.2, 2.0, 0.7]);
        let g = lf(m, &[1.1, 0.4, -0.6, 1.9]);
        for bits in 0..8 {
            let s = SignPattern::from_bits(m, bits);
            let d = four_sum_decomposition(&f, &g, &s, &v, &w).unwrap();
            let direct = direct_bilinear(&f, &g, &s, &v, &w).unwrap();
            assert!(libm::fabs(d.total - direct) <= 1e-12 * (1.0 + libm::fabs(direct)));
        }
        let zero = LeafFunction::zero(m);
        let d = four_sum_decomposition(&zero, &g, &SignPattern::all_plus(m), &v, &w).unwrap();
        assert_eq!(d.total, 0.0);
    }

    #[test]
    fn sigma4_is_quarter_t0_form_for_plus_signs() {
        let m = model(3);
        let w = Weight::new(LeafFunction::from_fn(m, |i| 1.0 + i as f64)).unwrap();
        let v = Weight::new(LeafFunction::from_fn(m, |i| 9.0 - i as f64)).unwrap();
        let f = LeafFunction::from_fn(m, |i| 1.0 + 0.1 * i as f64);
        let g = LeafFunction::constant(m, 1.0);
        // with σ chosen as the sign of Δv·Δw every term of Σ₄ is positive
        let signs = m
            .internal()
            .map(|i| {
                if v.split(i) * w.split(i) >= 0.0 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        let s = SignPattern::from_signs(m, signs).unwrap();
        let d = four_sum_decomposition(&f, &g, &s, &v, &w).unwrap();
        let t0 = bilinear_t0_form(&f, &g, &v, &w).unwrap();
        assert!(close(d.sigma4, t0 / 4.0, 1e-13));
    }

    #[test]
    fn embedding_form_examples() {
        let m = model(1);
        let one = Weight::constant(m, 1.0).unwrap();
        let f = LeafFunction::constant(m, 1.0);
        let a = AlphaCoefficients::single(m, DyadicIndex::ROOT, 1.0).unwrap();
        assert_eq!(embedding_form(&f, &one, &a).unwrap(), 1.0);
        assert_eq!(
            embedding_form(&f, &one, &AlphaCoefficients::zero(m)).unwrap(),
            0.0
        );
        assert!(close(
            embedding_form(&f.scale(2.0), &one, &a).unwrap(),
            4.0,
            1e-15
        ));
    }

    #[test]
    fn bilinear_t0_examples() {
        let m = model(1);
        let w = wt(m, &[1.0, 3.0]);
        let v = wt(m, &[2.0, 1.0]);
        let one = LeafFunction::constant(m, 1.0);
        let expected = (libm::sqrt(2.0) + 1.0) / 2.0 * (1.0 + libm::sqrt(3.0)) / 2.0 * (2.0 / 3.0);
        assert!(close(
            bilinear_t0_form(&one, &one, &v, &w).unwrap(),
            expected,
            1e-14
        ));

        let f = lf(m, &[0.5, 2.0]);
        let same = bilinear_t0_form(&f, &f, &w, &w).unwrap();
        let alpha = alpha_coefficients(&w, &w).unwrap();
        assert!(close(same, embedding_form(&f, &w, &alpha).unwrap(), 1e-14));
        let c = Weight::constant(m, 2.0).unwrap();
        assert_eq!(bilinear_t0_form(&f, &f, &c, &w).unwrap(), 0.0);
    }

    #[test]
    fn haar_synthesis_inverts_coefficients() {
        let m = model(4);
        let f = LeafFunction::from_fn(m, |i| libm::sin(0.9 * i as f64));
        let c = haar_coefficients(&f);
        let back = synthesize(m, |i| c[i]);
        let mean = f.integral();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!(close(*a + mean, *b, 1e-13));
        }
        assert!(close(
            haar_function(DyadicIndex::ROOT, m).unwrap().integral(),
            0.0,
            1e-15
        ));
    }
}
