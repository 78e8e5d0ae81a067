//! Weighted operator norms as spectral norms of finite matrices, the
//! supremum over sign patterns, and the sign-averaging identity.
//!
//! An operator `T: L²(w^{-1}) → L²(v)` is realized through the substitution
//! `f = w^{1/2} φ`: its norm is the norm of `φ ↦ v^{1/2} T(w^{1/2} φ)` on
//! plain `L²`. In orthonormal leaf coordinates (`√(2^-N)` times the leaf
//! values) that is a plain matrix whose spectral norm is the answer.

use alloc::vec;
use alloc::vec::Vec;

use crate::conditions::{cond_12, cond_13, joint_a2};
use crate::dyadic::{
    alpha_coefficients, haar_function, AlphaCoefficients, DyadicIndex, DyadicModel, IntervalMap,
    LeafFunction, Weight,
};
use crate::linalg::{power_iteration, top_singular_value, DenseMatrix, PowerIteration};
use crate::operators::{apply_t_sigma, square_function_local, SearchMode, SignPattern};
use crate::rng::{coin, seeded};
use crate::{Error, Result};

/// Largest depth for dense matrix assembly.
pub const MAX_NORM_DEPTH: u32 = 10;

/// Largest number of signs enumerated exhaustively.
pub const EXHAUSTIVE_CAP: usize = 20;

/// Which operator to realize.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorSpec {
    TSigma(SignPattern),
    T0,
    /// The square function, through the linear map
    /// `f ↦ (|⟨f⟩_{I₋} − ⟨f⟩_{I₊}| ⟨v⟩_I^{1/2} |I|^{1/2})_I`, which has the same
    /// norm as `S`.
    Square,
    /// `f ↦ (⟨f w^{1/2}⟩_I α_I^{1/2})_I` into `ℓ²`; `f` ranges over plain `L²`.
    Embedding(AlphaCoefficients),
    /// The rank-one piece `f ↦ (f, h_I) h_I`.
    HaarProjection(DyadicIndex),
}

/// A weighted operator as a dense matrix in orthonormal coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    pub matrix: DenseMatrix,
    pub domain_weight: Option<Weight>,
    pub codomain_weight: Option<Weight>,
    /// Weight factors are folded into the entries, so the operator norm is
    /// the plain spectral norm.
    pub absorbed: bool,
}

impl OperatorMatrix {
    /// An unweighted matrix.
    pub fn plain(matrix: DenseMatrix) -> Self {
        OperatorMatrix {
            matrix,
            domain_weight: None,
            codomain_weight: None,
            absorbed: true,
        }
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    /// The adjoint `L²(v^{-1}) → L²(w)`: the transpose, weight roles swapped.
    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix {
            matrix: self.matrix.transpose(),
            domain_weight: self.codomain_weight.clone(),
            codomain_weight: self.domain_weight.clone(),
            absorbed: self.absorbed,
        }
    }
}

fn ensure_norm_depth(model: DyadicModel) -> Result<()> {
    if model.depth() > MAX_NORM_DEPTH {
        return Err(Error::Capacity {
            size: model.leaf_count(),
            cap: 1 << MAX_NORM_DEPTH,
        });
    }
    Ok(())
}

/// Haar vectors scaled into orthonormal coordinates: row `I` holds
/// `√(2^-N) h_I(j)` times the weight factor `√u_j`.
fn scaled_haar(model: DyadicModel, u: &[f64]) -> Vec<Vec<f64>> {
    let d = libm::sqrt(model.leaf_measure());
    model
        .internal()
        .map(|i| {
            let h = haar_function(i, model).expect("internal");
            h.values()
                .iter()
                .zip(u)
                .map(|(h, u)| d * h * libm::sqrt(*u))
                .collect()
        })
        .collect()
}

pub fn assemble(op: &OperatorSpec, v: &Weight, w: &Weight) -> Result<OperatorMatrix> {
    let model = v.model();
    model.ensure_same(w.model())?;
    ensure_norm_depth(model)?;
    let n = model.leaf_count();
    let d = model.leaf_measure();
    let (sv, sw): (Vec<f64>, Vec<f64>) = (
        v.values().iter().map(|x| libm::sqrt(*x)).collect(),
        w.values().iter().map(|x| libm::sqrt(*x)).collect(),
    );
    let matrix = match op {
        OperatorSpec::TSigma(sigma) => {
            model.ensure_same(sigma.model())?;
            let hv = scaled_haar(model, v.values());
            let hw = scaled_haar(model, w.values());
            let mut m = DenseMatrix::zeros(n, n);
            for (k, i) in model.internal().enumerate() {
                add_rank_one(&mut m, sigma.get(i), &hv[k], &hw[k]);
            }
            m
        }
        OperatorSpec::HaarProjection(idx) => {
            model.ensure_internal(*idx)?;
            let hv = scaled_haar(model, v.values());
            let hw = scaled_haar(model, w.values());
            let mut m = DenseMatrix::zeros(n, n);
            add_rank_one(&mut m, 1.0, &hv[idx.heap()], &hw[idx.heap()]);
            m
        }
        OperatorSpec::T0 => {
            let alpha = alpha_coefficients(v, w)?;
            let mut m = DenseMatrix::zeros(n, n);
            for i in model.internal() {
                let c = d * alpha.get(i) / (i.len() * i.len());
                if c == 0.0 {
                    continue;
                }
                let r = i.leaf_range(model.depth());
                for x in r.clone() {
                    for y in r.clone() {
                        m.add_to(x, y, c * sv[x] * sw[y]);
                    }
                }
            }
            m
        }
        OperatorSpec::Square => {
            let hw = scaled_haar(model, w.values());
            let mut m = DenseMatrix::zeros(model.internal_count(), n);
            for (k, i) in model.internal().enumerate() {
                let c = 2.0 * libm::sqrt(v.average(i));
                for j in 0..n {
                    m.set(k, j, c * hw[k][j]);
                }
            }
            m
        }
        OperatorSpec::Embedding(alpha) => {
            model.ensure_same(alpha.model())?;
            let sd = libm::sqrt(d);
            let mut m = DenseMatrix::zeros(model.internal_count(), n);
            for (k, i) in model.internal().enumerate() {
                let c = libm::sqrt(alpha.get(i)) * sd / i.len();
                for j in i.leaf_range(model.depth()) {
                    m.set(k, j, c * sw[j]);
                }
            }
            m
        }
    };
    let weighted = !matches!(op, OperatorSpec::Embedding(_));
    Ok(OperatorMatrix {
        matrix,
        domain_weight: Some(w.clone()),
        codomain_weight: weighted.then(|| v.clone()),
        absorbed: true,
    })
}

fn add_rank_one(m: &mut DenseMatrix, s: f64, u: &[f64], w: &[f64]) {
    for (i, ui) in u.iter().enumerate() {
        if *ui == 0.0 {
            continue;
        }
        for (j, wj) in w.iter().enumerate() {
            m.add_to(i, j, s * ui * wj);
        }
    }
}

/// Largest singular value (power iteration, relative tolerance `1e-12`,
/// cap `10^5` iterations).
pub fn spectral_norm(m: &OperatorMatrix) -> Result<f64> {
    top_singular_value(&m.matrix, PowerIteration::default())
}

/// Outcome of a supremum search over sign patterns.
#[derive(Clone, Debug, PartialEq)]
pub struct SignSearchResult {
    pub lower_bound: f64,
    /// The exact supremum, known only in exhaustive mode.
    pub upper_bound: Option<f64>,
    pub best_sigma: SignPattern,
    pub mode: SearchMode,
    pub evaluations: u64,
    pub seed: Option<u64>,
}

/// Rank-one pieces of `M_v^{1/2} T_σ M_w^{1/2}` with a running sum, so a
/// single sign flip costs one rank-one update.
struct SignedSum {
    hv: Vec<Vec<f64>>,
    hw: Vec<Vec<f64>>,
    matrix: DenseMatrix,
    signs: Vec<i8>,
    warm: Option<Vec<f64>>,
}

impl SignedSum {
    fn new(v: &Weight, w: &Weight) -> Self {
        let model = v.model();
        let n = model.leaf_count();
        SignedSum {
            hv: scaled_haar(model, v.values()),
            hw: scaled_haar(model, w.values()),
            matrix: DenseMatrix::zeros(n, n),
            signs: vec![0; model.internal_count()],
            warm: None,
        }
    }

    fn load(&mut self, signs: &[i8]) {
        let n = self.matrix.rows();
        self.matrix = DenseMatrix::zeros(n, n);
        for k in 0..signs.len() {
            add_rank_one(&mut self.matrix, signs[k] as f64, &self.hv[k], &self.hw[k]);
        }
        self.signs.copy_from_slice(signs);
    }

    fn flip(&mut self, k: usize) {
        let s = -2.0 * self.signs[k] as f64;
        add_rank_one(&mut self.matrix, s, &self.hv[k], &self.hw[k]);
        self.signs[k] = -self.signs[k];
    }

    fn norm(&mut self) -> Result<f64> {
        let (s, q) = power_iteration(
            &self.matrix,
            self.warm.as_deref(),
            PowerIteration::default(),
        )?;
        self.warm = Some(q);
        Ok(s)
    }
}

/// Relative gap below which two sign patterns count as tied.
const TIE_REL: f64 = 1e-12;

/// `sup_σ ‖M_v^{1/2} T_σ M_w^{1/2}‖`, exactly or as a lower bound.
///
/// Ties (within `1e-12` relative) keep the pattern with the smallest
/// enumeration index.
pub fn sup_sign_norm(v: &Weight, w: &Weight, mode: SearchMode) -> Result<SignSearchResult> {
    let model = v.model();
    model.ensure_same(w.model())?;
    ensure_norm_depth(model)?;
    let m = model.internal_count();
    let mut sum = SignedSum::new(v, w);
    match mode {
        SearchMode::Exhaustive => {
            if m > EXHAUSTIVE_CAP {
                return Err(Error::Capacity {
                    size: m,
                    cap: EXHAUSTIVE_CAP,
                });
            }
            sum.load(SignPattern::all_plus(model).signs());
            let (mut best, mut best_bits) = (sum.norm()?, 0u64);
            for step in 1u64..1 << m {
                // Gray code: pattern `g` differs from its predecessor in one sign
                let g = step ^ (step >> 1);
                if step % 1024 == 0 {
                    // bound the drift of the running rank-one sum
                    sum.load(SignPattern::from_bits(model, g).signs());
                } else {
                    sum.flip(step.trailing_zeros() as usize);
                }
                let val = sum.norm()?;
                // values within TIE_REL of the best are ties; the smaller index wins
                let tie = libm::fabs(val - best) <= TIE_REL * best;
                if (val > best && !tie) || (tie && g < best_bits) {
                    best_bits = g;
                }
                best = best.max(val);
            }
            Ok(SignSearchResult {
                lower_bound: best,
                upper_bound: Some(best),
                best_sigma: SignPattern::from_bits(model, best_bits),
                mode,
                evaluations: 1 << m,
                seed: None,
            })
        }
        SearchMode::Sampled { n, seed } => {
            let mut rng = seeded(seed, 0);
            let mut best: Option<(f64, Vec<i8>)> = None;
            for _ in 0..n.max(1) {
                let signs: Vec<i8> = (0..m)
                    .map(|_| if coin(&mut rng, 0.5) { -1 } else { 1 })
                    .collect();
                sum.load(&signs);
                let val = sum.norm()?;
                if best.as_ref().map_or(true, |(b, _)| val > *b) {
                    best = Some((val, signs));
                }
            }
            let (val, signs) = best.expect("at least one sample");
            Ok(SignSearchResult {
                lower_bound: val,
                upper_bound: None,
                best_sigma: SignPattern::from_signs(model, signs)?,
                mode,
                evaluations: n.max(1),
                seed: Some(seed),
            })
        }
        SearchMode::Greedy { restarts, seed } => {
            let mut rng = seeded(seed, 1);
            let mut best: Option<(f64, Vec<i8>)> = None;
            let mut evaluations = 0u64;
            for _ in 0..restarts.max(1) {
                let signs: Vec<i8> = (0..m)
                    .map(|_| if coin(&mut rng, 0.5) { -1 } else { 1 })
                    .collect();
                sum.load(&signs);
                let mut cur = sum.norm()?;
                evaluations += 1;
                loop {
                    let mut improved = false;
                    for k in 0..m {
                        sum.flip(k);
                        let val = sum.norm()?;
                        evaluations += 1;
                        if val > cur * (1.0 + 1e-12) {
                            cur = val;
                            improved = true;
                        } else {
                            sum.flip(k);
                        }
                    }
                    if !improved {
                        break;
                    }
                }
                if best.as_ref().map_or(true, |(b, _)| cur > *b) {
                    best = Some((cur, sum.signs.clone()));
                }
            }
            let (val, signs) = best.expect("at least one restart");
            Ok(SignSearchResult {
                lower_bound: val,
                upper_bound: None,
                best_sigma: SignPattern::from_signs(model, signs)?,
                mode,
                evaluations,
                seed: Some(seed),
            })
        }
    }
}

/// Norm of `M_v^{1/2} T_σ M_w^{1/2}` for one pattern.
pub fn t_sigma_norm(sigma: &SignPattern, v: &Weight, w: &Weight) -> Result<f64> {
    spectral_norm(&assemble(&OperatorSpec::TSigma(sigma.clone()), v, w)?)
}

/// Both sides of `E_σ ∫|T_σ g|² v = Σ_I (g, h_I)² ⟨v⟩_I`, the left side
/// averaged exactly over every pattern.
pub fn sign_average_identity(g: &LeafFunction, v: &Weight) -> Result<(f64, f64)> {
    let model = g.model();
    model.ensure_same(v.model())?;
    let m = model.internal_count();
    if m > EXHAUSTIVE_CAP {
        return Err(Error::Capacity {
            size: m,
            cap: EXHAUSTIVE_CAP,
        });
    }
    let mut lhs = 0.0;
    for bits in 0..1u64 << m {
        let t = apply_t_sigma(g, &SignPattern::from_bits(model, bits))?;
        lhs += t.weighted_norm_sq(v)?;
    }
    lhs /= (1u64 << m) as f64;
    let c = crate::dyadic::haar_coefficients(g);
    let rhs = c.iter().map(|(i, c)| c * c * v.average(i)).sum();
    Ok((lhs, rhs))
}

/// Norm of `T₀: L²(w^{-1}) → L²(v)`.
pub fn t0_norm(v: &Weight, w: &Weight) -> Result<f64> {
    spectral_norm(&assemble(&OperatorSpec::T0, v, w)?)
}

/// Norm of `S: L²(w^{-1}) → L²(v)`.
pub fn square_function_norm(v: &Weight, w: &Weight) -> Result<f64> {
    spectral_norm(&assemble(&OperatorSpec::Square, v, w)?)
}

/// Squared norm `E` of the embedding `f ↦ (⟨f w^{1/2}⟩_I α_I^{1/2})_I`.
pub fn embedding_norm_sq(w: &Weight, alpha: &AlphaCoefficients) -> Result<f64> {
    let e = spectral_norm(&assemble(&OperatorSpec::Embedding(alpha.clone()), w, w)?)?;
    Ok(e * e)
}

/// Per-`J` square-function testing values
/// `(1/(|J|⟨w⟩_J)) ∫_J S_J(χ_J w)² v`, with `S_J` summing over `I ⊆ J`.
pub fn square_function_testing(v: &Weight, w: &Weight) -> Result<IntervalMap<f64>> {
    let model = v.model();
    model.ensure_same(w.model())?;
    Ok(IntervalMap::from_fn_internal(model, |j| {
        let s = square_function_local(&w.base().restrict(j), j);
        let mass = s.weighted_norm_sq(v).expect("same model");
        mass / (j.len() * w.average(j))
    }))
}

/// The explicit bound on `sup_σ ‖M_v^{1/2} T_σ M_w^{1/2}‖` assembled from
/// the four sums: `√A₂ + √cond₁₂ + √cond₁₃ + ‖T₀‖/4`.
///
/// `Σ₁` is bounded by `sup (x^v_I x^w_I)^{-1} ≤ √A₂`; `Σ₂`, `Σ₃` by the
/// dyadic Carleson embedding (constant 4) applied with
/// `α_I = ⟨v⟩_I Δw² |I| / (4⟨w⟩_I²)`, whose testing constant is `cond₁₂/4`;
/// `Σ₄` is a quarter of the positive `T₀` form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainBound {
    pub a2: f64,
    pub cond12: f64,
    pub cond13: f64,
    pub t0_norm: f64,
    pub bound: f64,
}

pub fn four_sum_chain_bound(v: &Weight, w: &Weight) -> Result<ChainBound> {
    let a2 = joint_a2(v, w)?.constant;
    let c12 = cond_12(v, w)?.constant;
    let c13 = cond_13(v, w)?.constant;
    let t0 = t0_norm(v, w)?;
    Ok(ChainBound {
        a2,
        cond12: c12,
        cond13: c13,
        t0_norm: t0,
        bound: libm::sqrt(a2) + libm::sqrt(c12) + libm::sqrt(c13) + t0 / 4.0,
    })
}
