//! Best constants, with attaining intervals, for the necessary and
//! sufficient testing conditions.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::dyadic::{
    alpha_coefficients, haar_coefficients, AlphaCoefficients, DyadicIndex, DyadicModel,
    IntervalMap, LeafFunction, Weight,
};
use crate::norms::EXHAUSTIVE_CAP;
use crate::operators::SearchMode;
use crate::rng::{coin, seeded};
use crate::{Error, Result};

/// Subtrees with at most this many intervals are enumerated exhaustively
/// whatever the requested mode.
pub const EXHAUSTIVE_SWITCH: usize = 12;

/// Which condition a report belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConditionId {
    JointA2,
    Cond12,
    Cond13,
    SawyerTSigmaFirst,
    SawyerTSigmaSecond,
    SawyerT0First,
    SawyerT0Second,
    Carleson,
    SigmaK(u32),
    SigmaAggregate,
    Lemma33,
    Bump,
    Fkp,
    Doubling,
    EmbeddingTesting,
    SquareTesting,
}

impl ConditionId {
    pub fn name(self) -> &'static str {
        match self {
            ConditionId::JointA2 => "joint_a2",
            ConditionId::Cond12 => "cond_12",
            ConditionId::Cond13 => "cond_13",
            ConditionId::SawyerTSigmaFirst => "sawyer_tsigma_first",
            ConditionId::SawyerTSigmaSecond => "sawyer_tsigma_second",
            ConditionId::SawyerT0First => "sawyer_t0_first",
            ConditionId::SawyerT0Second => "sawyer_t0_second",
            ConditionId::Carleson => "carleson",
            ConditionId::SigmaK(_) => "sigma_k",
            ConditionId::SigmaAggregate => "sigma_aggregate",
            ConditionId::Lemma33 => "lemma33",
            ConditionId::Bump => "bump",
            ConditionId::Fkp => "fkp",
            ConditionId::Doubling => "doubling",
            ConditionId::EmbeddingTesting => "embedding_testing",
            ConditionId::SquareTesting => "square_testing",
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionId::SigmaK(k) => write!(f, "sigma_k[{k}]"),
            other => f.write_str(other.name()),
        }
    }
}

/// The best constant of one condition and where it is attained.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub name: ConditionId,
    pub constant: f64,
    pub witness: DyadicIndex,
    pub per_interval: Option<IntervalMap<f64>>,
}

impl ConditionReport {
    /// Maximum of `map`; ties go to the smallest level, then position.
    pub fn from_map(name: ConditionId, map: IntervalMap<f64>) -> Self {
        let (mut constant, mut witness) = (f64::NEG_INFINITY, DyadicIndex::ROOT);
        for (i, &v) in map.iter() {
            if v > constant {
                constant = v;
                witness = i;
            }
        }
        if map.is_empty() {
            constant = 0.0;
        }
        ConditionReport {
            name,
            constant,
            witness,
            per_interval: Some(map),
        }
    }
}

/// Sums of `term` over every internal subtree: entry `J` is `Σ_{I ⊆ J} term_I`.
fn subtree_sums(model: DyadicModel, term: impl Fn(DyadicIndex) -> f64) -> IntervalMap<f64> {
    let m = model.internal_count();
    let mut s = vec![0.0; m];
    for h in (0..m).rev() {
        let i = DyadicIndex::from_heap(h);
        let mut acc = term(i);
        if 2 * h + 2 < m {
            acc += s[2 * h + 1] + s[2 * h + 2];
        }
        s[h] = acc;
    }
    IntervalMap::internal(model, s).expect("internal count")
}

/// `sup_I ⟨v⟩_I ⟨w⟩_I` over all intervals, leaves included.
pub fn joint_a2(v: &Weight, w: &Weight) -> Result<ConditionReport> {
    v.model().ensure_same(w.model())?;
    let map = IntervalMap::from_fn_all(v.model(), |i| v.average(i) * w.average(i));
    Ok(ConditionReport::from_map(ConditionId::JointA2, map))
}

fn cond_generic(name: ConditionId, v: &Weight, w: &Weight) -> Result<ConditionReport> {
    v.model().ensure_same(w.model())?;
    let sums = subtree_sums(v.model(), |i| {
        let d = w.average(i.left()) - w.average(i.right());
        d * d * v.average(i) * i.len()
    });
    let map = sums.map(|j, s| s / (j.len() * w.average(j)));
    Ok(ConditionReport::from_map(name, map))
}

/// `sup_J (1/(|J|⟨w⟩_J)) Σ_{I ⊆ J} |⟨w⟩_{I₋} − ⟨w⟩_{I₊}|² ⟨v⟩_I |I|`.
pub fn cond_12(v: &Weight, w: &Weight) -> Result<ConditionReport> {
    cond_generic(ConditionId::Cond12, v, w)
}

/// `cond_12` with the weights swapped.
pub fn cond_13(v: &Weight, w: &Weight) -> Result<ConditionReport> {
    cond_generic(ConditionId::Cond13, w, v)
}

/// How a per-interval testing value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EvalMode {
    Exhaustive,
    Sampled,
    Greedy,
}

/// A multiplier testing report with per-interval provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct TestingReport {
    pub report: ConditionReport,
    pub modes: IntervalMap<EvalMode>,
    pub evaluations: u64,
}

/// The quadratic form `σ ↦ Σ_{a,b} σ_a σ_b G_ab` of one subtree, stored
/// as diagonal plus ancestor pairs (the only nonzero off-diagonal entries).
struct SubtreeForm {
    diag_sum: f64,
    /// Per local interval: `(other, G_ab)` for every related `b ≠ a`.
    related: Vec<Vec<(usize, f64)>>,
}

impl SubtreeForm {
    /// Gram matrix of `c_I h_I` (`c_I = (u, h_I)`) in `L²(v)` over `I ⊆ j`.
    fn new(model: DyadicModel, j: DyadicIndex, c: &IntervalMap<f64>, v: &Weight) -> Self {
        let nodes: Vec<DyadicIndex> = model.subtree(j).collect();
        let vh = haar_coefficients(v.base());
        let mut related = vec![Vec::new(); nodes.len()];
        let mut diag_sum = 0.0;
        let local = |i: DyadicIndex| {
            // heap order inside the subtree
            let rel = i.level() - j.level();
            ((1usize << rel) - 1) + (i.pos() - (j.pos() << rel)) as usize
        };
        for (a, &ia) in nodes.iter().enumerate() {
            diag_sum += c[ia] * c[ia] * v.average(ia);
            let mut anc = ia;
            while anc != j {
                let parent = anc.parent().expect("inside j");
                // ∫ h_a h_b v with h_b constant on the half of b holding a
                let hb = if parent.left() == anc { 1.0 } else { -1.0 } / libm::sqrt(parent.len());
                let g = c[ia] * c[parent] * hb * vh[ia];
                let b = local(parent);
                related[a].push((b, g));
                related[b].push((a, g));
                anc = parent;
            }
        }
        SubtreeForm { diag_sum, related }
    }

    fn len(&self) -> usize {
        self.related.len()
    }

    /// `r_a = Σ_b σ_b G_ab` for the current signs.
    fn fields(&self, signs: &[i8]) -> Vec<f64> {
        self.related
            .iter()
            .map(|row| row.iter().map(|&(b, g)| signs[b] as f64 * g).sum())
            .collect()
    }

    fn value(&self, signs: &[i8], fields: &[f64]) -> f64 {
        self.diag_sum
            + signs
                .iter()
                .zip(fields)
                .map(|(s, r)| *s as f64 * r)
                .sum::<f64>()
    }

    /// Flips sign `a`; returns the change of the form.
    fn flip(&self, signs: &mut [i8], fields: &mut [f64], a: usize) -> f64 {
        let s = signs[a] as f64;
        let delta = -4.0 * s * fields[a];
        for &(b, g) in &self.related[a] {
            fields[b] -= 2.0 * s * g;
        }
        signs[a] = -signs[a];
        delta
    }

    fn exhaustive(&self) -> (f64, u64) {
        let m = self.len();
        let mut signs = vec![1i8; m];
        let mut fields = self.fields(&signs);
        let mut value = self.value(&signs, &fields);
        let mut best = value;
        for step in 1u64..1 << m {
            if step % 1024 == 0 {
                let g = step ^ (step >> 1);
                signs = (0..m)
                    .map(|i| if g >> i & 1 == 1 { -1 } else { 1 })
                    .collect();
                fields = self.fields(&signs);
                value = self.value(&signs, &fields);
            } else {
                value += self.flip(&mut signs, &mut fields, step.trailing_zeros() as usize);
            }
            best = best.max(value);
        }
        (best, 1 << m)
    }

    fn sampled(&self, n: u64, seed: u64) -> (f64, u64) {
        let mut rng = seeded(seed, 0);
        let mut best = f64::NEG_INFINITY;
        for _ in 0..n.max(1) {
            let signs: Vec<i8> = (0..self.len())
                .map(|_| if coin(&mut rng, 0.5) { -1 } else { 1 })
                .collect();
            best = best.max(self.value(&signs, &self.fields(&signs)));
        }
        (best, n.max(1))
    }

    fn greedy(&self, restarts: u32, seed: u64) -> (f64, u64) {
        let mut rng = seeded(seed, 1);
        let (mut best, mut evals) = (f64::NEG_INFINITY, 0u64);
        for _ in 0..restarts.max(1) {
            let mut signs: Vec<i8> = (0..self.len())
                .map(|_| if coin(&mut rng, 0.5) { -1 } else { 1 })
                .collect();
            let mut fields = self.fields(&signs);
            let mut value = self.value(&signs, &fields);
            evals += 1;
            loop {
                let mut improved = false;
                for a in 0..self.len() {
                    evals += 1;
                    // flipping `a` changes the form by −4 σ_a r_a
                    if -4.0 * signs[a] as f64 * fields[a] > 1e-12 * libm::fabs(value) {
                        value += self.flip(&mut signs, &mut fields, a);
                        improved = true;
                    }
                }
                if !improved {
                    break;
                }
            }
            best = best.max(value);
        }
        (best, evals)
    }
}

fn tsigma_one(
    name: ConditionId,
    v: &Weight,
    w: &Weight,
    mode: SearchMode,
) -> Result<TestingReport> {
    let model = v.model();
    model.ensure_same(w.model())?;
    if mode == SearchMode::Exhaustive && model.internal_count() > EXHAUSTIVE_CAP {
        return Err(Error::Capacity {
            size: model.internal_count(),
            cap: EXHAUSTIVE_CAP,
        });
    }
    let c = haar_coefficients(w.base());
    let mut values = Vec::with_capacity(model.internal_count());
    let mut modes = Vec::with_capacity(model.internal_count());
    let mut evaluations = 0;
    for j in model.internal() {
        let form = SubtreeForm::new(model, j, &c, v);
        let stream = j.heap() as u64;
        let small = form.len() <= EXHAUSTIVE_SWITCH;
        let ((val, evals), used) = match mode {
            SearchMode::Exhaustive => (form.exhaustive(), EvalMode::Exhaustive),
            _ if small => (form.exhaustive(), EvalMode::Exhaustive),
            SearchMode::Sampled { n, seed } => (
                form.sampled(n, crate::derive_seed(seed, stream)),
                EvalMode::Sampled,
            ),
            SearchMode::Greedy { restarts, seed } => (
                form.greedy(restarts, crate::derive_seed(seed, stream)),
                EvalMode::Greedy,
            ),
        };
        evaluations += evals;
        values.push(val.max(0.0) / (j.len() * w.average(j)));
        modes.push(used);
    }
    Ok(TestingReport {
        report: ConditionReport::from_map(name, IntervalMap::internal(model, values)?),
        modes: IntervalMap::internal(model, modes)?,
        evaluations,
    })
}

/// `sup_σ (1/(|J|⟨w⟩_J)) ∫_J |T_σ(χ_J w)|² v` per internal `J`, with the
/// multiplier summed over `I ⊆ J`; the second report swaps `v` and `w`.
pub fn sawyer_tsigma_test(
    v: &Weight,
    w: &Weight,
    mode: SearchMode,
) -> Result<(TestingReport, TestingReport)> {
    Ok((
        tsigma_one(ConditionId::SawyerTSigmaFirst, v, w, mode)?,
        tsigma_one(ConditionId::SawyerTSigmaSecond, w, v, mode)?,
    ))
}

fn t0_one(name: ConditionId, v: &Weight, w: &Weight, alpha: &AlphaCoefficients) -> ConditionReport {
    let model = v.model();
    let n = model.depth();
    let d = model.leaf_measure();
    let mut mass = vec![0.0; model.internal_count()];
    for k in 0..model.leaf_count() {
        // suffix sums along the tower of leaf k, deepest interval first
        let mut acc = 0.0;
        for level in (0..n).rev() {
            let i = DyadicIndex::new(level, (k >> (n - level)) as u64).expect("valid");
            acc += w.average(i) * alpha.get(i) / i.len();
            mass[i.heap()] += d * acc * acc * v.values()[k];
        }
    }
    let map = IntervalMap::from_fn_internal(model, |j| mass[j.heap()] / (j.len() * w.average(j)));
    ConditionReport::from_map(name, map)
}

/// `(1/(|J|⟨w⟩_J)) ∫_J (Σ_{I ⊆ J} |I|^{-1} χ_I ⟨w⟩_I α_I)² v` and its
/// `(v, w)`-swapped twin.
pub fn sawyer_t0_test(v: &Weight, w: &Weight) -> Result<(ConditionReport, ConditionReport)> {
    v.model().ensure_same(w.model())?;
    let alpha = alpha_coefficients(v, w)?;
    Ok((
        t0_one(ConditionId::SawyerT0First, v, w, &alpha),
        t0_one(ConditionId::SawyerT0Second, w, v, &alpha),
    ))
}

/// `sup_J (1/|J|) Σ_{I ⊆ J} β_I` over internal `J`.
pub fn carleson_norm(beta: &IntervalMap<f64>) -> Result<ConditionReport> {
    carleson_named(ConditionId::Carleson, beta)
}

fn carleson_named(name: ConditionId, beta: &IntervalMap<f64>) -> Result<ConditionReport> {
    let model = beta.model();
    if beta.includes_leaves() {
        return Err(Error::InvalidLength {
            expected: model.internal_count(),
            found: beta.len(),
        });
    }
    if beta.values().iter().any(|b| !(*b >= 0.0)) {
        return Err(Error::Domain("Carleson weights must be nonnegative"));
    }
    let sums = subtree_sums(model, |i| beta[i]);
    Ok(ConditionReport::from_map(
        name,
        sums.map(|j, s| s / j.len()),
    ))
}

/// Joint rescaling `v/√A₂`, `w/√A₂` so that `sup ⟨v⟩⟨w⟩ = 1`; returns the
/// factor `A₂` too.
pub fn normalize_pair(v: &Weight, w: &Weight) -> Result<(Weight, Weight, f64)> {
    let a2 = joint_a2(v, w)?.constant;
    let s = 1.0 / libm::sqrt(a2);
    Ok((v.scaled(s)?, w.scaled(s)?, a2))
}

/// The partition of internal intervals by `q^{k+1} < ⟨v⟩_I⟨w⟩_I ≤ q^k`
/// after normalization, with `β_I = |Δv/⟨v⟩| |Δw/⟨w⟩| |I|`.
#[derive(Clone, Debug, PartialEq)]
pub struct CarlesonFamily {
    pub q: f64,
    /// The `A₂` constant divided out by the normalization.
    pub scale: f64,
    pub family: IntervalMap<u32>,
    pub beta: IntervalMap<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaKReport {
    pub families: CarlesonFamily,
    /// `‖σ_k‖_C` for `k = 0..=max k`.
    pub per_k: Vec<ConditionReport>,
    /// Carleson norm of `Σ_k q^{k/4} σ_k`.
    pub aggregate: ConditionReport,
}

fn family_index(p: f64, q: f64) -> u32 {
    let mut k = libm::floor(libm::log(p) / libm::log(q)).max(0.0) as i32;
    while k > 0 && p > libm::pow(q, k as f64) {
        k -= 1;
    }
    while p <= libm::pow(q, (k + 1) as f64) {
        k += 1;
    }
    k as u32
}

pub fn sigma_k_families(v: &Weight, w: &Weight, q: f64) -> Result<SigmaKReport> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain("q must lie in (0, 1)"));
    }
    let (vn, wn, a2) = normalize_pair(v, w)?;
    let model = v.model();
    let alpha = alpha_coefficients(&vn, &wn)?;
    let family = IntervalMap::from_fn_internal(model, |i| {
        family_index((vn.average(i) * wn.average(i)).min(1.0), q)
    });
    let beta = alpha.map().clone();
    let max_k = family.values().iter().copied().max().unwrap_or(0);
    let mut per_k = Vec::with_capacity(max_k as usize + 1);
    for k in 0..=max_k {
        let bk = beta.map(|i, b| if family[i] == k { *b } else { 0.0 });
        per_k.push(carleson_named(ConditionId::SigmaK(k), &bk)?);
    }
    let agg = beta.map(|i, b| libm::pow(q, family[i] as f64 / 4.0) * b);
    let aggregate = carleson_named(ConditionId::SigmaAggregate, &agg)?;
    Ok(SigmaKReport {
        families: CarlesonFamily {
            q,
            scale: a2,
            family,
            beta,
        },
        per_k,
        aggregate,
    })
}

/// `sup_J (1/|J|) Σ_{I ⊆ J} (⟨v⟩_I⟨w⟩_I)^a β_I / (⟨v⟩_J⟨w⟩_J)^{min(a, 1/2)}`
/// for the normalized pair.
pub fn lemma33_constant(v: &Weight, w: &Weight, a: f64) -> Result<ConditionReport> {
    if !(a > 0.0 && a <= 1.0) || a == 0.5 {
        return Err(Error::Domain(
            "exponent must lie in (0, 1] and differ from 1/2",
        ));
    }
    let (vn, wn, _) = normalize_pair(v, w)?;
    let alpha = alpha_coefficients(&vn, &wn)?;
    let p = |i: DyadicIndex| vn.average(i) * wn.average(i);
    let sums = subtree_sums(v.model(), |i| libm::pow(p(i), a) * alpha.get(i));
    let map = sums.map(|j, s| s / (j.len() * libm::pow(p(j), a.min(0.5))));
    Ok(ConditionReport::from_map(ConditionId::Lemma33, map))
}

/// `sup_I ⟨v^{1+η}⟩_I ⟨w^{1+η}⟩_I` over all intervals.
pub fn bump_condition(v: &Weight, w: &Weight, eta: f64) -> Result<ConditionReport> {
    if !(eta > 0.0) {
        return Err(Error::Domain("bump exponent must be positive"));
    }
    v.model().ensure_same(w.model())?;
    let pv = v.base().map(|x| libm::pow(x, 1.0 + eta)).averages();
    let pw = w.base().map(|x| libm::pow(x, 1.0 + eta)).averages();
    let map = IntervalMap::from_fn_all(v.model(), |i| pv[i] * pw[i]);
    Ok(ConditionReport::from_map(ConditionId::Bump, map))
}

/// `sup_J (1/(|J|⟨u⟩_J)) Σ_{I ⊆ J} ⟨u⟩_I (Δu/⟨u⟩_I)² |I|`.
pub fn fkp_condition(u: &Weight) -> Result<ConditionReport> {
    let sums = subtree_sums(u.model(), |i| {
        let s = u.split(i);
        u.average(i) * s * s * i.len()
    });
    Ok(ConditionReport::from_map(
        ConditionId::Fkp,
        sums.map(|j, s| s / (j.len() * u.average(j))),
    ))
}

/// `sup_I ⟨u⟩_I / min(⟨u⟩_{I₋}, ⟨u⟩_{I₊})`, a dyadic doubling proxy.
pub fn doubling_constant(u: &Weight) -> Result<ConditionReport> {
    let map = IntervalMap::from_fn_internal(u.model(), |i| {
        u.average(i) / u.average(i.left()).min(u.average(i.right()))
    });
    Ok(ConditionReport::from_map(ConditionId::Doubling, map))
}

/// Testing constant of the embedding `Σ ⟨f w^{1/2}⟩_I² α_I ≤ C ‖f‖²` on
/// `f = χ_J w^{1/2}`: `sup_J (1/(|J|⟨w⟩_J)) Σ_{I ⊆ J} ⟨w⟩_I² α_I`.
pub fn embedding_testing(w: &Weight, alpha: &AlphaCoefficients) -> Result<ConditionReport> {
    w.model().ensure_same(alpha.model())?;
    let sums = subtree_sums(w.model(), |i| w.average(i) * w.average(i) * alpha.get(i));
    Ok(ConditionReport::from_map(
        ConditionId::EmbeddingTesting,
        sums.map(|j, s| s / (j.len() * w.average(j))),
    ))
}

/// Brute-force value of the multiplier testing quantity for one pattern
/// and one `J`, straight from the definition. Used as an oracle.
pub fn tsigma_testing_value(
    v: &Weight,
    w: &Weight,
    j: DyadicIndex,
    signs_in_subtree: &[i8],
) -> Result<f64> {
    let model = v.model();
    let nodes: Vec<DyadicIndex> = model.subtree(j).collect();
    if signs_in_subtree.len() != nodes.len() {
        return Err(Error::InvalidLength {
            expected: nodes.len(),
            found: signs_in_subtree.len(),
        });
    }
    let f = w.base().restrict(j);
    let c = haar_coefficients(&f);
    let t = crate::operators::synthesize(model, |i| {
        nodes
            .iter()
            .position(|&n| n == i)
            .map_or(0.0, |k| signs_in_subtree[k] as f64 * c[i])
    });
    let t: LeafFunction = t.restrict(j);
    Ok(t.weighted_norm_sq(v)? / (j.len() * w.average(j)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(n: u32) -> DyadicModel {
        DyadicModel::new(n).unwrap()
    }

    fn wt(m: DyadicModel, v: &[f64]) -> Weight {
        Weight::from_values(m, v.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        libm::fabs(a - b) <= tol * (1.0 + libm::fabs(b))
    }

    fn pair() -> (Weight, Weight) {
        let m = model(1);
        (wt(m, &[2.0, 1.0]), wt(m, &[1.0, 3.0]))
    }

    #[test]
    fn joint_a2_examples() {
        let one = Weight::constant(model(3), 1.0).unwrap();
        let r = joint_a2(&one, &one).unwrap();
        assert_eq!((r.constant, r.witness), (1.0, DyadicIndex::ROOT));
        let (v, w) = pair();
        let r = joint_a2(&v, &w).unwrap();
        assert_eq!((r.constant, r.witness), (3.0, DyadicIndex::ROOT));
        let r2 = joint_a2(&v.scaled(2.5).unwrap(), &w).unwrap();
        assert!(close(r2.constant, 7.5, 1e-15));
    }

    #[test]
    fn cond_12_examples() {
        let (v, w) = pair();
        assert!(close(cond_12(&v, &w).unwrap().constant, 3.0, 1e-15));
        let one = Weight::constant(model(1), 1.0).unwrap();
        assert_eq!(cond_12(&v, &one).unwrap().constant, 0.0);
        let m = model(3);
        let w = Weight::new(LeafFunction::from_fn(m, |i| 1.0 + (i * 7 % 5) as f64)).unwrap();
        let v = Weight::new(LeafFunction::from_fn(m, |i| 0.5 + (i * 3 % 4) as f64)).unwrap();
        let c = cond_12(&v, &w).unwrap().constant;
        let c2 = cond_12(&v, &w.scaled(2.0).unwrap()).unwrap().constant;
        assert!(close(c2, 2.0 * c, 1e-13));
        assert_eq!(
            cond_13(&v, &w).unwrap().constant,
            cond_12(&w, &v).unwrap().constant
        );
    }

    #[test]
    fn sawyer_tsigma_trivial() {
        let m = model(3);
        let one = Weight::constant(m, 1.0).unwrap();
        let v = Weight::new(LeafFunction::from_fn(m, |i| 1.0 + i as f64)).unwrap();
        let (a, _) = sawyer_tsigma_test(&v, &one, SearchMode::Exhaustive).unwrap();
        assert_eq!(a.report.constant, 0.0);
        let (a, b) = sawyer_tsigma_test(&one, &one, SearchMode::Exhaustive).unwrap();
        assert_eq!((a.report.constant, b.report.constant), (0.0, 0.0));
    }

    #[test]
    fn sawyer_tsigma_matches_enumeration() {
        let m = model(2);
        let w = wt(m, &[1.0, 3.0, 2.0, 2.0]);
        let v = wt(m, &[2.0, 1.0, 1.0, 1.0]);
        let (a, _) = sawyer_tsigma_test(&v, &w, SearchMode::Exhaustive).unwrap();
        let mut best = 0.0f64;
        for bits in 0..8u32 {
            let s: Vec<i8> = (0..3)
                .map(|i| if bits >> i & 1 == 1 { -1 } else { 1 })
                .collect();
            best = best.max(tsigma_testing_value(&v, &w, DyadicIndex::ROOT, &s).unwrap());
        }
        let root = a.report.per_interval.as_ref().unwrap()[DyadicIndex::ROOT];
        assert!(close(root, best, 1e-13));
        assert!(a.modes.values().iter().all(|m| *m == EvalMode::Exhaustive));
    }

    #[test]
    fn sawyer_tsigma_capacity_and_modes() {
        let m = model(5);
        let w = Weight::new(LeafFunction::from_fn(m, |i| 1.0 + (i % 7) as f64)).unwrap();
        assert!(matches!(
            sawyer_tsigma_test(&w, &w, SearchMode::Exhaustive),
            Err(Error::Capacity { .. })
        ));
        let (a, _) = sawyer_tsigma_test(
            &w,
            &w,
            SearchMode::Greedy {
                restarts: 2,
                seed: 1,
            },
        )
        .unwrap();
        assert_eq!(a.modes[DyadicIndex::ROOT], EvalMode::Greedy);
        assert_eq!(a.modes[DyadicIndex::new(1, 0).unwrap()], EvalMode::Greedy);
        assert_eq!(
            a.modes[DyadicIndex::new(2, 0).unwrap()],
            EvalMode::Exhaustive
        );
    }

    #[test]
    fn sawyer_t0_examples() {
        let (v, w) = pair();
        let (a, _) = sawyer_t0_test(&v, &w).unwrap();
        assert!(close(a.constant, 4.0 / 3.0, 1e-14));
        let m = model(3);
        let x = Weight::new(LeafFunction::from_fn(m, |i| 1.0 + i as f64)).unwrap();
        let y = Weight::new(LeafFunction::from_fn(m, |i| 2.0 + (i * 5 % 3) as f64)).unwrap();
        let (_, second) = sawyer_t0_test(&x, &y).unwrap();
        let (swapped, _) = sawyer_t0_test(&y, &x).unwrap();
        assert!(close(second.constant, swapped.constant, 1e-14));
        let c = Weight::constant(m, 3.0).unwrap();
        assert_eq!(sawyer_t0_test(&c, &x).unwrap().0.constant, 0.0);
    }

    #[test]
    fn carleson_examples() {
        let m = model(4);
        let zero = IntervalMap::from_fn_internal(m, |_| 0.0);
        assert_eq!(carleson_norm(&zero).unwrap().constant, 0.0);
        let lens = IntervalMap::from_fn_internal(m, |i| i.len());
        let r = carleson_norm(&lens).unwrap();
        assert!(close(r.constant, 4.0, 1e-15));
        assert_eq!(r.witness, DyadicIndex::ROOT);
        let i0 = DyadicIndex::new(2, 1).unwrap();
        let one = IntervalMap::from_fn_internal(m, |i| if i == i0 { 0.3 } else { 0.0 });
        let r = carleson_norm(&one).unwrap();
        assert!(close(r.constant, 0.3 / i0.len(), 1e-15));
        assert_eq!(r.witness, i0);
        let neg = IntervalMap::from_fn_internal(m, |i| if i == i0 { -1.0 } else { 0.0 });
        assert!(carleson_norm(&neg).is_err());
    }

    #[test]
    fn sigma_k_examples() {
        let m = model(3);
        let c = Weight::constant(m, 1.0).unwrap();
        let r = sigma_k_families(&c, &c, 0.5).unwrap();
        assert!(r.per_k.iter().all(|x| x.constant == 0.0));
        assert!(r.families.family.values().iter().all(|k| *k == 0));
        assert!(sigma_k_families(&c, &c, 1.0).is_err());
        assert_eq!(family_index(0.5, 0.5), 1);
        assert_eq!(family_index(1.0, 0.5), 0);
        assert_eq!(family_index(0.25, 0.5), 2);
        assert_eq!(family_index(0.3, 0.5), 1);
    }

    #[test]
    fn lemma33_examples() {
        let (v, w) = pair();
        let r = lemma33_constant(&v, &w, 0.25).unwrap();
        assert!(close(r.constant, 2.0 / 3.0, 1e-14));
        assert!(lemma33_constant(&v, &w, 0.5).is_err());
        let one = Weight::constant(model(1), 1.0).unwrap();
        assert_eq!(lemma33_constant(&one, &w, 0.75).unwrap().constant, 0.0);
    }

    #[test]
    fn bump_examples() {
        let (v, w) = pair();
        assert!(close(
            bump_condition(&v, &w, 1.0).unwrap().constant,
            12.5,
            1e-14
        ));
        let one = Weight::constant(model(2), 1.0).unwrap();
        assert_eq!(bump_condition(&one, &one, 0.3).unwrap().constant, 1.0);
        assert!(bump_condition(&v, &w, 0.0).is_err());
        let near = bump_condition(&v, &w, 1e-9).unwrap().constant;
        assert!(close(near, joint_a2(&v, &w).unwrap().constant, 1e-7));
    }

    #[test]
    fn fkp_and_doubling_examples() {
        let m = model(1);
        let u = wt(m, &[1.0, 3.0]);
        assert!(close(fkp_condition(&u).unwrap().constant, 1.0, 1e-15));
        assert!(close(
            fkp_condition(&u.scaled(7.0).unwrap()).unwrap().constant,
            1.0,
            1e-14
        ));
        assert_eq!(
            fkp_condition(&Weight::constant(m, 2.0).unwrap())
                .unwrap()
                .constant,
            0.0
        );
        assert_eq!(doubling_constant(&u).unwrap().constant, 2.0);
        assert_eq!(
            doubling_constant(&Weight::constant(m, 5.0).unwrap())
                .unwrap()
                .constant,
            1.0
        );
        let big = wt(m, &[1.0, 1e6]);
        assert!(close(
            doubling_constant(&big).unwrap().constant,
            500_000.5,
            1e-12
        ));
    }

    #[test]
    fn ties_prefer_smallest_interval_index() {
        let m = model(2);
        let map = IntervalMap::from_fn_internal(m, |i| if i.level() == 1 { 2.0 } else { 1.0 });
        let r = ConditionReport::from_map(ConditionId::Carleson, map);
        assert_eq!(r.witness, DyadicIndex::new(1, 0).unwrap());
    }
}
