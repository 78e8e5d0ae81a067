//! Dyadic intervals of `[0, 1)`, leaf-constant functions, weights and the
//! (disbalanced) Haar bases.
//!
//! Intervals are stored in heap order: the interval `(level, pos)` has heap
//! index `2^level - 1 + pos`, so the `2^N - 1` internal intervals come first
//! and the `2^N` leaves follow.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, Range};

use crate::{Error, Result};

/// Largest supported tree depth.
pub const MAX_DEPTH: u32 = 24;

/// Smallest admissible weight value.
pub const WEIGHT_FLOOR: f64 = 1e-9;

/// The dyadic interval `[pos·2^-level, (pos+1)·2^-level)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicIndex {
    level: u32,
    pos: u64,
}

impl DyadicIndex {
    pub const ROOT: DyadicIndex = DyadicIndex { level: 0, pos: 0 };

    pub fn new(level: u32, pos: u64) -> Result<Self> {
        if level > MAX_DEPTH || pos >= 1u64 << level {
            return Err(Error::InvalidIndex { level, pos });
        }
        Ok(DyadicIndex { level, pos })
    }

    pub fn level(self) -> u32 {
        self.level
    }

    pub fn pos(self) -> u64 {
        self.pos
    }

    /// The left half `I₋`.
    pub fn left(self) -> Self {
        DyadicIndex {
            level: self.level + 1,
            pos: 2 * self.pos,
        }
    }

    /// The right half `I₊`.
    pub fn right(self) -> Self {
        DyadicIndex {
            level: self.level + 1,
            pos: 2 * self.pos + 1,
        }
    }

    pub fn parent(self) -> Option<Self> {
        (self.level > 0).then(|| DyadicIndex {
            level: self.level - 1,
            pos: self.pos / 2,
        })
    }

    /// Lebesgue measure `|I| = 2^-level`.
    pub fn len(self) -> f64 {
        libm::ldexp(1.0, -(self.level as i32))
    }

    pub fn start(self) -> f64 {
        self.pos as f64 * self.len()
    }

    pub fn end(self) -> f64 {
        (self.pos + 1) as f64 * self.len()
    }

    pub fn heap(self) -> usize {
        ((1usize << self.level) - 1) + self.pos as usize
    }

    pub fn from_heap(heap: usize) -> Self {
        let level = usize::BITS - 1 - (heap + 1).leading_zeros();
        DyadicIndex {
            level,
            pos: (heap + 1 - (1usize << level)) as u64,
        }
    }

    /// True when `other ⊆ self`.
    pub fn contains(self, other: DyadicIndex) -> bool {
        other.level >= self.level && other.pos >> (other.level - self.level) == self.pos
    }

    /// Range of leaf indices covered by `self` in a model of depth `depth`.
    pub fn leaf_range(self, depth: u32) -> Range<usize> {
        let shift = depth - self.level;
        let start = (self.pos << shift) as usize;
        start..start + (1usize << shift)
    }
}

/// A dyadic tree truncated at depth `N`; leaves have level `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DyadicModel {
    depth: u32,
}

impl DyadicModel {
    pub fn new(depth: u32) -> Result<Self> {
        if depth == 0 || depth > MAX_DEPTH {
            return Err(Error::InvalidDepth(depth));
        }
        Ok(DyadicModel { depth })
    }

    pub fn depth(self) -> u32 {
        self.depth
    }

    pub fn leaf_count(self) -> usize {
        1usize << self.depth
    }

    /// `2^-N`.
    pub fn leaf_measure(self) -> f64 {
        libm::ldexp(1.0, -(self.depth as i32))
    }

    /// Number of intervals carrying a Haar function, `2^N - 1`.
    pub fn internal_count(self) -> usize {
        self.leaf_count() - 1
    }

    /// Number of intervals including leaves, `2^(N+1) - 1`.
    pub fn interval_count(self) -> usize {
        2 * self.leaf_count() - 1
    }

    pub fn is_internal(self, idx: DyadicIndex) -> bool {
        idx.level < self.depth
    }

    /// Internal intervals in heap order.
    pub fn internal(self) -> impl Iterator<Item = DyadicIndex> {
        (0..self.internal_count()).map(DyadicIndex::from_heap)
    }

    /// All intervals, leaves included, in heap order.
    pub fn intervals(self) -> impl Iterator<Item = DyadicIndex> {
        (0..self.interval_count()).map(DyadicIndex::from_heap)
    }

    /// The leaf interval holding leaf `i`.
    pub fn leaf(self, i: usize) -> DyadicIndex {
        DyadicIndex {
            level: self.depth,
            pos: i as u64,
        }
    }

    /// Internal intervals `I ⊆ j`, level by level.
    pub fn subtree(self, j: DyadicIndex) -> impl Iterator<Item = DyadicIndex> {
        (j.level..self.depth).flat_map(move |level| {
            let shift = level - j.level;
            (j.pos << shift..(j.pos + 1) << shift).map(move |pos| DyadicIndex { level, pos })
        })
    }

    /// Number of internal intervals inside `j`.
    pub fn subtree_len(self, j: DyadicIndex) -> usize {
        (1usize << (self.depth - j.level)) - 1
    }

    pub(crate) fn ensure_same(self, other: DyadicModel) -> Result<()> {
        if self.depth != other.depth {
            return Err(Error::ModelMismatch {
                expected: self.depth,
                found: other.depth,
            });
        }
        Ok(())
    }

    pub(crate) fn ensure_internal(self, idx: DyadicIndex) -> Result<()> {
        if idx.level >= self.depth {
            return Err(Error::InvalidIndex {
                level: idx.level,
                pos: idx.pos,
            });
        }
        Ok(())
    }
}

/// Values attached to intervals in heap order, either internal intervals
/// only or all intervals including leaves.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalMap<T> {
    model: DyadicModel,
    values: Vec<T>,
}

impl<T> IntervalMap<T> {
    /// Map over the internal intervals from heap-ordered values.
    pub fn internal(model: DyadicModel, values: Vec<T>) -> Result<Self> {
        if values.len() != model.internal_count() {
            return Err(Error::InvalidLength {
                expected: model.internal_count(),
                found: values.len(),
            });
        }
        Ok(IntervalMap { model, values })
    }

    /// Map over all intervals (leaves included) from heap-ordered values.
    pub fn all(model: DyadicModel, values: Vec<T>) -> Result<Self> {
        if values.len() != model.interval_count() {
            return Err(Error::InvalidLength {
                expected: model.interval_count(),
                found: values.len(),
            });
        }
        Ok(IntervalMap { model, values })
    }

    pub fn from_fn_internal(model: DyadicModel, f: impl FnMut(DyadicIndex) -> T) -> Self {
        IntervalMap {
            model,
            values: model.internal().map(f).collect(),
        }
    }

    pub fn from_fn_all(model: DyadicModel, f: impl FnMut(DyadicIndex) -> T) -> Self {
        IntervalMap {
            model,
            values: model.intervals().map(f).collect(),
        }
    }

    pub fn model(&self) -> DyadicModel {
        self.model
    }

    pub fn includes_leaves(&self) -> bool {
        self.values.len() == self.model.interval_count()
    }

    pub fn get(&self, idx: DyadicIndex) -> Option<&T> {
        if idx.level > self.model.depth {
            return None;
        }
        self.values.get(idx.heap())
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (DyadicIndex, &T)> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| (DyadicIndex::from_heap(i), v))
    }

    pub fn map<U>(&self, mut f: impl FnMut(DyadicIndex, &T) -> U) -> IntervalMap<U> {
        IntervalMap {
            model: self.model,
            values: self.iter().map(|(i, v)| f(i, v)).collect(),
        }
    }
}

impl<T> Index<DyadicIndex> for IntervalMap<T> {
    type Output = T;

    fn index(&self, idx: DyadicIndex) -> &T {
        self.get(idx).expect("interval outside the map")
    }
}

/// A function constant on each leaf.
#[derive(Clone, Debug, PartialEq)]
pub struct LeafFunction {
    model: DyadicModel,
    values: Vec<f64>,
}

impl LeafFunction {
    pub fn new(model: DyadicModel, values: Vec<f64>) -> Result<Self> {
        if values.len() != model.leaf_count() {
            return Err(Error::InvalidLength {
                expected: model.leaf_count(),
                found: values.len(),
            });
        }
        Ok(LeafFunction { model, values })
    }

    pub fn constant(model: DyadicModel, c: f64) -> Self {
        LeafFunction {
            model,
            values: vec![c; model.leaf_count()],
        }
    }

    pub fn zero(model: DyadicModel) -> Self {
        Self::constant(model, 0.0)
    }

    pub fn from_fn(model: DyadicModel, f: impl FnMut(usize) -> f64) -> Self {
        LeafFunction {
            model,
            values: (0..model.leaf_count()).map(f).collect(),
        }
    }

    /// The indicator `χ_J`.
    pub fn indicator(model: DyadicModel, j: DyadicIndex) -> Self {
        let range = j.leaf_range(model.depth);
        Self::from_fn(model, |i| if range.contains(&i) { 1.0 } else { 0.0 })
    }

    pub fn model(&self) -> DyadicModel {
        self.model
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `∫f = 2^-N Σ f_i`.
    pub fn integral(&self) -> f64 {
        self.model.leaf_measure() * self.values.iter().sum::<f64>()
    }

    /// `(f, g) = 2^-N Σ f_i g_i`.
    pub fn inner(&self, other: &LeafFunction) -> Result<f64> {
        self.model.ensure_same(other.model)?;
        Ok(self.model.leaf_measure() * dot(&self.values, &other.values))
    }

    pub fn norm_sq(&self) -> f64 {
        self.model.leaf_measure() * dot(&self.values, &self.values)
    }

    /// `∫ f² u`.
    pub fn weighted_norm_sq(&self, u: &Weight) -> Result<f64> {
        self.model.ensure_same(u.model())?;
        let s: f64 = self
            .values
            .iter()
            .zip(u.values())
            .map(|(f, u)| f * f * u)
            .sum();
        Ok(self.model.leaf_measure() * s)
    }

    /// Averages `⟨f⟩_I` over every interval, leaves included.
    pub fn averages(&self) -> IntervalMap<f64> {
        let n = self.model.leaf_count();
        let mut out = vec![0.0; 2 * n - 1];
        out[n - 1..].copy_from_slice(&self.values);
        for h in (0..n - 1).rev() {
            out[h] = 0.5 * (out[2 * h + 1] + out[2 * h + 2]);
        }
        IntervalMap {
            model: self.model,
            values: out,
        }
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> LeafFunction {
        LeafFunction {
            model: self.model,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(
        &self,
        other: &LeafFunction,
        mut f: impl FnMut(f64, f64) -> f64,
    ) -> Result<LeafFunction> {
        self.model.ensure_same(other.model)?;
        Ok(LeafFunction {
            model: self.model,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn mul(&self, other: &LeafFunction) -> Result<LeafFunction> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, t: f64) -> LeafFunction {
        self.map(|v| t * v)
    }

    /// `χ_J · f`.
    pub fn restrict(&self, j: DyadicIndex) -> LeafFunction {
        let range = j.leaf_range(self.model.depth);
        LeafFunction::from_fn(self.model, |i| {
            if range.contains(&i) {
                self.values[i]
            } else {
                0.0
            }
        })
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }
}

/// A strictly positive leaf function with its interval averages.
#[derive(Clone, Debug, PartialEq)]
pub struct Weight {
    base: LeafFunction,
    averages: IntervalMap<f64>,
}

impl Weight {
    /// Fails unless every value is finite and at least [`WEIGHT_FLOOR`].
    pub fn new(base: LeafFunction) -> Result<Self> {
        if base
            .values
            .iter()
            .any(|v| !v.is_finite() || *v < WEIGHT_FLOOR)
        {
            return Err(Error::Domain(
                "weight values must be finite and at least 1e-9",
            ));
        }
        let averages = base.averages();
        Ok(Weight { base, averages })
    }

    pub fn from_values(model: DyadicModel, values: Vec<f64>) -> Result<Self> {
        Self::new(LeafFunction::new(model, values)?)
    }

    pub fn constant(model: DyadicModel, c: f64) -> Result<Self> {
        Self::new(LeafFunction::constant(model, c))
    }

    pub fn model(&self) -> DyadicModel {
        self.base.model
    }

    pub fn base(&self) -> &LeafFunction {
        &self.base
    }

    pub fn values(&self) -> &[f64] {
        &self.base.values
    }

    /// `⟨w⟩_I` for any interval of the model.
    pub fn average(&self, idx: DyadicIndex) -> f64 {
        self.averages[idx]
    }

    pub fn averages(&self) -> &IntervalMap<f64> {
        &self.averages
    }

    /// Relative split `(⟨w⟩_{I₋} − ⟨w⟩_{I₊}) / ⟨w⟩_I`.
    pub fn split(&self, idx: DyadicIndex) -> f64 {
        (self.average(idx.left()) - self.average(idx.right())) / self.average(idx)
    }

    /// Pointwise `w^{1/2}`.
    pub fn sqrt(&self) -> LeafFunction {
        self.base.map(libm::sqrt)
    }

    /// `t · w`.
    pub fn scaled(&self, t: f64) -> Result<Weight> {
        Weight::new(self.base.scale(t))
    }

    /// Pointwise reciprocal `w^{-1}`.
    pub fn reciprocal(&self) -> Result<Weight> {
        Weight::new(self.base.map(|v| 1.0 / v))
    }
}

/// `h_I`: `+|I|^{-1/2}` on `I₋`, `−|I|^{-1/2}` on `I₊`.
pub fn haar_function(idx: DyadicIndex, model: DyadicModel) -> Result<LeafFunction> {
    model.ensure_internal(idx)?;
    let amp = 1.0 / libm::sqrt(idx.len());
    let left = idx.left().leaf_range(model.depth);
    let right = idx.right().leaf_range(model.depth);
    Ok(LeafFunction::from_fn(model, |i| {
        if left.contains(&i) {
            amp
        } else if right.contains(&i) {
            -amp
        } else {
            0.0
        }
    }))
}

/// `(f, h_I)` for every internal `I`, from the averages:
/// `(f, h_I) = (√|I| / 2)(⟨f⟩_{I₋} − ⟨f⟩_{I₊})`.
pub fn haar_coefficients(f: &LeafFunction) -> IntervalMap<f64> {
    coefficients_from_averages(&f.averages())
}

pub(crate) fn coefficients_from_averages(avg: &IntervalMap<f64>) -> IntervalMap<f64> {
    let model = avg.model();
    IntervalMap::from_fn_internal(model, |i| {
        0.5 * libm::sqrt(i.len()) * (avg[i.left()] - avg[i.right()])
    })
}

/// The `w`-orthonormal Haar function `h^w_I` and its coupling to `h_I`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisbalancedHaar {
    pub index: DyadicIndex,
    /// `x_I = √(⟨w⟩_I / (⟨w⟩_{I₋}⟨w⟩_{I₊}))`.
    pub x: f64,
    /// `A_I`, so that `x_I h_I = h^w_I + A_I χ_I`.
    pub a: f64,
    /// Value of `h^w_I` on `I₋`.
    pub left: f64,
    /// Value of `h^w_I` on `I₊`.
    pub right: f64,
}

impl DisbalancedHaar {
    pub fn to_leaf_function(&self, model: DyadicModel) -> LeafFunction {
        let left = self.index.left().leaf_range(model.depth);
        let right = self.index.right().leaf_range(model.depth);
        LeafFunction::from_fn(model, |i| {
            if left.contains(&i) {
                self.left
            } else if right.contains(&i) {
                self.right
            } else {
                0.0
            }
        })
    }
}

pub fn disbalanced_haar(w: &Weight, idx: DyadicIndex) -> Result<DisbalancedHaar> {
    w.model().ensure_internal(idx)?;
    let (m, lm, rm) = (
        w.average(idx),
        w.average(idx.left()),
        w.average(idx.right()),
    );
    if !(m > 0.0 && lm > 0.0 && rm > 0.0) {
        return Err(Error::Domain("nonpositive weight average"));
    }
    let x = libm::sqrt(m / (lm * rm));
    let root = libm::sqrt(idx.len());
    let a = x / (2.0 * root) * (lm - rm) / m;
    Ok(DisbalancedHaar {
        index: idx,
        x,
        a,
        left: x / root - a,
        right: -x / root - a,
    })
}

/// A nonnegative sequence `α_I` on the internal intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaCoefficients(IntervalMap<f64>);

impl AlphaCoefficients {
    pub fn new(map: IntervalMap<f64>) -> Result<Self> {
        if map.includes_leaves() {
            return Err(Error::InvalidLength {
                expected: map.model().internal_count(),
                found: map.len(),
            });
        }
        if map.values().iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
            return Err(Error::Domain(
                "alpha coefficients must be finite and nonnegative",
            ));
        }
        Ok(AlphaCoefficients(map))
    }

    pub fn zero(model: DyadicModel) -> Self {
        AlphaCoefficients(IntervalMap::from_fn_internal(model, |_| 0.0))
    }

    /// `α_{idx} = value`, zero elsewhere.
    pub fn single(model: DyadicModel, idx: DyadicIndex, value: f64) -> Result<Self> {
        model.ensure_internal(idx)?;
        Self::new(IntervalMap::from_fn_internal(model, |i| {
            if i == idx {
                value
            } else {
                0.0
            }
        }))
    }

    pub fn model(&self) -> DyadicModel {
        self.0.model()
    }

    pub fn get(&self, idx: DyadicIndex) -> f64 {
        self.0[idx]
    }

    pub fn map(&self) -> &IntervalMap<f64> {
        &self.0
    }
}

/// `α_I = |Δv/⟨v⟩_I| · |Δw/⟨w⟩_I| · |I|`.
pub fn alpha_coefficients(v: &Weight, w: &Weight) -> Result<AlphaCoefficients> {
    v.model().ensure_same(w.model())?;
    Ok(AlphaCoefficients(IntervalMap::from_fn_internal(
        v.model(),
        |i| libm::fabs(v.split(i)) * libm::fabs(w.split(i)) * i.len(),
    )))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(n: u32) -> DyadicModel {
        DyadicModel::new(n).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        libm::fabs(a - b) <= tol * (1.0 + libm::fabs(b))
    }

    #[test]
    fn heap_round_trip() {
        for h in 0..511 {
            assert_eq!(DyadicIndex::from_heap(h).heap(), h);
        }
        assert_eq!(DyadicIndex::from_heap(0), DyadicIndex::ROOT);
        assert_eq!(DyadicIndex::from_heap(4), DyadicIndex::new(2, 1).unwrap());
    }

    #[test]
    fn index_validation_and_geometry() {
        assert!(DyadicIndex::new(2, 4).is_err());
        let i = DyadicIndex::new(2, 3).unwrap();
        assert_eq!(i.len(), 0.25);
        assert_eq!((i.start(), i.end()), (0.75, 1.0));
        assert_eq!(i.parent(), Some(DyadicIndex::new(1, 1).unwrap()));
        assert!(DyadicIndex::ROOT.contains(i));
        assert!(!i.left().contains(i));
        assert_eq!(i.leaf_range(4), 12..16);
    }

    #[test]
    fn subtree_enumeration() {
        let m = model(4);
        let j = DyadicIndex::new(1, 1).unwrap();
        let sub: Vec<_> = m.subtree(j).collect();
        assert_eq!(sub.len(), m.subtree_len(j));
        assert!(sub.iter().all(|&i| j.contains(i) && m.is_internal(i)));
    }

    #[test]
    fn averages_examples() {
        let f = LeafFunction::new(model(1), vec![2.0, 0.0]).unwrap();
        let a = f.averages();
        assert_eq!(a.values(), &[1.0, 2.0, 0.0]);

        let f = LeafFunction::new(model(2), vec![1.0, 3.0, 2.0, 2.0]).unwrap();
        let a = f.averages();
        assert_eq!(&a.values()[..3], &[2.0, 2.0, 2.0]);

        let one = LeafFunction::constant(model(5), 1.0).averages();
        assert!(one.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn haar_function_examples() {
        assert_eq!(
            haar_function(DyadicIndex::ROOT, model(1)).unwrap().values(),
            &[1.0, -1.0]
        );
        assert_eq!(
            haar_function(DyadicIndex::ROOT, model(2)).unwrap().values(),
            &[1.0, 1.0, -1.0, -1.0]
        );
        let h = haar_function(DyadicIndex::new(1, 0).unwrap(), model(2)).unwrap();
        let r2 = libm::sqrt(2.0);
        assert!(close(h.values()[0], r2, 1e-15) && close(h.values()[1], -r2, 1e-15));
        assert_eq!(&h.values()[2..], &[0.0, 0.0]);
        assert!(close(h.norm_sq(), 1.0, 1e-15));
        assert!(matches!(
            haar_function(DyadicIndex::new(2, 0).unwrap(), model(2)),
            Err(Error::InvalidIndex { .. })
        ));
    }

    #[test]
    fn haar_coefficient_examples() {
        let f = LeafFunction::new(model(1), vec![2.0, 0.0]).unwrap();
        assert_eq!(haar_coefficients(&f)[DyadicIndex::ROOT], 1.0);

        let c = haar_coefficients(&LeafFunction::constant(model(3), 7.5));
        assert!(c.values().iter().all(|&v| v == 0.0));

        let h = haar_function(DyadicIndex::ROOT, model(3)).unwrap();
        let c = haar_coefficients(&h);
        assert!(close(c[DyadicIndex::ROOT], 1.0, 1e-15));
        assert!(c.values()[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn coefficients_match_inner_products() {
        let m = model(3);
        let f = LeafFunction::from_fn(m, |i| libm::sin(i as f64 * 1.7) + 0.3 * i as f64);
        let c = haar_coefficients(&f);
        for i in m.internal() {
            let direct = f.inner(&haar_function(i, m).unwrap()).unwrap();
            assert!(close(c[i], direct, 1e-14));
        }
    }

    #[test]
    fn disbalanced_examples() {
        let m = model(1);
        let w = Weight::constant(m, 1.0).unwrap();
        let d = disbalanced_haar(&w, DyadicIndex::ROOT).unwrap();
        assert_eq!((d.x, d.a), (1.0, 0.0));

        let w = Weight::from_values(m, vec![1.0, 3.0]).unwrap();
        let d = disbalanced_haar(&w, DyadicIndex::ROOT).unwrap();
        let x = libm::sqrt(2.0 / 3.0);
        assert!(close(d.x, x, 1e-15) && close(d.a, -x / 2.0, 1e-15));

        let w = Weight::from_values(m, vec![3.0, 1.0]).unwrap();
        let d = disbalanced_haar(&w, DyadicIndex::ROOT).unwrap();
        assert!(close(d.x, x, 1e-15) && close(d.a, x / 2.0, 1e-15));
    }

    #[test]
    fn alpha_examples() {
        let m = model(1);
        let one = Weight::constant(m, 1.0).unwrap();
        let w = Weight::from_values(m, vec![1.0, 3.0]).unwrap();
        let v = Weight::from_values(m, vec![2.0, 1.0]).unwrap();
        assert_eq!(
            alpha_coefficients(&one, &one)
                .unwrap()
                .get(DyadicIndex::ROOT),
            0.0
        );
        assert!(close(
            alpha_coefficients(&v, &w).unwrap().get(DyadicIndex::ROOT),
            2.0 / 3.0,
            1e-15
        ));
        assert_eq!(
            alpha_coefficients(&one, &w).unwrap().get(DyadicIndex::ROOT),
            0.0
        );
        let other = Weight::constant(model(2), 1.0).unwrap();
        assert!(matches!(
            alpha_coefficients(&other, &w),
            Err(Error::ModelMismatch { .. })
        ));
    }

    #[test]
    fn weight_rejects_small_values() {
        assert!(Weight::from_values(model(1), vec![1.0, 0.0]).is_err());
        assert!(Weight::from_values(model(1), vec![1.0, f64::NAN]).is_err());
        assert!(Weight::from_values(model(1), vec![1.0, 1e-9]).is_ok());
    }
}
