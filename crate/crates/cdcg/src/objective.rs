//! Monotone submodular set functions over a finite ground set.
//!
//! A set function `f: 2^Y -> R+` is submodular when the marginal reward of an
//! element shrinks as the base set grows:
//!
//! ```text
//! f(A + x) - f(A) >= f(B + x) - f(B)    for all A <= B <= Y, x not in B
//! ```
//!
//! All functions handled here are additionally monotone (`f(A) <= f(B)` for
//! `A <= B`) and normalized (`f({}) = 0`). The module defines the evaluation
//! contract, two concrete families (modular functions and weighted coverage),
//! and exhaustive brute-force checkers for the two properties. The checkers
//! refuse ground sets above a configurable cap instead of silently sampling.

use smallvec::SmallVec;

use crate::{Error, Result};

/// Hard limit on `2^|Y|` table enumeration; above this the exhaustive
/// checkers refuse regardless of the caller-provided cap.
const TABLE_LIMIT: usize = 26;

/// Default ground-size cap for the exhaustive property checkers. The
/// submodularity scan enumerates all nested pairs plus an outside element,
/// roughly `3^|Y| * |Y|` inequality tests.
pub const DEFAULT_CHECK_CAP: usize = 12;

/// Absolute slack when testing the submodularity / monotonicity inequalities,
/// absorbing float summation noise in otherwise exact comparisons.
pub const CHECK_SLACK: f64 = 1e-9;

/// Finite ground set; elements are the dense indices `0..size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundSet {
    size: usize,
    labels: Option<Vec<String>>,
}

impl GroundSet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyGround);
        }
        Ok(Self { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let mut g = Self::new(labels.len())?;
        g.labels = Some(labels);
        Ok(g)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn label(&self, element: usize) -> Option<&str> {
        self.labels.as_ref().and_then(|l| l.get(element)).map(String::as_str)
    }

    pub(crate) fn check_element(&self, element: usize) -> Result<()> {
        if element >= self.size {
            return Err(Error::InvalidElement { element, size: self.size });
        }
        Ok(())
    }
}

/// A subset of a ground set, stored as a word-array bit set.
///
/// Grounds up to 128 elements stay inline; larger ones spill to the heap.
/// Word packing keeps the brute-force oracles (which enumerate millions of
/// subsets) cheap.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subset {
    size: usize,
    words: SmallVec<[u64; 2]>,
}

fn word_count(size: usize) -> usize {
    size.div_ceil(64)
}

impl Subset {
    pub fn empty(ground_size: usize) -> Self {
        Self { size: ground_size, words: smallvec::smallvec![0; word_count(ground_size)] }
    }

    pub fn full(ground_size: usize) -> Self {
        let mut s = Self::empty(ground_size);
        for i in 0..ground_size {
            s.insert(i);
        }
        s
    }

    pub fn singleton(ground_size: usize, element: usize) -> Self {
        let mut s = Self::empty(ground_size);
        s.insert(element);
        s
    }

    /// Builds a subset of a ground with at most 64 elements from a bit mask.
    pub fn from_mask(ground_size: usize, mask: u64) -> Self {
        debug_assert!(ground_size <= 64);
        let mut s = Self::empty(ground_size);
        s.words[0] = mask;
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(
        ground_size: usize,
        indices: I,
    ) -> Result<Self> {
        let mut s = Self::empty(ground_size);
        for i in indices {
            if i >= ground_size {
                return Err(Error::InvalidElement { element: i, size: ground_size });
            }
            s.insert(i);
        }
        Ok(s)
    }

    pub fn ground_size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, element: usize) -> bool {
        debug_assert!(element < self.size);
        self.words[element / 64] >> (element % 64) & 1 == 1
    }

    pub fn insert(&mut self, element: usize) {
        debug_assert!(element < self.size);
        self.words[element / 64] |= 1 << (element % 64);
    }

    pub fn remove(&mut self, element: usize) {
        debug_assert!(element < self.size);
        self.words[element / 64] &= !(1 << (element % 64));
    }

    pub fn with(&self, element: usize) -> Self {
        let mut s = self.clone();
        s.insert(element);
        s
    }

    pub fn without(&self, element: usize) -> Self {
        let mut s = self.clone();
        s.remove(element);
        s
    }

    pub fn cardinality(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn union(&self, other: &Subset) -> Self {
        let mut s = self.clone();
        for (a, b) in s.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
        s
    }

    pub fn intersection(&self, other: &Subset) -> Self {
        let mut s = self.clone();
        for (a, b) in s.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
        s
    }

    /// Member indices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }

    /// The underlying mask, available when the ground has at most 64 elements.
    pub fn as_mask(&self) -> Option<u64> {
        if self.size <= 64 {
            Some(self.words[0])
        } else {
            None
        }
    }
}

impl std::fmt::Display for Subset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Normalized, nonnegative set function over a fixed ground set.
///
/// Implementations must be pure: repeated evaluation of the same subset
/// returns the same value, and evaluation is safe from concurrent workers.
/// `evaluate({})` must be exactly zero.
pub trait SetFunction: Send + Sync {
    fn ground(&self) -> &GroundSet;

    fn evaluate(&self, subset: &Subset) -> f64;

    fn ground_size(&self) -> usize {
        self.ground().size()
    }

    /// For each element `j` of `indices`, the pair
    /// `(f(base + j), f(base - j))`, written into the output slices.
    ///
    /// Sampled-gradient estimation calls this once per sampled set, so
    /// implementations with structure (e.g. coverage) override it with a
    /// batch computation. The default is the definition itself.
    fn toggle_values(
        &self,
        base: &Subset,
        indices: &[usize],
        with_elem: &mut [f64],
        without_elem: &mut [f64],
    ) {
        debug_assert_eq!(indices.len(), with_elem.len());
        debug_assert_eq!(indices.len(), without_elem.len());
        for (k, &j) in indices.iter().enumerate() {
            if base.contains(j) {
                with_elem[k] = self.evaluate(base);
                without_elem[k] = self.evaluate(&base.without(j));
            } else {
                with_elem[k] = self.evaluate(&base.with(j));
                without_elem[k] = self.evaluate(base);
            }
        }
    }
}

/// Marginal reward `f(base + element) - f(base)` of adding one element.
///
/// Nonnegative for monotone functions; exactly zero when `element` is
/// already in `base`.
pub fn marginal(f: &dyn SetFunction, element: usize, base: &Subset) -> Result<f64> {
    f.ground().check_element(element)?;
    if base.ground_size() != f.ground_size() {
        return Err(Error::DimensionMismatch {
            expected: f.ground_size(),
            actual: base.ground_size(),
        });
    }
    if base.contains(element) {
        return Ok(0.0);
    }
    Ok(f.evaluate(&base.with(element)) - f.evaluate(base))
}

/// Precomputed values of `f` for every subset of a small ground set,
/// indexed by bit mask.
pub(crate) fn value_table(f: &dyn SetFunction) -> Vec<f64> {
    let m = f.ground_size();
    assert!(m <= TABLE_LIMIT, "value table over {m} elements");
    (0u64..1 << m).map(|mask| f.evaluate(&Subset::from_mask(m, mask))).collect()
}

/// Witness of a diminishing-returns violation:
/// `f(element | superset) > f(element | base)` with `base <= superset`.
#[derive(Debug, Clone)]
pub struct SubmodularityWitness {
    pub base: Subset,
    pub superset: Subset,
    pub element: usize,
    /// Amount by which the superset marginal exceeds the base marginal.
    pub excess: f64,
}

/// Witness of a monotonicity violation: `f(larger) < f(smaller)`.
#[derive(Debug, Clone)]
pub struct MonotonicityWitness {
    pub smaller: Subset,
    pub larger: Subset,
    /// Amount by which the value drops when growing the set.
    pub drop: f64,
}

/// Outcome of an exhaustive property check.
#[derive(Debug, Clone)]
pub enum CheckOutcome<W> {
    Holds,
    Violated(W),
}

impl<W> CheckOutcome<W> {
    pub fn holds(&self) -> bool {
        matches!(self, CheckOutcome::Holds)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            CheckOutcome::Holds => None,
            CheckOutcome::Violated(w) => Some(w),
        }
    }
}

fn check_cap(f: &dyn SetFunction, cap: usize) -> Result<usize> {
    let m = f.ground_size();
    if m > cap.min(TABLE_LIMIT) {
        return Err(Error::CheckCapExceeded { size: m, cap: cap.min(TABLE_LIMIT) });
    }
    Ok(m)
}

/// Exhaustively verifies the diminishing-returns inequality over all nested
/// pairs `base <= superset` and every element outside the superset. Returns
/// the first violation found, scanning supersets in mask order.
pub fn check_submodular(
    f: &dyn SetFunction,
    cap: usize,
) -> Result<CheckOutcome<SubmodularityWitness>> {
    let m = check_cap(f, cap)?;
    let table = value_table(f);
    for sup in 0u64..1 << m {
        for x in 0..m {
            if sup >> x & 1 == 1 {
                continue;
            }
            let marg_sup = table[(sup | 1 << x) as usize] - table[sup as usize];
            // Enumerate base as proper and improper submasks of sup.
            let mut base = sup;
            loop {
                let marg_base = table[(base | 1 << x) as usize] - table[base as usize];
                if marg_sup - marg_base > CHECK_SLACK {
                    return Ok(CheckOutcome::Violated(SubmodularityWitness {
                        base: Subset::from_mask(m, base),
                        superset: Subset::from_mask(m, sup),
                        element: x,
                        excess: marg_sup - marg_base,
                    }));
                }
                if base == 0 {
                    break;
                }
                base = (base - 1) & sup;
            }
        }
    }
    Ok(CheckOutcome::Holds)
}

/// Exhaustively verifies `f(base) <= f(superset)` over all nested pairs.
pub fn check_monotone(
    f: &dyn SetFunction,
    cap: usize,
) -> Result<CheckOutcome<MonotonicityWitness>> {
    let m = check_cap(f, cap)?;
    let table = value_table(f);
    for sup in 0u64..1 << m {
        let mut base = sup;
        loop {
            let drop = table[base as usize] - table[sup as usize];
            if drop > CHECK_SLACK {
                return Ok(CheckOutcome::Violated(MonotonicityWitness {
                    smaller: Subset::from_mask(m, base),
                    larger: Subset::from_mask(m, sup),
                    drop,
                }));
            }
            if base == 0 {
                break;
            }
            base = (base - 1) & sup;
        }
    }
    Ok(CheckOutcome::Holds)
}

/// Modular (additive) function `f(S) = sum of weights over S`.
///
/// The simplest member of the monotone submodular family; its marginals are
/// constant, which several oracles in the test suite rely on.
#[derive(Debug, Clone)]
pub struct Modular {
    ground: GroundSet,
    weights: Vec<f64>,
}

impl Modular {
    /// Rejects negative or non-finite weights: those would break the
    /// nonnegativity and monotonicity contract at construction time.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let ground = GroundSet::new(weights.len())?;
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidFunction(format!(
                    "modular weight {w} at element {i} is not a nonnegative finite value"
                )));
            }
        }
        Ok(Self { ground, weights })
    }

    /// The cardinality function `f(S) = |S|`.
    pub fn cardinality(ground_size: usize) -> Self {
        Self::new(vec![1.0; ground_size]).expect("unit weights are valid")
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl SetFunction for Modular {
    fn ground(&self) -> &GroundSet {
        &self.ground
    }

    fn evaluate(&self, subset: &Subset) -> f64 {
        subset.iter().map(|i| self.weights[i]).sum()
    }

    fn toggle_values(
        &self,
        base: &Subset,
        indices: &[usize],
        with_elem: &mut [f64],
        without_elem: &mut [f64],
    ) {
        let v = self.evaluate(base);
        for (k, &j) in indices.iter().enumerate() {
            if base.contains(j) {
                with_elem[k] = v;
                without_elem[k] = v - self.weights[j];
            } else {
                with_elem[k] = v + self.weights[j];
                without_elem[k] = v;
            }
        }
    }
}

type ItemWords = SmallVec<[u64; 4]>;

/// Weighted coverage function: each element covers a set of items from a
/// finite universe, and `f(S)` is the total weight of the union of the
/// covers of the elements of `S`. With unit weights this is the cardinality
/// of the union. Weighted coverage functions are monotone and submodular.
#[derive(Debug, Clone)]
pub struct WeightedCoverage {
    ground: GroundSet,
    universe: usize,
    covers: Vec<ItemWords>,
    /// `None` means unit weights (union cardinality).
    weights: Option<Vec<f64>>,
}

impl WeightedCoverage {
    pub fn new(universe: usize, covers: Vec<Vec<usize>>) -> Result<Self> {
        Self::build(universe, covers, None)
    }

    pub fn with_weights(
        universe: usize,
        covers: Vec<Vec<usize>>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        Self::build(universe, covers, Some(weights))
    }

    fn build(
        universe: usize,
        covers: Vec<Vec<usize>>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        let ground = GroundSet::new(covers.len())?;
        if let Some(w) = &weights {
            if w.len() != universe {
                return Err(Error::InvalidFunction(format!(
                    "item weight count {} does not match universe size {universe}",
                    w.len()
                )));
            }
            for (i, &wi) in w.iter().enumerate() {
                if !wi.is_finite() || wi < 0.0 {
                    return Err(Error::InvalidFunction(format!(
                        "item weight {wi} at item {i} is not a nonnegative finite value"
                    )));
                }
            }
        }
        let words = word_count(universe.max(1));
        let mut packed = Vec::with_capacity(covers.len());
        for (e, cover) in covers.iter().enumerate() {
            let mut mask: ItemWords = smallvec::smallvec![0; words];
            for &item in cover {
                if item >= universe {
                    return Err(Error::InvalidFunction(format!(
                        "element {e} covers item {item}, outside universe of size {universe}"
                    )));
                }
                mask[item / 64] |= 1 << (item % 64);
            }
            packed.push(mask);
        }
        Ok(Self { ground, universe, covers: packed, weights })
    }

    pub fn universe_size(&self) -> usize {
        self.universe
    }

    fn union_value(&self, union: &[u64]) -> f64 {
        match &self.weights {
            None => union.iter().map(|w| w.count_ones() as f64).sum(),
            Some(weights) => {
                let mut total = 0.0;
                for (wi, &w) in union.iter().enumerate() {
                    let mut bits = w;
                    while bits != 0 {
                        let b = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        total += weights[wi * 64 + b];
                    }
                }
                total
            }
        }
    }

    fn union_of(&self, subset: &Subset, out: &mut ItemWords) {
        out.clear();
        out.resize(self.covers[0].len(), 0);
        for e in subset.iter() {
            for (o, &w) in out.iter_mut().zip(&self.covers[e]) {
                *o |= w;
            }
        }
    }
}

impl SetFunction for WeightedCoverage {
    fn ground(&self) -> &GroundSet {
        &self.ground
    }

    fn evaluate(&self, subset: &Subset) -> f64 {
        let mut union: ItemWords = smallvec::smallvec![];
        self.union_of(subset, &mut union);
        self.union_value(&union)
    }

    /// Batch toggles via prefix/suffix unions over the members of `base`:
    /// removing member `k` leaves `prefix[k] | suffix[k+1]`, so each toggle
    /// costs one word-wise union instead of a full re-scan.
    fn toggle_values(
        &self,
        base: &Subset,
        indices: &[usize],
        with_elem: &mut [f64],
        without_elem: &mut [f64],
    ) {
        let words = self.covers[0].len();
        let members: SmallVec<[usize; 24]> = base.iter().collect();
        let k = members.len();
        let mut prefix = vec![0u64; (k + 1) * words];
        let mut suffix = vec![0u64; (k + 1) * words];
        for (i, &e) in members.iter().enumerate() {
            let (lo, hi) = prefix.split_at_mut((i + 1) * words);
            hi[..words].copy_from_slice(&lo[i * words..]);
            for (o, &w) in hi[..words].iter_mut().zip(&self.covers[e]) {
                *o |= w;
            }
        }
        for (i, &e) in members.iter().enumerate().rev() {
            let (lo, hi) = suffix.split_at_mut((i + 1) * words);
            let (dst, src) = (&mut lo[i * words..], &hi[..words]);
            dst.copy_from_slice(src);
            for (o, &w) in dst.iter_mut().zip(&self.covers[e]) {
                *o |= w;
            }
        }
        let total = &prefix[k * words..];
        let total_value = self.union_value(total);
        let mut scratch: ItemWords = smallvec::smallvec![0; words];
        for (out, &j) in indices.iter().enumerate() {
            if base.contains(j) {
                let pos = members.iter().position(|&e| e == j).expect("member present");
                for w in 0..words {
                    scratch[w] = prefix[pos * words + w] | suffix[(pos + 1) * words + w];
                }
                with_elem[out] = total_value;
                without_elem[out] = self.union_value(&scratch);
            } else {
                for w in 0..words {
                    scratch[w] = total[w] | self.covers[j][w];
                }
                with_elem[out] = self.union_value(&scratch);
                without_elem[out] = total_value;
            }
        }
    }
}
