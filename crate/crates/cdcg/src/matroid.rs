//! Partition matroids, their polytope, and randomized swap rounding.
//!
//! The ground set splits into disjoint blocks `J_1, ..., J_n` (one per
//! agent) and a set is independent when it takes at most `cap_i` elements
//! from block `i`. The experiments in this crate use unit capacities
//! throughout: each agent contributes at most one element.
//!
//! The matroid polytope is the convex hull of the indicator vectors of
//! independent sets. For a unit-capacity partition matroid it has the exact
//! linear description `y >= 0`, `sum of y over each block <= 1`, which is
//! what [`PartitionMatroid::in_polytope`] tests; no LP is involved.
//!
//! [`swap_round`] converts a fractional polytope point back into an
//! independent set. Blocks are decoupled, so it merges fractional mass
//! within each block independently: repeatedly combine the two lowest-index
//! fractional coordinates, moving the mass of one onto the other with
//! probability proportional to the retained coordinate. Each merge
//! preserves every coordinate's expectation, so the element marginals of
//! the rounded set match the fractional point, and for submodular
//! objectives the expected rounded value does not fall below the
//! multilinear value of the input.

use serde::Serialize;

use crate::multilinear::FractionalPoint;
use crate::objective::{GroundSet, SetFunction, Subset};
use crate::rng::{substream, Purpose};
use crate::{Error, Result};

/// Membership tolerance for polytope checks.
pub const POLYTOPE_TOL: f64 = 1e-9;

/// Block mass at most this far above capacity is rescaled before rounding.
pub const RESCALE_LIMIT: f64 = 1e-6;

/// Ground set partitioned into per-agent blocks with per-block capacities.
#[derive(Debug, Clone)]
pub struct PartitionMatroid {
    ground: GroundSet,
    blocks: Vec<Vec<usize>>,
    capacities: Vec<u32>,
    block_of: Vec<usize>,
}

impl PartitionMatroid {
    /// Unit-capacity partition matroid. Blocks must be disjoint, nonempty,
    /// and cover the ground set.
    pub fn new(ground: GroundSet, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let caps = vec![1; blocks.len()];
        Self::with_capacities(ground, blocks, caps)
    }

    pub fn with_capacities(
        ground: GroundSet,
        mut blocks: Vec<Vec<usize>>,
        capacities: Vec<u32>,
    ) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidPartition("no blocks given".into()));
        }
        if capacities.len() != blocks.len() {
            return Err(Error::InvalidPartition(format!(
                "{} capacities for {} blocks",
                capacities.len(),
                blocks.len()
            )));
        }
        for (i, &c) in capacities.iter().enumerate() {
            if c == 0 {
                return Err(Error::InvalidPartition(format!("capacity of block {i} is zero")));
            }
        }
        let size = ground.size();
        let mut block_of = vec![usize::MAX; size];
        for (b, block) in blocks.iter_mut().enumerate() {
            if block.is_empty() {
                return Err(Error::EmptyBlock { block: b });
            }
            block.sort_unstable();
            for &e in block.iter() {
                if e >= size {
                    return Err(Error::InvalidElement { element: e, size });
                }
                if block_of[e] != usize::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "element {e} appears in blocks {} and {b}",
                        block_of[e]
                    )));
                }
                block_of[e] = b;
            }
        }
        if let Some(orphan) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::InvalidPartition(format!(
                "element {orphan} is not assigned to any block"
            )));
        }
        Ok(Self { ground, blocks, capacities, block_of })
    }

    /// Blocks of `block_size` consecutive elements each; the layout used by
    /// the coverage benchmark (agent `i` owns elements
    /// `block_size*i .. block_size*(i+1)`).
    pub fn uniform(n_blocks: usize, block_size: usize) -> Result<Self> {
        let ground = GroundSet::new(n_blocks * block_size)?;
        let blocks = (0..n_blocks)
            .map(|b| (b * block_size..(b + 1) * block_size).collect())
            .collect();
        Self::new(ground, blocks)
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn ground_size(&self) -> usize {
        self.ground.size()
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Elements of one block, ascending.
    pub fn block(&self, index: usize) -> &[usize] {
        &self.blocks[index]
    }

    pub fn capacity(&self, index: usize) -> u32 {
        self.capacities[index]
    }

    pub fn block_of(&self, element: usize) -> usize {
        self.block_of[element]
    }

    /// All capacities equal one; several operations support only this case.
    pub fn is_unit_capacity(&self) -> bool {
        self.capacities.iter().all(|&c| c == 1)
    }

    pub(crate) fn require_unit_capacity(&self) -> Result<()> {
        for (b, &c) in self.capacities.iter().enumerate() {
            if c != 1 {
                return Err(Error::CapacityUnsupported { block: b, capacity: c });
            }
        }
        Ok(())
    }

    /// Independence: every block contributes at most its capacity.
    pub fn is_independent(&self, subset: &Subset) -> bool {
        debug_assert_eq!(subset.ground_size(), self.ground_size());
        let mut counts = vec![0u32; self.blocks.len()];
        for e in subset.iter() {
            let b = self.block_of[e];
            counts[b] += 1;
            if counts[b] > self.capacities[b] {
                return false;
            }
        }
        true
    }

    /// Membership in the matroid polytope, within `tol`: coordinates at
    /// least `-tol`, block sums at most capacity plus `tol`.
    pub fn in_polytope(&self, y: &[f64], tol: f64) -> bool {
        self.polytope_violation(y).0 <= tol
    }

    /// Largest constraint violation and the block it occurs in (coordinate
    /// violations are attributed to the coordinate's block).
    pub fn polytope_violation(&self, y: &[f64]) -> (f64, usize) {
        assert_eq!(y.len(), self.ground_size(), "polytope test dimension mismatch");
        let mut worst = 0.0f64;
        let mut at_block = 0;
        for (b, block) in self.blocks.iter().enumerate() {
            let mut sum = 0.0;
            for &e in block {
                sum += y[e];
                if -y[e] > worst {
                    worst = -y[e];
                    at_block = b;
                }
            }
            let excess = sum - f64::from(self.capacities[b]);
            if excess > worst {
                worst = excess;
                at_block = b;
            }
        }
        (worst, at_block)
    }

    /// The vertex of the block's local polytope slice most aligned with the
    /// gradient: the indicator of the block's best strictly-positive
    /// component, or the origin when no component is positive (the origin is
    /// always available and then dominates). Ties break to the lowest
    /// element index.
    pub fn linear_oracle(&self, block: usize, gradient: &[f64]) -> Result<FractionalPoint> {
        if gradient.len() != self.ground_size() {
            return Err(Error::DimensionMismatch {
                expected: self.ground_size(),
                actual: gradient.len(),
            });
        }
        let local: Vec<f64> = self.blocks[block].iter().map(|&e| gradient[e]).collect();
        let mut coords = vec![0.0; self.ground_size()];
        if let Some(e) = self.best_in_block(block, &local) {
            coords[e] = 1.0;
        }
        Ok(FractionalPoint::try_new(coords).expect("indicator is in the cube"))
    }

    /// Sparse form of [`Self::linear_oracle`]: `values[k]` is the gradient
    /// component of `block(index)[k]`.
    pub(crate) fn best_in_block(&self, block: usize, values: &[f64]) -> Option<usize> {
        let elems = &self.blocks[block];
        debug_assert_eq!(values.len(), elems.len());
        let mut best: Option<(usize, f64)> = None;
        for (&e, &v) in elems.iter().zip(values) {
            if v > 0.0 && best.is_none_or(|(_, bv)| v > bv) {
                best = Some((e, v));
            }
        }
        best.map(|(e, _)| e)
    }

    /// Number of one-or-none-per-block candidate solutions.
    pub fn enumeration_count(&self) -> u128 {
        self.blocks.iter().fold(1u128, |acc, b| acc.saturating_mul(b.len() as u128 + 1))
    }

    /// Iterates every independent set choosing at most one element per
    /// block, in lexicographic odometer order (none before ascending
    /// elements, earlier blocks most significant). Unit capacities only.
    pub fn independent_sets(&self) -> IndependentSets<'_> {
        IndependentSets { matroid: self, state: vec![0; self.blocks.len()], done: false }
    }

    /// Diameter of the matroid polytope, attained at vertex pairs. Blocks
    /// are independent, so the squared diameter decomposes per block: 2 when
    /// a block can swap between two elements, 1 when it only toggles its
    /// single element. Unit capacities only.
    pub fn vertex_diameter(&self) -> Result<f64> {
        self.require_unit_capacity()?;
        let sq: f64 = self.blocks.iter().map(|b| if b.len() >= 2 { 2.0 } else { 1.0 }).sum();
        Ok(sq.sqrt())
    }
}

/// See [`PartitionMatroid::independent_sets`].
pub struct IndependentSets<'a> {
    matroid: &'a PartitionMatroid,
    /// Per block: 0 = skip the block, k = take `block[k-1]`.
    state: Vec<usize>,
    done: bool,
}

impl Iterator for IndependentSets<'_> {
    type Item = Subset;

    fn next(&mut self) -> Option<Subset> {
        if self.done {
            return None;
        }
        let mut s = Subset::empty(self.matroid.ground_size());
        for (b, &choice) in self.state.iter().enumerate() {
            if choice > 0 {
                s.insert(self.matroid.blocks[b][choice - 1]);
            }
        }
        // Advance the odometer, last block fastest.
        for b in (0..self.state.len()).rev() {
            self.state[b] += 1;
            if self.state[b] <= self.matroid.blocks[b].len() {
                return Some(s);
            }
            self.state[b] = 0;
        }
        self.done = true;
        Some(s)
    }
}

/// How residual fractional mass is resolved after merging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundingMode {
    /// Keep the surviving element with probability equal to its mass;
    /// preserves all expectations (the default).
    Unbiased,
    /// Keep the surviving element whenever it has positive mass. Never
    /// loses value for monotone objectives, but biases marginals upward.
    MonotoneGreedy,
}

/// Outcome of a rounding call: the per-block choices plus which blocks had
/// to be rescaled because numerical drift pushed their mass above capacity.
#[derive(Debug, Clone)]
pub struct Rounding {
    pub chosen: Vec<Option<usize>>,
    pub rescaled_blocks: Vec<usize>,
}

impl Rounding {
    pub fn subset(&self, ground_size: usize) -> Subset {
        let mut s = Subset::empty(ground_size);
        for e in self.chosen.iter().flatten() {
            s.insert(*e);
        }
        s
    }
}

/// Rounds a polytope point to an independent set (unit capacities only).
///
/// Rejects points outside the polytope beyond [`POLYTOPE_TOL`]. Within each
/// block the two lowest-index fractional coordinates are merged repeatedly
/// until one survivor holds the whole block mass; the survivor is selected
/// per [`RoundingMode`]. Blocks are processed in order against a stream
/// derived from `seed`, so the result is a pure function of
/// `(matroid, point, seed, mode)`.
pub fn swap_round(
    matroid: &PartitionMatroid,
    point: &[f64],
    seed: u64,
    mode: RoundingMode,
) -> Result<Rounding> {
    matroid.require_unit_capacity()?;
    if point.len() != matroid.ground_size() {
        return Err(Error::DimensionMismatch {
            expected: matroid.ground_size(),
            actual: point.len(),
        });
    }
    let (violation, block) = matroid.polytope_violation(point);
    if violation > POLYTOPE_TOL {
        return Err(Error::OutsidePolytope { residual: violation, block });
    }

    let mut rng = substream(seed, &[Purpose::Rounding as u64]);
    let mut chosen = Vec::with_capacity(matroid.n_blocks());
    let mut rescaled_blocks = Vec::new();
    use rand::Rng;

    for (b, block) in matroid.blocks.iter().enumerate() {
        // (element, mass), ascending by element; drop nonpositive noise.
        let mut frac: Vec<(usize, f64)> =
            block.iter().map(|&e| (e, point[e])).filter(|&(_, m)| m > 0.0).collect();
        let mass: f64 = frac.iter().map(|&(_, m)| m).sum();
        if mass > 1.0 {
            debug_assert!(mass <= 1.0 + RESCALE_LIMIT);
            for f in &mut frac {
                f.1 /= mass;
            }
            rescaled_blocks.push(b);
        }
        while frac.len() > 1 {
            let (keep_a, move_b) = (frac[0], frac[1]);
            let p_keep_a = keep_a.1 / (keep_a.1 + move_b.1);
            if rng.random::<f64>() < p_keep_a {
                frac[0].1 += move_b.1;
                frac.remove(1);
            } else {
                frac[1].1 += keep_a.1;
                frac.remove(0);
            }
        }
        let pick = match frac.first() {
            None => None,
            Some(&(e, m)) => match mode {
                RoundingMode::Unbiased => (rng.random::<f64>() < m).then_some(e),
                RoundingMode::MonotoneGreedy => (m > 0.0).then_some(e),
            },
        };
        chosen.push(pick);
    }
    Ok(Rounding { chosen, rescaled_blocks })
}

/// A feasible solution: at most one chosen element per block, plus its
/// objective value.
#[derive(Debug, Clone, Serialize)]
pub struct DiscreteSolution {
    ground_size: usize,
    pub chosen: Vec<Option<usize>>,
    pub value: f64,
}

impl DiscreteSolution {
    pub fn from_chosen(
        matroid: &PartitionMatroid,
        chosen: Vec<Option<usize>>,
        f: &dyn SetFunction,
    ) -> Self {
        debug_assert_eq!(chosen.len(), matroid.n_blocks());
        let ground_size = matroid.ground_size();
        let mut s = Subset::empty(ground_size);
        for e in chosen.iter().flatten() {
            s.insert(*e);
        }
        debug_assert!(matroid.is_independent(&s));
        let value = f.evaluate(&s);
        Self { ground_size, chosen, value }
    }

    pub fn set(&self) -> Subset {
        let mut s = Subset::empty(self.ground_size);
        for e in self.chosen.iter().flatten() {
            s.insert(*e);
        }
        s
    }
}
