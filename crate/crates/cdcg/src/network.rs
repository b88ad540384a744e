//! Communication graphs, consensus weight matrices, and the synchronous
//! exchange step.
//!
//! Agents sit on a connected bidirectional graph and average their state
//! vectors through a weight matrix `W` that must be nonnegative, symmetric,
//! doubly stochastic, supported on the graph (plus self-loops), and have
//! eigenvalue 1 with multiplicity one. The second-largest eigenvalue
//! magnitude `beta < 1` governs how fast repeated exchanges contract toward
//! the common mean.
//!
//! The Metropolis construction `w_ij = 1 / (1 + max(deg_i, deg_j))` meets
//! all of these requirements on any connected graph using only neighbor
//! degrees. Entries are accumulated in exact rational arithmetic and
//! rounded to `f64` once, so structurally equal weights compare equal
//! bit-for-bit (a complete graph yields every entry exactly `1/n`).

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::rng::substream;
use crate::{Error, Result};

/// Row/column sums must match 1 within this tolerance.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Eigenvalues within this distance of 1 count toward its multiplicity.
pub const EIGENVALUE_ONE_TOL: f64 = 1e-10;

/// Symmetry tolerance for externally supplied matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Undirected communication graph over agents `0..n`. Connectivity is
/// enforced at construction; consensus over a disconnected graph cannot
/// reach a common value.
#[derive(Debug, Clone)]
pub struct CommGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl CommGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGround);
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut normalized: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidElement { element: a.max(b), size: n });
            }
            if a == b {
                return Err(Error::GraphParse {
                    line: 0,
                    reason: format!("self-loop at node {a}"),
                });
            }
            let e = (a.min(b), a.max(b));
            if !normalized.contains(&e) {
                normalized.push(e);
                adjacency[e.0].push(e.1);
                adjacency[e.1].push(e.0);
            }
        }
        normalized.sort_unstable();
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        let graph = Self { n, edges: normalized, adjacency };
        let reachable = graph.component_of(0);
        if reachable.len() != n {
            return Err(Error::Disconnected(reachable));
        }
        Ok(graph)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Self::new(n, edges)
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|i| (i - 1, i)).collect())
    }

    /// A random connected graph: a random attachment tree plus `extra_edges`
    /// additional distinct edges, all drawn from the given seed.
    pub fn random_connected(n: usize, extra_edges: usize, seed: u64) -> Result<Self> {
        let mut rng = substream(seed, &[0x67726170]);
        let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.random_range(0..i), i)).collect();
        let mut budget = extra_edges;
        let mut attempts = 0;
        while budget > 0 && attempts < 50 * extra_edges.max(1) && n >= 2 {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            attempts += 1;
            if a != b {
                let e = (a.min(b), a.max(b));
                if !edges.contains(&e) {
                    edges.push(e);
                    budget -= 1;
                }
            }
        }
        Self::new(n, edges)
    }

    /// Edge-list text: first line the node count, then one `i j` pair per
    /// line (0-based). Blank lines are ignored.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (first_no, first) = lines
            .next()
            .ok_or_else(|| Error::GraphParse { line: 1, reason: "empty input".into() })?;
        let n: usize = first.parse().map_err(|_| Error::GraphParse {
            line: first_no,
            reason: format!("expected node count, found `{first}`"),
        })?;
        let mut edges = Vec::new();
        for (line, l) in lines {
            let mut parts = l.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<usize> {
                tok.ok_or_else(|| Error::GraphParse {
                    line,
                    reason: "expected `i j`".into(),
                })?
                .parse()
                .map_err(|_| Error::GraphParse {
                    line,
                    reason: format!("expected integer in `{l}`"),
                })
            };
            let a = parse(parts.next())?;
            let b = parse(parts.next())?;
            if parts.next().is_some() {
                return Err(Error::GraphParse {
                    line,
                    reason: format!("trailing tokens in `{l}`"),
                });
            }
            edges.push((a, b));
        }
        Self::new(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    fn component_of(&self, start: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        let mut queue = vec![start];
        seen[start] = true;
        while let Some(v) = queue.pop() {
            for &u in &self.adjacency[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push(u);
                }
            }
        }
        (0..self.n).filter(|&v| seen[v]).collect()
    }
}

/// Validated consensus weight matrix together with its spectral gap
/// parameter `beta` (second-largest eigenvalue magnitude).
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    n: usize,
    entries: Vec<f64>,
    beta: f64,
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    // Small numerators and denominators convert exactly and divide with a
    // single correctly-rounded IEEE operation.
    if let (Some(n), Some(d)) = (r.numer().to_i64(), r.denom().to_i64()) {
        return n as f64 / d as f64;
    }
    r.to_f64().unwrap_or(f64::NAN)
}

impl WeightMatrix {
    /// Metropolis weights for a connected graph.
    pub fn metropolis(graph: &CommGraph) -> Result<Self> {
        let n = graph.n();
        let one = BigRational::one();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            let mut row_sum = BigRational::zero();
            for &j in graph.neighbors(i) {
                let denom = 1 + graph.degree(i).max(graph.degree(j));
                let w = BigRational::new(BigInt::one(), BigInt::from(denom));
                entries[i * n + j] = ratio_to_f64(&w);
                row_sum += w;
            }
            debug_assert!(!row_sum.is_negative() && row_sum <= one);
            entries[i * n + i] = ratio_to_f64(&(&one - &row_sum));
        }
        Self::from_entries(n, entries, Some(graph))
    }

    /// Validates an explicit matrix: nonnegative, symmetric, doubly
    /// stochastic, zero off the graph support, eigenvalue 1 simple, and
    /// `beta < 1`.
    pub fn from_entries(n: usize, entries: Vec<f64>, graph: Option<&CommGraph>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, actual: entries.len() });
        }
        for (k, &w) in entries.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidWeights(format!(
                    "entry ({}, {}) = {w} is not a nonnegative finite value",
                    k / n,
                    k % n
                )));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (entries[i * n + j] - entries[j * n + i]).abs() > SYMMETRY_TOL {
                    return Err(Error::InvalidWeights(format!(
                        "asymmetric at ({i}, {j}): {} vs {}",
                        entries[i * n + j],
                        entries[j * n + i]
                    )));
                }
            }
        }
        if let Some(g) = graph {
            for i in 0..n {
                for j in 0..n {
                    let off_support = i != j && !g.neighbors(i).contains(&j);
                    if off_support && entries[i * n + j] != 0.0 {
                        return Err(Error::InvalidWeights(format!(
                            "nonzero weight {} between non-neighbors ({i}, {j})",
                            entries[i * n + j]
                        )));
                    }
                }
            }
        }
        for i in 0..n {
            let row: f64 = entries[i * n..(i + 1) * n].iter().sum();
            let col: f64 = (0..n).map(|j| entries[j * n + i]).sum();
            if (row - 1.0).abs() > STOCHASTIC_TOL || (col - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidWeights(format!(
                    "row/column {i} sums to {row}/{col}, expected 1"
                )));
            }
        }
        let beta = spectral_beta(n, &entries)?;
        Ok(Self { n, entries, beta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// One synchronous averaging round: agent `i` receives
    /// `sum_j w_ij * states[j]`. Only edges with positive weight carry a
    /// message; the input snapshot is read-only, so outputs are independent
    /// of evaluation order.
    pub fn exchange(&self, states: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if states.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: states.len() });
        }
        let dim = states.first().map_or(0, Vec::len);
        for s in states {
            if s.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: s.len() });
            }
        }
        let mut out = vec![vec![0.0; dim]; self.n];
        for (i, mixed) in out.iter_mut().enumerate() {
            for (j, state) in states.iter().enumerate() {
                let w = self.entries[i * self.n + j];
                if w > 0.0 {
                    for (m, &s) in mixed.iter_mut().zip(state) {
                        *m += w * s;
                    }
                }
            }
        }
        Ok(out)
    }

    /// CSV rendering (one row per line), for offline inspection.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|w| format!("{w}")).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Second-largest eigenvalue magnitude of a symmetric stochastic matrix,
/// excluding a single eigenvalue at 1. Rejects asymmetric input and spectra
/// whose gap has collapsed (`beta >= 1 - 1e-12`), dumping the spectrum in
/// the error.
pub fn spectral_beta(n: usize, entries: &[f64]) -> Result<f64> {
    if entries.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, actual: entries.len() });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (entries[i * n + j] - entries[j * n + i]).abs() > SYMMETRY_TOL {
                return Err(Error::InvalidWeights(format!(
                    "spectral gap requires a symmetric matrix; ({i}, {j}) differs"
                )));
            }
        }
    }
    let eigen = DMatrix::from_row_slice(n, n, entries).symmetric_eigen();
    let mut values: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let near_one = values.iter().filter(|&&v| (v - 1.0).abs() <= EIGENVALUE_ONE_TOL).count();
    if near_one != 1 {
        return Err(Error::InvalidWeights(format!(
            "eigenvalue 1 has multiplicity {near_one}; spectrum: {values:?}"
        )));
    }
    let top = values
        .iter()
        .position(|&v| (v - 1.0).abs() <= EIGENVALUE_ONE_TOL)
        .expect("counted above");
    let beta = values
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != top)
        .map(|(_, &v)| v.abs())
        .fold(0.0f64, f64::max);
    if beta >= 1.0 - 1e-12 {
        return Err(Error::InvalidWeights(format!(
            "spectral gap vanished: beta = {beta}; spectrum: {values:?}"
        )));
    }
    Ok(beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_weights_are_exactly_one_over_n() {
        for n in 1..=12 {
            let w = WeightMatrix::metropolis(&CommGraph::complete(n).unwrap()).unwrap();
            let expected = 1.0 / n as f64;
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(w.entry(i, j), expected, "n={n} entry ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn path_three_matches_hand_computed_rows() {
        let w = WeightMatrix::metropolis(&CommGraph::path(3).unwrap()).unwrap();
        let third = 1.0 / 3.0;
        assert_eq!(w.row(0), &[2.0 / 3.0, third, 0.0]);
        assert_eq!(w.row(1), &[third, third, third]);
        assert_eq!(w.row(2), &[0.0, third, 2.0 / 3.0]);
        // Spectrum of this matrix is {1, 2/3, 0}.
        assert!((w.beta() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_node_graph_gives_identity_weight() {
        let w = WeightMatrix::metropolis(&CommGraph::complete(1).unwrap()).unwrap();
        assert_eq!(w.entry(0, 0), 1.0);
        assert_eq!(w.beta(), 0.0);
    }

    #[test]
    fn rank_one_averaging_matrix_has_zero_beta() {
        let n = 4;
        let entries = vec![0.25; 16];
        assert!(spectral_beta(n, &entries).unwrap().abs() < 1e-12);
    }

    #[test]
    fn asymmetric_matrices_are_rejected() {
        let entries = vec![0.5, 0.5, 0.3, 0.7];
        assert!(matches!(spectral_beta(2, &entries), Err(Error::InvalidWeights(_))));
    }

    #[test]
    fn identity_on_two_nodes_has_no_spectral_gap() {
        // Eigenvalue 1 with multiplicity two: consensus can never mix.
        let entries = vec![1.0, 0.0, 0.0, 1.0];
        assert!(matches!(spectral_beta(2, &entries), Err(Error::InvalidWeights(_))));
    }

    #[test]
    fn disconnected_graphs_are_rejected_with_their_component() {
        let err = CommGraph::new(4, vec![(0, 1), (2, 3)]);
        match err {
            Err(Error::Disconnected(component)) => assert_eq!(component, vec![0, 1]),
            other => panic!("expected disconnection, got {other:?}"),
        }
    }

    #[test]
    fn exchange_fixed_point_and_mean() {
        let w = WeightMatrix::metropolis(&CommGraph::path(3).unwrap()).unwrap();
        let v = vec![1.5, -2.0, 0.25];
        let states = vec![v.clone(), v.clone(), v.clone()];
        for out in w.exchange(&states).unwrap() {
            for (a, b) in out.iter().zip(&v) {
                assert!((a - b).abs() < 1e-15);
            }
        }

        let avg = WeightMatrix::from_entries(3, vec![1.0 / 3.0; 9], None).unwrap();
        let states = vec![vec![3.0], vec![6.0], vec![9.0]];
        let out = avg.exchange(&states).unwrap();
        for o in out {
            assert!((o[0] - 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exchange_of_one_hot_states_reads_off_matrix_rows() {
        let w = WeightMatrix::metropolis(&CommGraph::path(3).unwrap()).unwrap();
        let states: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|k| if k == i { 1.0 } else { 0.0 }).collect())
            .collect();
        let out = w.exchange(&states).unwrap();
        // Oracle: plain matrix-vector products.
        for (i, row) in out.iter().enumerate() {
            for k in 0..3 {
                let direct: f64 = (0..3).map(|j| w.entry(i, j) * states[j][k]).sum();
                assert!((row[k] - direct).abs() < 1e-15);
                assert!((row[k] - w.entry(i, k)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exchange_preserves_the_mean() {
        let w = WeightMatrix::metropolis(&CommGraph::random_connected(6, 4, 11).unwrap()).unwrap();
        let states: Vec<Vec<f64>> =
            (0..6).map(|i| (0..4).map(|k| ((i * 7 + k * 3) % 5) as f64 - 2.0).collect()).collect();
        let before: Vec<f64> =
            (0..4).map(|k| states.iter().map(|s| s[k]).sum::<f64>() / 6.0).collect();
        let out = w.exchange(&states).unwrap();
        let after: Vec<f64> = (0..4).map(|k| out.iter().map(|s| s[k]).sum::<f64>() / 6.0).collect();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn repeated_exchange_contracts_at_rate_beta() {
        let w = WeightMatrix::metropolis(&CommGraph::path(3).unwrap()).unwrap();
        let mut states = vec![vec![1.0, 4.0], vec![-3.0, 0.0], vec![5.0, -1.0]];
        let deviation = |states: &[Vec<f64>]| -> f64 {
            let n = states.len();
            let dim = states[0].len();
            let mean: Vec<f64> =
                (0..dim).map(|k| states.iter().map(|s| s[k]).sum::<f64>() / n as f64).collect();
            states
                .iter()
                .map(|s| s.iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                .sum::<f64>()
                .sqrt()
        };
        let d0 = deviation(&states);
        for t in 1..=25 {
            states = w.exchange(&states).unwrap();
            let dt = deviation(&states);
            assert!(
                dt <= w.beta().powi(t) * d0 + 1e-9,
                "round {t}: {dt} > {}",
                w.beta().powi(t) * d0
            );
        }
    }

    #[test]
    fn metropolis_validates_on_random_connected_graphs() {
        for seed in 0..10 {
            let n = 2 + (seed as usize % 7);
            let g = CommGraph::random_connected(n, seed as usize % 5, 1000 + seed).unwrap();
            let w = WeightMatrix::metropolis(&g).unwrap();
            assert!(w.beta() < 1.0);
        }
    }

    #[test]
    fn edge_list_roundtrip() {
        let text = "3\n0 1\n1 2\n";
        let g = CommGraph::from_edge_list(text).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert!(CommGraph::from_edge_list("3\n0 1\nbogus 2\n").is_err());
        assert!(CommGraph::from_edge_list("").is_err());
    }
}
