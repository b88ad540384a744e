//! Property tests for the structural invariants: things that must hold for
//! every input, not just the worked examples.

use std::sync::Arc;

use proptest::collection::vec;
use proptest::prelude::*;

use cdcg::matroid::{swap_round, PartitionMatroid, RoundingMode};
use cdcg::multilinear::{ExtensionEvaluator, FractionalPoint};
use cdcg::network::{CommGraph, WeightMatrix};
use cdcg::objective::{
    check_submodular, marginal, GroundSet, Modular, SetFunction, Subset, WeightedCoverage,
};

/// An arbitrary small weighted-coverage instance.
fn coverage_strategy(max_ground: usize) -> impl Strategy<Value = WeightedCoverage> {
    (2usize..=max_ground, 3usize..=8).prop_flat_map(|(m, universe)| {
        vec(vec(0usize..universe, 0..=universe), m)
            .prop_map(move |covers| WeightedCoverage::new(universe, covers).unwrap())
    })
}

/// An arbitrary partition matroid over `2..=max_ground` elements with
/// contiguous nonempty blocks.
fn matroid_strategy(max_ground: usize) -> impl Strategy<Value = PartitionMatroid> {
    (2usize..=max_ground)
        .prop_flat_map(|m| (Just(m), vec(1usize..=3, 1..=m)))
        .prop_map(|(m, sizes)| {
            let mut blocks = Vec::new();
            let mut next = 0;
            for s in sizes {
                if next >= m {
                    break;
                }
                let end = (next + s).min(m);
                blocks.push((next..end).collect::<Vec<_>>());
                next = end;
            }
            if next < m {
                blocks.push((next..m).collect());
            }
            PartitionMatroid::new(GroundSet::new(m).unwrap(), blocks).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The quartet definition of submodularity
    /// (`f(A and B) + f(A or B) <= f(A) + f(B)` for all pairs) must agree
    /// with the diminishing-returns checker. Coverage functions satisfy
    /// both; the comparison is between two independently coded criteria.
    #[test]
    fn submodularity_checkers_agree(f in coverage_strategy(7)) {
        let m = f.ground_size();
        let dr_holds = check_submodular(&f, 12).unwrap().holds();

        let mut quartet_holds = true;
        'outer: for a in 0u64..1 << m {
            for b in 0u64..1 << m {
                let fa = f.evaluate(&Subset::from_mask(m, a));
                let fb = f.evaluate(&Subset::from_mask(m, b));
                let fi = f.evaluate(&Subset::from_mask(m, a & b));
                let fu = f.evaluate(&Subset::from_mask(m, a | b));
                if fi + fu > fa + fb + 1e-9 {
                    quartet_holds = false;
                    break 'outer;
                }
            }
        }
        prop_assert_eq!(dr_holds, quartet_holds);
        prop_assert!(dr_holds, "coverage functions are submodular");
    }

    /// Marginals of a modular function equal the element weight whenever the
    /// element is absent, and zero otherwise.
    #[test]
    fn modular_marginals_are_the_weights(
        weights in vec(0.0f64..10.0, 1..10),
        base_bits in any::<u64>(),
        element in 0usize..10,
    ) {
        let m = weights.len();
        prop_assume!(element < m);
        let f = Modular::new(weights.clone()).unwrap();
        let base = Subset::from_mask(m, base_bits & ((1 << m) - 1));
        let got = marginal(&f, element, &base).unwrap();
        if base.contains(element) {
            prop_assert_eq!(got, 0.0);
        } else {
            // Two separate partial sums cancel to the weight only up to
            // float rounding.
            let scale = 1.0 + weights.iter().sum::<f64>();
            prop_assert!((got - weights[element]).abs() <= 1e-12 * scale);
        }
    }

    /// The multilinear extension agrees with the set function at every
    /// vertex of the cube, exactly.
    #[test]
    fn extension_is_exact_at_vertices(f in coverage_strategy(7), mask in any::<u64>()) {
        let m = f.ground_size();
        let s = Subset::from_mask(m, mask & ((1 << m) - 1));
        let f = Arc::new(f);
        let e = ExtensionEvaluator::exact(f.clone()).unwrap();
        prop_assert_eq!(e.eval(&FractionalPoint::indicator(&s)).unwrap(), f.evaluate(&s));
    }

    /// Every exchange preserves the state mean to near machine precision.
    #[test]
    fn exchange_preserves_means(
        n in 2usize..7,
        extra in 0usize..4,
        seed in any::<u64>(),
        values in vec(-100.0f64..100.0, 7 * 3),
    ) {
        let graph = CommGraph::random_connected(n, extra, seed).unwrap();
        let w = WeightMatrix::metropolis(&graph).unwrap();
        let states: Vec<Vec<f64>> =
            (0..n).map(|i| values[i * 3..(i + 1) * 3].to_vec()).collect();
        let out = w.exchange(&states).unwrap();
        for k in 0..3 {
            let before: f64 = states.iter().map(|s| s[k]).sum::<f64>() / n as f64;
            let after: f64 = out.iter().map(|s| s[k]).sum::<f64>() / n as f64;
            prop_assert!((before - after).abs() <= 1e-12 * (1.0 + before.abs()));
        }
    }

    /// Rounding any polytope point yields an independent set, in both modes.
    #[test]
    fn rounding_is_always_feasible(
        matroid in matroid_strategy(8),
        raw in vec(0.0f64..1.0, 8),
        masses in vec(0.0f64..1.0, 8),
        seed in any::<u64>(),
        greedy in any::<bool>(),
    ) {
        let m = matroid.ground_size();
        // Scale each block to a random feasible mass.
        let mut y = vec![0.0; m];
        for b in 0..matroid.n_blocks() {
            let total: f64 = matroid.block(b).iter().map(|&e| raw[e]).sum();
            if total > 0.0 {
                for &e in matroid.block(b) {
                    y[e] = raw[e] / total * masses[b.min(masses.len() - 1)];
                }
            }
        }
        prop_assert!(matroid.in_polytope(&y, 1e-9));
        let mode = if greedy { RoundingMode::MonotoneGreedy } else { RoundingMode::Unbiased };
        let rounding = swap_round(&matroid, &y, seed, mode).unwrap();
        prop_assert!(matroid.is_independent(&rounding.subset(m)));
    }

    /// The linear oracle always returns a vertex of the block slice:
    /// support inside the block, mass at most one.
    #[test]
    fn oracle_output_is_a_block_vertex(
        matroid in matroid_strategy(8),
        gradient in vec(-5.0f64..5.0, 8),
    ) {
        let m = matroid.ground_size();
        for b in 0..matroid.n_blocks() {
            let v = matroid.linear_oracle(b, &gradient[..m]).unwrap();
            let mass: f64 = v.coords().iter().sum();
            prop_assert!(mass == 0.0 || mass == 1.0);
            for (e, &c) in v.coords().iter().enumerate() {
                if c != 0.0 {
                    prop_assert_eq!(matroid.block_of(e), b);
                }
            }
        }
    }
}
