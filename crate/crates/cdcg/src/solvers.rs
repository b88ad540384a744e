//! Solvers for submodular maximization under a distributed partition
//! matroid, plus numerical verification of their convergence guarantees.
//!
//! [`cdcg_run`] is the consensus continuous-greedy method. Every agent keeps
//! a fractional iterate over the whole ground set, initialized at the
//! origin. Each of the `T` synchronized rounds it (1) takes the multilinear
//! gradient at its own iterate, restricted to its block, (2) asks the
//! matroid's linear oracle for the best block vertex, and (3) replaces its
//! iterate with the weighted neighborhood average plus `n/T` times the
//! oracle vertex. After `T` rounds the configured target vector is swap
//! rounded to a feasible set. Gradient consensus over the weight matrix is
//! what lets every agent ascend the global objective while only ever
//! selecting from its own block.
//!
//! [`sga_run`] is the sequential greedy baseline (agents pick marginal-best
//! actions in order; half-approximate), and [`brute_force`] enumerates the
//! one-per-block choice space outright for use as a test oracle.
//!
//! [`check_bounds`] verifies, on a finished trace with measured constants:
//! per-round consensus residuals against `n^(3/2) D / (T (1 - beta))`, mean
//! drift against `D / T`, polytope feasibility of the running mean, and the
//! final `(1 - 1/e)`-approximation inequality with its `O(1/T)` error
//! bracket.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::matroid::{
    swap_round, DiscreteSolution, PartitionMatroid, RoundingMode, POLYTOPE_TOL,
};
use crate::multilinear::{ConstantsReport, EvaluatorKind, ExtensionEvaluator, FractionalPoint};
use crate::network::WeightMatrix;
use crate::objective::{SetFunction, Subset};
use crate::rng::{Context, Purpose};
use crate::{Error, Result};

/// Cap on brute-force enumeration size.
pub const BRUTE_FORCE_CAP: u128 = 10_000_000;

/// Slack added to every bound comparison.
pub const BOUND_SLACK: f64 = 1e-9;

/// Tolerance for the running-mean recursion identity.
const MEAN_RECURSION_TOL: f64 = 1e-12;

/// Configuration for one [`cdcg_run`].
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct CdcgConfig {
    /// Number of synchronized rounds `T`.
    pub rounds: usize,
    pub evaluator: EvaluatorKind,
    pub seed: u64,
    pub rounding_target: RoundingTarget,
    pub rounding_mode: RoundingMode,
    /// Verify the mean-recursion identity and mean feasibility every round,
    /// failing the run on violation.
    pub check_invariants: bool,
}

impl CdcgConfig {
    pub fn exact(rounds: usize, seed: u64) -> Self {
        Self {
            rounds,
            evaluator: EvaluatorKind::Exact,
            seed,
            rounding_target: RoundingTarget::ConsensusMean,
            rounding_mode: RoundingMode::Unbiased,
            check_invariants: true,
        }
    }

    pub fn monte_carlo(rounds: usize, samples: u32, seed: u64) -> Self {
        Self { evaluator: EvaluatorKind::MonteCarlo { samples }, ..Self::exact(rounds, seed) }
    }
}

/// Which vector is rounded after the final round.
///
/// The running mean is guaranteed to stay inside the matroid polytope, so it
/// is the default. Per-node mode instead has every agent round its own block
/// of its own final iterate (with block mass capped at one), mirroring a
/// fully local post-processing step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundingTarget {
    ConsensusMean,
    PerNode,
}

/// Snapshot of one synchronized round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    /// Local iterates, one per agent.
    pub node_points: Vec<Vec<f64>>,
    /// Support of each agent's ascent vertex: the chosen block element, or
    /// none when the oracle returned the origin.
    pub directions: Vec<Option<usize>>,
    /// Mean of the local iterates.
    pub mean: Vec<f64>,
    /// Multilinear value at the (clamped) mean.
    pub mean_objective: f64,
    /// `max_i || y_i - mean ||`.
    pub consensus_residual: f64,
    /// `|| mean_t - mean_{t-1} ||`.
    pub mean_drift: f64,
    /// Coordinates clamped back into the cube before gradient evaluation.
    pub clamp_events: usize,
    /// Whether the mean lies in the matroid polytope (within tolerance).
    pub mean_feasible: bool,
}

/// Full history of a [`cdcg_run`]: one record per round including round 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub agents: usize,
    pub rounds: usize,
    pub exact: bool,
    pub records: Vec<RoundRecord>,
    /// Multilinear value at each agent's final (clamped) iterate.
    pub final_node_objectives: Vec<f64>,
    pub total_clamp_events: usize,
    /// Blocks rescaled during the final rounding step.
    pub rescaled_blocks: Vec<usize>,
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn mean_of(states: &[Vec<f64>]) -> Vec<f64> {
    let n = states.len() as f64;
    let dim = states[0].len();
    let mut m = vec![0.0; dim];
    for s in states {
        for (mk, &sk) in m.iter_mut().zip(s) {
            *mk += sk;
        }
    }
    for mk in &mut m {
        *mk /= n;
    }
    m
}

/// Runs the consensus continuous-greedy solver.
///
/// Requires one matroid block per agent of the weight matrix and unit
/// capacities. Identical `(instance, config)` inputs produce bit-identical
/// traces regardless of how many worker threads execute the per-agent
/// computations.
pub fn cdcg_run(
    f: Arc<dyn SetFunction>,
    matroid: &PartitionMatroid,
    weights: &WeightMatrix,
    config: &CdcgConfig,
) -> Result<(DiscreteSolution, SolverTrace)> {
    matroid.require_unit_capacity()?;
    if config.rounds == 0 {
        return Err(Error::Config { field: "rounds".into(), reason: "must be at least 1".into() });
    }
    let n = matroid.n_blocks();
    if weights.n() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: weights.n() });
    }
    let dim = f.ground_size();
    if matroid.ground_size() != dim {
        return Err(Error::DimensionMismatch { expected: dim, actual: matroid.ground_size() });
    }
    let evaluator = ExtensionEvaluator::from_kind(f.clone(), config.evaluator, config.seed)?;

    let t_rounds = config.rounds;
    let step = n as f64 / t_rounds as f64;
    let mut states: Vec<Vec<f64>> = vec![vec![0.0; dim]; n];
    let mut records: Vec<RoundRecord> = Vec::with_capacity(t_rounds + 1);
    let mut total_clamp_events = 0;

    let zero_mean = vec![0.0; dim];
    let zero_point = FractionalPoint::zeros(dim);
    records.push(RoundRecord {
        node_points: states.clone(),
        directions: vec![None; n],
        mean: zero_mean,
        mean_objective: evaluator.eval_ctx(&zero_point, &Context::new(0, 0, Purpose::Eval))?,
        consensus_residual: 0.0,
        mean_drift: 0.0,
        clamp_events: 0,
        mean_feasible: true,
    });

    for t in 1..=t_rounds {
        // Gradient and oracle per agent, on the frozen previous-round
        // snapshot. Order-preserving collect keeps the result independent
        // of the worker count.
        let per_agent: Vec<Result<(Option<usize>, usize)>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let (point, clamps) = FractionalPoint::clamped(&states[i]);
                let block = matroid.block(i);
                let g =
                    evaluator.grad_indices(&point, block, &Context::new(i, t, Purpose::Gradient))?;
                Ok((matroid.best_in_block(i, &g), clamps))
            })
            .collect();
        let mut directions = Vec::with_capacity(n);
        let mut clamp_events = 0;
        for r in per_agent {
            let (v, clamps) = r?;
            directions.push(v);
            clamp_events += clamps;
        }
        total_clamp_events += clamp_events;

        let mut mixed = weights.exchange(&states)?;
        for (i, &v) in directions.iter().enumerate() {
            if let Some(e) = v {
                mixed[i][e] += step;
            }
        }
        let prev_mean = records[t - 1].mean.clone();
        states = mixed;

        let mean = mean_of(&states);
        if config.check_invariants {
            // The mean must follow mean_{t} = mean_{t-1} + (1/T) sum_i v_i.
            let mut expected = prev_mean.clone();
            for &v in directions.iter().flatten() {
                expected[v] += 1.0 / t_rounds as f64;
            }
            let worst = mean
                .iter()
                .zip(&expected)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            if worst > MEAN_RECURSION_TOL {
                return Err(Error::InvariantViolated {
                    round: t,
                    detail: format!("mean recursion residual {worst:.3e}"),
                });
            }
        }
        let mean_feasible = matroid.in_polytope(&mean, POLYTOPE_TOL);
        if config.check_invariants && !mean_feasible {
            let (residual, block) = matroid.polytope_violation(&mean);
            return Err(Error::InvariantViolated {
                round: t,
                detail: format!("mean left the polytope (violation {residual:.3e}, block {block})"),
            });
        }
        let (mean_point, _) = FractionalPoint::clamped(&mean);
        let mean_objective = evaluator.eval_ctx(&mean_point, &Context::new(0, t, Purpose::Eval))?;
        let consensus_residual =
            states.iter().map(|s| l2(s, &mean)).fold(0.0f64, f64::max);
        let mean_drift = l2(&mean, &prev_mean);

        records.push(RoundRecord {
            node_points: states.clone(),
            directions,
            mean,
            mean_objective,
            consensus_residual,
            mean_drift,
            clamp_events,
            mean_feasible,
        });
    }

    let final_node_objectives: Vec<f64> = states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let (point, _) = FractionalPoint::clamped(s);
            evaluator.eval_ctx(&point, &Context::new(i, t_rounds + 1, Purpose::Eval))
        })
        .collect::<Result<_>>()?;

    let target = match config.rounding_target {
        RoundingTarget::ConsensusMean => records[t_rounds].mean.clone(),
        RoundingTarget::PerNode => {
            // Each agent contributes its own block of its own iterate,
            // clipped to the cube and capped at unit block mass.
            let mut z = vec![0.0; dim];
            for (i, s) in states.iter().enumerate() {
                let block = matroid.block(i);
                let mass: f64 = block.iter().map(|&e| s[e].max(0.0)).sum();
                let scale = if mass > 1.0 { 1.0 / mass } else { 1.0 };
                for &e in block {
                    z[e] = s[e].max(0.0) * scale;
                }
            }
            z
        }
    };
    let rounding = swap_round(matroid, &target, config.seed, config.rounding_mode)?;
    let solution = DiscreteSolution::from_chosen(matroid, rounding.chosen, f.as_ref());

    let trace = SolverTrace {
        agents: n,
        rounds: t_rounds,
        exact: evaluator.is_exact(),
        records,
        final_node_objectives,
        total_clamp_events,
        rescaled_blocks: rounding.rescaled_blocks,
    };
    Ok((solution, trace))
}

/// Sequential greedy: in `order` (default `0..n`), each agent adds its
/// marginal-best block element if the marginal is strictly positive, ties
/// to the lowest element index.
pub fn sga_run(
    f: &dyn SetFunction,
    matroid: &PartitionMatroid,
    order: Option<&[usize]>,
) -> Result<DiscreteSolution> {
    matroid.require_unit_capacity()?;
    let n = matroid.n_blocks();
    if f.ground_size() != matroid.ground_size() {
        return Err(Error::DimensionMismatch {
            expected: matroid.ground_size(),
            actual: f.ground_size(),
        });
    }
    let default_order: Vec<usize> = (0..n).collect();
    let order = order.unwrap_or(&default_order);
    if order.len() != n || {
        let mut seen = vec![false; n];
        order.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true))
    } {
        return Err(Error::Config {
            field: "order".into(),
            reason: format!("must be a permutation of 0..{n}"),
        });
    }

    let mut current = Subset::empty(f.ground_size());
    let mut base_value = 0.0;
    let mut chosen = vec![None; n];
    for &agent in order {
        let mut best: Option<(usize, f64)> = None;
        for &e in matroid.block(agent) {
            let gain = f.evaluate(&current.with(e)) - base_value;
            if best.is_none_or(|(_, bg)| gain > bg) {
                best = Some((e, gain));
            }
        }
        if let Some((e, gain)) = best {
            if gain > 0.0 {
                current.insert(e);
                base_value += gain;
                chosen[agent] = Some(e);
            }
        }
    }
    Ok(DiscreteSolution::from_chosen(matroid, chosen, f))
}

/// Exhaustive one-or-none-per-block search. The first maximizer in
/// odometer order wins, which makes ties break to the lexicographically
/// smallest choice vector (skipping a block sorts before its elements).
pub fn brute_force(f: &dyn SetFunction, matroid: &PartitionMatroid) -> Result<DiscreteSolution> {
    matroid.require_unit_capacity()?;
    let combinations = matroid.enumeration_count();
    if combinations > BRUTE_FORCE_CAP {
        return Err(Error::BruteForceTooLarge { combinations, cap: BRUTE_FORCE_CAP });
    }
    let mut best: Option<(f64, Subset)> = None;
    for candidate in matroid.independent_sets() {
        let value = f.evaluate(&candidate);
        if best.as_ref().is_none_or(|(bv, _)| value > *bv) {
            best = Some((value, candidate));
        }
    }
    let (_, set) = best.expect("enumeration yields at least the empty set");
    let mut chosen = vec![None; matroid.n_blocks()];
    for e in set.iter() {
        chosen[matroid.block_of(e)] = Some(e);
    }
    Ok(DiscreteSolution::from_chosen(matroid, chosen, f))
}

/// The error bracket of the approximation guarantee after `rounds` rounds:
/// `L D^2 / 2T + (L D^2 (n^2 + n^(5/2)) + n^(5/2) D G) / (T (1 - beta))`.
pub fn error_bracket(
    constants: &ConstantsReport,
    agents: usize,
    beta: f64,
    rounds: usize,
) -> f64 {
    let n = agents as f64;
    let t = rounds as f64;
    let (d, g, l) = (constants.diameter, constants.gradient_norm_bound, constants.lipschitz_bound);
    l * d * d / (2.0 * t)
        + (l * d * d * (n.powi(2) + n.powf(2.5)) + n.powf(2.5) * d * g) / (t * (1.0 - beta))
}

/// Smallest round count whose error bracket fits within `budget`. The
/// bracket scales as `1/T`, so this is a single division.
pub fn rounds_for_error_budget(
    constants: &ConstantsReport,
    agents: usize,
    beta: f64,
    budget: f64,
) -> usize {
    let at_one = error_bracket(constants, agents, beta, 1);
    ((at_one / budget).ceil() as usize).max(1)
}

/// Verification of the convergence guarantees on a finished trace.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub agents: usize,
    pub rounds: usize,
    pub beta: f64,
    pub exact: bool,
    pub constants: ConstantsReport,
    /// Best achievable discrete value, standing in for the continuous
    /// optimum they share.
    pub opt_value: f64,
    /// `(1 - 1/e) * opt_value`.
    pub approximation_floor: f64,
    /// `L D^2 / 2T + (L D^2 (n^2 + n^(5/2)) + n^(5/2) D G) / (T (1 - beta))`.
    pub error_bracket: f64,
    /// `approximation_floor - error_bracket`.
    pub final_threshold: f64,
    pub final_objectives: Vec<f64>,
    pub approximation_pass: bool,
    pub consensus_bound: f64,
    pub max_consensus_residual: f64,
    pub consensus_pass: bool,
    pub drift_bound: f64,
    pub max_mean_drift: f64,
    pub drift_pass: bool,
    pub max_polytope_violation: f64,
    pub feasibility_pass: bool,
    pub all_pass: bool,
}

/// Checks every recorded round against the consensus, drift, and
/// feasibility bounds, and the final iterates against the approximation
/// guarantee. All comparisons allow [`BOUND_SLACK`].
///
/// The report is authoritative only for exact-mode traces; for sampled
/// traces it is informational and `exact` is false.
pub fn check_bounds(
    trace: &SolverTrace,
    constants: &ConstantsReport,
    matroid: &PartitionMatroid,
    weights: &WeightMatrix,
    opt_value: f64,
) -> Result<BoundReport> {
    if weights.n() != trace.agents {
        return Err(Error::DimensionMismatch { expected: trace.agents, actual: weights.n() });
    }
    let n = trace.agents as f64;
    let t = trace.rounds as f64;
    let beta = weights.beta();
    let d = constants.diameter;

    let consensus_bound = n.powf(1.5) * d / (t * (1.0 - beta));
    let mut max_consensus_residual = 0.0f64;
    let mut max_mean_drift = 0.0f64;
    let mut max_polytope_violation = 0.0f64;
    for record in &trace.records {
        max_consensus_residual = max_consensus_residual.max(record.consensus_residual);
        max_mean_drift = max_mean_drift.max(record.mean_drift);
        let (violation, _) = matroid.polytope_violation(&record.mean);
        max_polytope_violation = max_polytope_violation.max(violation);
    }
    let consensus_pass = max_consensus_residual <= consensus_bound + BOUND_SLACK;
    let drift_bound = d / t;
    let drift_pass = max_mean_drift <= drift_bound + BOUND_SLACK;
    let feasibility_pass = max_polytope_violation <= POLYTOPE_TOL;

    let error_bracket = error_bracket(constants, trace.agents, beta, trace.rounds);
    let approximation_floor = (1.0 - (-1.0f64).exp()) * opt_value;
    let final_threshold = approximation_floor - error_bracket;
    let approximation_pass =
        trace.final_node_objectives.iter().all(|&v| v >= final_threshold - BOUND_SLACK);

    let all_pass = consensus_pass && drift_pass && feasibility_pass && approximation_pass;
    Ok(BoundReport {
        agents: trace.agents,
        rounds: trace.rounds,
        beta,
        exact: trace.exact,
        constants: constants.clone(),
        opt_value,
        approximation_floor,
        error_bracket,
        final_threshold,
        final_objectives: trace.final_node_objectives.clone(),
        approximation_pass,
        consensus_bound,
        max_consensus_residual,
        consensus_pass,
        drift_bound,
        max_mean_drift,
        drift_pass,
        max_polytope_violation,
        feasibility_pass,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::CommGraph;
    use crate::objective::{GroundSet, Modular, WeightedCoverage};
    use crate::rng::substream;
    use rand::Rng;

    fn complete_weights(n: usize) -> WeightMatrix {
        WeightMatrix::metropolis(&CommGraph::complete(n).unwrap()).unwrap()
    }

    #[test]
    fn single_agent_modular_accumulates_the_best_element() {
        // Hand-unrolled: the oracle returns the max-weight element every
        // round, so with T = 8 the iterate reaches exactly 1 on it.
        let f = Arc::new(Modular::new(vec![1.0, 3.0, 2.0]).unwrap());
        let m = PartitionMatroid::new(GroundSet::new(3).unwrap(), vec![vec![0, 1, 2]]).unwrap();
        let (solution, trace) =
            cdcg_run(f, &m, &complete_weights(1), &CdcgConfig::exact(8, 5)).unwrap();
        assert_eq!(solution.chosen, vec![Some(1)]);
        assert_eq!(solution.value, 3.0);
        let last = trace.records.last().unwrap();
        assert_eq!(last.node_points[0], vec![0.0, 1.0, 0.0]);
        assert!(trace.records.iter().skip(1).all(|r| r.directions == vec![Some(1)]));
        assert_eq!(trace.records.len(), 9);
    }

    #[test]
    fn zero_objective_yields_the_empty_solution() {
        let f = Arc::new(Modular::new(vec![0.0; 4]).unwrap());
        let m =
            PartitionMatroid::new(GroundSet::new(4).unwrap(), vec![vec![0, 1], vec![2, 3]])
                .unwrap();
        let (solution, trace) =
            cdcg_run(f.clone(), &m, &complete_weights(2), &CdcgConfig::exact(10, 1)).unwrap();
        assert_eq!(solution.value, 0.0);
        assert!(solution.chosen.iter().all(Option::is_none));
        // The oracle falls back to the origin every round.
        assert!(trace.records.iter().all(|r| r.directions.iter().all(Option::is_none)));

        // Sequential greedy skips agents with no strictly positive marginal.
        let greedy = sga_run(f.as_ref(), &m, None).unwrap();
        assert!(greedy.chosen.iter().all(Option::is_none));
        assert_eq!(greedy.value, 0.0);
    }

    #[test]
    fn sga_on_modular_matches_brute_force() {
        let f = Modular::new(vec![1.0, 4.0, 2.0, 0.5, 7.0, 7.0]).unwrap();
        let m = PartitionMatroid::new(
            GroundSet::new(6).unwrap(),
            vec![vec![0, 1], vec![2, 3], vec![4, 5]],
        )
        .unwrap();
        let greedy = sga_run(&f, &m, None).unwrap();
        let best = brute_force(&f, &m).unwrap();
        assert_eq!(greedy.value, best.value);
        assert_eq!(greedy.chosen, vec![Some(1), Some(2), Some(4)]); // tie at 4 vs 5
    }

    #[test]
    fn sga_worst_case_instance_achieves_exactly_half() {
        // Ground: a, b (agent 0) and c (agent 1). a and c cover the same
        // item; b covers a fresh one. The agent-0 tie breaks toward a, after
        // which c adds nothing: greedy ends at half the optimum {b, c}.
        let f = WeightedCoverage::new(2, vec![vec![0], vec![1], vec![0]]).unwrap();
        let m =
            PartitionMatroid::new(GroundSet::new(3).unwrap(), vec![vec![0, 1], vec![2]]).unwrap();
        let greedy = sga_run(&f, &m, None).unwrap();
        let best = brute_force(&f, &m).unwrap();
        assert_eq!(greedy.chosen, vec![Some(0), None]);
        assert_eq!(greedy.value, 1.0);
        assert_eq!(best.value, 2.0);
        assert_eq!(greedy.value * 2.0, best.value);
    }

    #[test]
    fn brute_force_counts_and_refuses() {
        let m = PartitionMatroid::uniform(4, 5).unwrap();
        assert_eq!(m.enumeration_count(), 1296);
        let huge = PartitionMatroid::uniform(10, 9).unwrap();
        let f = Modular::new(vec![0.0; 90]).unwrap();
        assert!(matches!(
            brute_force(&f, &huge),
            Err(Error::BruteForceTooLarge { combinations: 10_000_000_000, .. })
        ));
    }

    #[test]
    fn sga_never_falls_below_half_of_brute_force() {
        for seed in 0..20u64 {
            let mut rng = substream(seed, &[99]);
            let universe = 6;
            let covers: Vec<Vec<usize>> = (0..6)
                .map(|_| {
                    (0..universe).filter(|_| rng.random::<f64>() < 0.4).collect::<Vec<_>>()
                })
                .collect();
            let f = WeightedCoverage::new(universe, covers).unwrap();
            let m = PartitionMatroid::new(
                GroundSet::new(6).unwrap(),
                vec![vec![0, 1], vec![2, 3], vec![4, 5]],
            )
            .unwrap();
            let greedy = sga_run(&f, &m, None).unwrap();
            let best = brute_force(&f, &m).unwrap();
            assert!(best.value >= greedy.value);
            assert!(greedy.value >= 0.5 * best.value - 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn traces_are_bit_identical_across_runs_and_thread_counts() {
        let f = Arc::new(
            WeightedCoverage::new(5, vec![vec![0, 1], vec![1, 2], vec![3], vec![2, 4]]).unwrap(),
        );
        let m =
            PartitionMatroid::new(GroundSet::new(4).unwrap(), vec![vec![0, 1], vec![2, 3]])
                .unwrap();
        let w = complete_weights(2);
        let cfg = CdcgConfig::monte_carlo(12, 32, 77);
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| cdcg_run(f.clone(), &m, &w, &cfg).unwrap())
        };
        let (s1, t1) = run(1);
        let (s2, t2) = run(4);
        assert_eq!(s1.chosen, s2.chosen);
        assert_eq!(s1.value, s2.value);
        assert_eq!(t1, t2);
    }

    #[test]
    fn mean_recursion_and_feasibility_hold_along_the_run() {
        let f = Arc::new(
            WeightedCoverage::new(6, vec![vec![0, 1], vec![2], vec![3, 4], vec![4, 5]]).unwrap(),
        );
        let m =
            PartitionMatroid::new(GroundSet::new(4).unwrap(), vec![vec![0, 1], vec![2, 3]])
                .unwrap();
        // check_invariants = true would abort on violation; reaching the end
        // is the assertion.
        let (_, trace) =
            cdcg_run(f, &m, &complete_weights(2), &CdcgConfig::exact(25, 3)).unwrap();
        assert!(trace.records.iter().all(|r| r.mean_feasible));
        // Mean block mass grows toward 1 but never beyond.
        let last = trace.records.last().unwrap();
        for b in 0..m.n_blocks() {
            let mass: f64 = m.block(b).iter().map(|&e| last.mean[e]).sum();
            assert!(mass <= 1.0 + POLYTOPE_TOL);
        }
    }

    #[test]
    fn bound_report_passes_on_a_small_exact_instance() {
        let f = Arc::new(
            WeightedCoverage::new(
                7,
                vec![vec![0, 1], vec![1, 2], vec![3], vec![4, 5], vec![5, 6], vec![0, 6]],
            )
            .unwrap(),
        );
        let m = PartitionMatroid::new(
            GroundSet::new(6).unwrap(),
            vec![vec![0, 1], vec![2, 3], vec![4, 5]],
        )
        .unwrap();
        let w = complete_weights(3);
        let cfg = CdcgConfig::exact(4000, 9);
        let (_, trace) = cdcg_run(f.clone(), &m, &w, &cfg).unwrap();
        let evaluator = ExtensionEvaluator::exact(f.clone()).unwrap();
        let constants = evaluator.estimate_constants(&m).unwrap();
        let opt = brute_force(f.as_ref(), &m).unwrap().value;
        let report = check_bounds(&trace, &constants, &m, &w, opt).unwrap();
        assert!(report.consensus_pass, "residual {}", report.max_consensus_residual);
        assert!(report.drift_pass);
        assert!(report.feasibility_pass);
        assert!(report.approximation_pass, "threshold {}", report.final_threshold);
        assert!(report.all_pass);
    }

    #[test]
    fn single_agent_consensus_residual_is_identically_zero() {
        let f = Arc::new(Modular::new(vec![1.0, 2.0]).unwrap());
        let m = PartitionMatroid::new(GroundSet::new(2).unwrap(), vec![vec![0, 1]]).unwrap();
        let (_, trace) =
            cdcg_run(f, &m, &complete_weights(1), &CdcgConfig::exact(16, 0)).unwrap();
        assert!(trace.records.iter().all(|r| r.consensus_residual == 0.0));
    }

    #[test]
    fn directions_stay_in_their_own_block() {
        let f = Arc::new(
            WeightedCoverage::new(4, vec![vec![0], vec![1], vec![2], vec![3], vec![0, 3]])
                .unwrap(),
        );
        let m = PartitionMatroid::new(
            GroundSet::new(5).unwrap(),
            vec![vec![0, 1, 2], vec![3, 4]],
        )
        .unwrap();
        let (_, trace) =
            cdcg_run(f, &m, &complete_weights(2), &CdcgConfig::exact(12, 4)).unwrap();
        for record in &trace.records {
            for (agent, dir) in record.directions.iter().enumerate() {
                if let Some(e) = dir {
                    assert_eq!(m.block_of(*e), agent);
                }
            }
        }
    }

    #[test]
    fn cdcg_solutions_are_always_independent() {
        for seed in 0..10u64 {
            let mut rng = substream(seed, &[123]);
            let covers: Vec<Vec<usize>> = (0..6)
                .map(|_| (0..5).filter(|_| rng.random::<f64>() < 0.5).collect::<Vec<_>>())
                .collect();
            let f = Arc::new(WeightedCoverage::new(5, covers).unwrap());
            let m = PartitionMatroid::new(
                GroundSet::new(6).unwrap(),
                vec![vec![0, 1, 2], vec![3, 4, 5]],
            )
            .unwrap();
            let cfg = CdcgConfig::monte_carlo(20, 24, seed);
            let (solution, _) = cdcg_run(f, &m, &complete_weights(2), &cfg).unwrap();
            assert!(m.is_independent(&solution.set()));
        }
    }

    #[test]
    fn per_node_rounding_target_is_feasible_too() {
        let f = Arc::new(
            WeightedCoverage::new(4, vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3]]).unwrap(),
        );
        let m =
            PartitionMatroid::new(GroundSet::new(4).unwrap(), vec![vec![0, 1], vec![2, 3]])
                .unwrap();
        let cfg = CdcgConfig {
            rounding_target: RoundingTarget::PerNode,
            ..CdcgConfig::exact(15, 2)
        };
        let (solution, _) = cdcg_run(f, &m, &complete_weights(2), &cfg).unwrap();
        assert!(m.is_independent(&solution.set()));
    }

    #[test]
    fn gradient_at_running_mean_dominates_remaining_gap() {
        // For monotone submodular objectives the multilinear extension is
        // concave along directions toward the optimum, so at every mean
        // iterate: <grad F(mean), opt> >= F(opt) - F(mean). Checked with the
        // brute-force optimum indicator standing in for the maximizer.
        let f = Arc::new(
            WeightedCoverage::new(6, vec![vec![0, 1], vec![1, 2], vec![3, 4], vec![4, 5]])
                .unwrap(),
        );
        let m =
            PartitionMatroid::new(GroundSet::new(4).unwrap(), vec![vec![0, 1], vec![2, 3]])
                .unwrap();
        let (_, trace) =
            cdcg_run(f.clone(), &m, &complete_weights(2), &CdcgConfig::exact(30, 6)).unwrap();
        let evaluator = ExtensionEvaluator::exact(f.clone()).unwrap();
        let best = brute_force(f.as_ref(), &m).unwrap();
        let opt_point = FractionalPoint::indicator(&best.set());
        let f_opt = evaluator.eval(&opt_point).unwrap();
        for record in &trace.records {
            let (mean, _) = FractionalPoint::clamped(&record.mean);
            let g = evaluator.grad(&mean).unwrap();
            let inner: f64 =
                g.iter().zip(opt_point.coords()).map(|(a, b)| a * b).sum();
            let f_mean = evaluator.eval(&mean).unwrap();
            assert!(
                inner >= f_opt - f_mean - 1e-9,
                "<grad, opt> = {inner} < {f_opt} - {f_mean}"
            );
        }
    }

    #[test]
    fn invalid_round_count_is_rejected() {
        let f = Arc::new(Modular::new(vec![1.0]).unwrap());
        let m = PartitionMatroid::new(GroundSet::new(1).unwrap(), vec![vec![0]]).unwrap();
        let cfg = CdcgConfig::exact(0, 0);
        assert!(matches!(
            cdcg_run(f, &m, &complete_weights(1), &cfg),
            Err(Error::Config { .. })
        ));
    }
}
