//! Experiment configuration and the commands behind the `cdcg` binary.
//!
//! Configurations are single JSON documents (easy to diff and to pin as
//! golden fixtures). All randomness flows from the one mandatory seed
//! through named substreams per trial, step, node, and purpose, so a config
//! plus seed pins every artifact byte-for-byte regardless of `--threads`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coverage::{run_episode, CoverageWorld, EpisodeSolver, EpisodeTrace};
use crate::matroid::{DiscreteSolution, PartitionMatroid, RoundingMode};
use crate::multilinear::{EvaluatorKind, ExtensionEvaluator, DEFAULT_SAMPLES};
use crate::network::{CommGraph, WeightMatrix};
use crate::objective::{GroundSet, Modular, SetFunction, WeightedCoverage};
use crate::rng::{subseed, Purpose};
use crate::solvers::{
    brute_force, cdcg_run, check_bounds, sga_run, BoundReport, CdcgConfig, RoundingTarget,
    SolverTrace,
};
use crate::{Error, Result};

/// Top-level experiment configuration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub solver: SolverConfig,
    #[serde(default)]
    pub graph: GraphConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub test_hooks: TestHooks,
    /// Directory the config was loaded from; resolves relative paths.
    #[serde(skip)]
    base_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScenarioConfig {
    /// Receding-horizon grid coverage episodes.
    Coverage {
        agents: usize,
        width: usize,
        height: usize,
        radius: u32,
        steps: usize,
        #[serde(default = "one")]
        trials: usize,
        #[serde(default)]
        start: StartConfig,
    },
    /// A static instance loaded from a separate JSON file.
    Instance { path: PathBuf },
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(untagged)]
pub enum StartConfig {
    #[default]
    Unset,
    Named(StartName),
    Fixed(Vec<(i64, i64)>),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartName {
    Random,
    Center,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Round count `T`.
    pub rounds: usize,
    pub evaluator: EvaluatorChoice,
    #[serde(default = "default_samples")]
    pub samples: u32,
    pub seed: u64,
    #[serde(default = "default_target")]
    pub rounding_target: RoundingTarget,
    #[serde(default = "default_mode")]
    pub rounding_mode: RoundingMode,
}

fn default_samples() -> u32 {
    DEFAULT_SAMPLES
}

fn default_target() -> RoundingTarget {
    RoundingTarget::ConsensusMean
}

fn default_mode() -> RoundingMode {
    RoundingMode::Unbiased
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum EvaluatorChoice {
    Exact,
    MonteCarlo,
}

impl SolverConfig {
    pub fn evaluator_kind(&self) -> EvaluatorKind {
        match self.evaluator {
            EvaluatorChoice::Exact => EvaluatorKind::Exact,
            EvaluatorChoice::MonteCarlo => EvaluatorKind::MonteCarlo { samples: self.samples },
        }
    }

    fn cdcg_config(&self, seed: u64) -> CdcgConfig {
        CdcgConfig {
            rounds: self.rounds,
            evaluator: self.evaluator_kind(),
            seed,
            rounding_target: self.rounding_target,
            rounding_mode: self.rounding_mode,
            check_invariants: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(untagged)]
pub enum GraphConfig {
    #[default]
    Unset,
    Named(GraphName),
    EdgeListFile { edge_list: PathBuf },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphName {
    Complete,
    Path,
}

impl GraphConfig {
    fn build(&self, n: usize, base_dir: &Path) -> Result<CommGraph> {
        match self {
            GraphConfig::Unset | GraphConfig::Named(GraphName::Complete) => CommGraph::complete(n),
            GraphConfig::Named(GraphName::Path) => CommGraph::path(n),
            GraphConfig::EdgeListFile { edge_list } => {
                let path = base_dir.join(edge_list);
                let text = read_file(&path)?;
                let graph = CommGraph::from_edge_list(&text)?;
                if graph.n() != n {
                    return Err(Error::Config {
                        field: "graph.edge_list".into(),
                        reason: format!("graph has {} nodes, scenario needs {n}", graph.n()),
                    });
                }
                Ok(graph)
            }
        }
    }
}

/// Fault injection for CLI tests; never set in real experiments.
#[derive(Debug, Clone, Copy, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TestHooks {
    #[serde(default)]
    pub corrupt_weights: bool,
}

/// Static-instance description: a ground set partitioned into blocks plus
/// one of the built-in objective families.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub ground: usize,
    pub blocks: Vec<Vec<usize>>,
    pub function: FunctionConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionConfig {
    Modular { weights: Vec<f64> },
    Coverage { universe: usize, sets: Vec<Vec<usize>>, weights: Option<Vec<f64>> },
}

impl InstanceFile {
    pub fn build(&self) -> Result<(Arc<dyn SetFunction>, PartitionMatroid)> {
        let f: Arc<dyn SetFunction> = match &self.function {
            FunctionConfig::Modular { weights } => {
                if weights.len() != self.ground {
                    return Err(Error::Config {
                        field: "function.weights".into(),
                        reason: format!(
                            "{} weights for ground of size {}",
                            weights.len(),
                            self.ground
                        ),
                    });
                }
                Arc::new(Modular::new(weights.clone())?)
            }
            FunctionConfig::Coverage { universe, sets, weights } => {
                if sets.len() != self.ground {
                    return Err(Error::Config {
                        field: "function.sets".into(),
                        reason: format!("{} sets for ground of size {}", sets.len(), self.ground),
                    });
                }
                match weights {
                    None => Arc::new(WeightedCoverage::new(*universe, sets.clone())?),
                    Some(w) => {
                        Arc::new(WeightedCoverage::with_weights(*universe, sets.clone(), w.clone())?)
                    }
                }
            }
        };
        let matroid = PartitionMatroid::new(GroundSet::new(self.ground)?, self.blocks.clone())?;
        Ok((f, matroid))
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_file(path)?;
        let mut config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|source| Error::Json { path: path.into(), source })?;
        config.base_dir = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, ok: bool, reason: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Config { field: name.into(), reason: reason.into() })
            }
        };
        match &self.scenario {
            ScenarioConfig::Coverage { agents, width, height, steps, trials, start, .. } => {
                field("scenario.agents", *agents >= 1, "must be at least 1")?;
                field("scenario.width", *width >= 1, "must be at least 1")?;
                field("scenario.height", *height >= 1, "must be at least 1")?;
                field("scenario.steps", *steps >= 1, "must be at least 1")?;
                field("scenario.trials", *trials >= 1, "must be at least 1")?;
                if let StartConfig::Fixed(positions) = start {
                    field(
                        "scenario.start",
                        positions.len() == *agents,
                        "fixed start must list one position per agent",
                    )?;
                }
            }
            ScenarioConfig::Instance { .. } => {}
        }
        field("solver.rounds", self.solver.rounds >= 1, "must be at least 1")?;
        field("solver.samples", self.solver.samples >= 1, "must be at least 1")?;
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.solver.seed
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.solver.seed = s;
        }
        self
    }

    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf)
            .or_else(|| self.output_dir.as_ref().map(|d| self.base_dir.join(d)))
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    fn initial_world(&self, trial: usize) -> Result<CoverageWorld> {
        let ScenarioConfig::Coverage { agents, width, height, radius, start, .. } =
            &self.scenario
        else {
            return Err(Error::Config {
                field: "scenario".into(),
                reason: "not a coverage scenario".into(),
            });
        };
        let trial_seed = subseed(self.solver.seed, &[Purpose::Trial as u64, trial as u64]);
        match start {
            StartConfig::Unset | StartConfig::Named(StartName::Random) => {
                CoverageWorld::random(*width, *height, *radius, *agents, trial_seed)
            }
            StartConfig::Named(StartName::Center) => {
                CoverageWorld::center(*width, *height, *radius, *agents)
            }
            StartConfig::Fixed(positions) => {
                CoverageWorld::new(*width, *height, *radius, positions.clone())
            }
        }
    }

    /// The static solve target: the configured instance, or the one-step
    /// problem at the (trial 0) initial world for coverage scenarios.
    pub fn static_instance(&self) -> Result<(Arc<dyn SetFunction>, PartitionMatroid)> {
        match &self.scenario {
            ScenarioConfig::Instance { path } => {
                let full = self.base_dir.join(path);
                let text = read_file(&full)?;
                let instance: InstanceFile = serde_json::from_str(&text)
                    .map_err(|source| Error::Json { path: full, source })?;
                instance.build()
            }
            ScenarioConfig::Coverage { .. } => {
                let world = self.initial_world(0)?;
                Ok((Arc::new(world.coverage_objective()), world.action_matroid()))
            }
        }
    }

    fn weight_matrix(&self, n: usize) -> Result<WeightMatrix> {
        let graph = self.graph.build(n, &self.base_dir)?;
        let weights = WeightMatrix::metropolis(&graph)?;
        if self.test_hooks.corrupt_weights {
            // Break symmetry and revalidate; used to exercise failure paths.
            let mut entries: Vec<f64> = (0..n * n)
                .map(|k| weights.entry(k / n, k % n))
                .collect();
            if n > 1 {
                entries[1] += 1e-3;
            } else {
                entries[0] += 1e-3;
            }
            return WeightMatrix::from_entries(n, entries, Some(&graph));
        }
        Ok(weights)
    }
}

/// Per-trial outcome of a coverage run.
#[derive(Debug, Clone, Serialize)]
pub struct TrialSummary {
    pub trial: usize,
    pub cdcg_final_coverage: usize,
    pub sga_final_coverage: usize,
    pub cdcg_series: Vec<usize>,
    pub sga_series: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionSummary {
    pub chosen: Vec<Option<usize>>,
    pub value: f64,
}

impl From<&DiscreteSolution> for SolutionSummary {
    fn from(s: &DiscreteSolution) -> Self {
        Self { chosen: s.chosen.clone(), value: s.value }
    }
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "scenario", rename_all = "kebab-case")]
pub enum RunSummary {
    Coverage {
        seed: u64,
        agents: usize,
        width: usize,
        height: usize,
        radius: u32,
        steps: usize,
        trials: usize,
        rounds: usize,
        per_trial: Vec<TrialSummary>,
        cdcg_mean_final_coverage: f64,
        cdcg_std_final_coverage: f64,
        sga_mean_final_coverage: f64,
        sga_std_final_coverage: f64,
        /// Mean final CDCG coverage strictly exceeds the SGA one.
        cdcg_final_exceeds_sga: bool,
    },
    Instance {
        seed: u64,
        trials: usize,
        sga: SolutionSummary,
        cdcg_per_trial: Vec<SolutionSummary>,
        cdcg_best_value: f64,
        /// Present when the instance is small enough to enumerate.
        brute: Option<SolutionSummary>,
    },
}

/// Everything `run` produced, with the artifact paths.
#[derive(Debug)]
pub struct RunArtifacts {
    pub summary: RunSummary,
    pub summary_path: PathBuf,
    pub trace_path: PathBuf,
    pub positions_path: PathBuf,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)
            .map_err(|source| Error::Io { path: dir.into(), source })?;
    }
    std::fs::write(path, bytes).map_err(|source| Error::Io { path: path.into(), source })
}

fn trace_csv(trace: &SolverTrace) -> String {
    let mut csv = String::from("round,node,F_mean,consensus_residual,mean_drift,feasible,clamps\n");
    for (round, record) in trace.records.iter().enumerate() {
        for node in 0..trace.agents {
            csv.push_str(&format!(
                "{round},{node},{},{},{},{},{}\n",
                record.mean_objective,
                record.consensus_residual,
                record.mean_drift,
                record.mean_feasible,
                record.clamp_events,
            ));
        }
    }
    csv
}

fn positions_csv(trials: &[(EpisodeTrace, EpisodeTrace)]) -> String {
    let mut csv = String::from("trial,solver,step,agent,x,y\n");
    for (trial, (cdcg, sga)) in trials.iter().enumerate() {
        for (solver, trace) in [("cdcg", cdcg), ("sga", sga)] {
            for (step, record) in trace.records.iter().enumerate() {
                for (agent, (x, y)) in record.positions.iter().enumerate() {
                    csv.push_str(&format!("{trial},{solver},{step},{agent},{x},{y}\n"));
                }
            }
        }
    }
    csv
}

/// Executes the configured scenario and writes `summary.json`, `trace.csv`,
/// and `positions.csv` under the output directory.
pub fn cmd_run(config: &ExperimentConfig, out_flag: Option<&Path>) -> Result<RunArtifacts> {
    let out = config.output_dir(out_flag);
    let (summary, trace, episodes) = match &config.scenario {
        ScenarioConfig::Coverage { agents, width, height, radius, steps, trials, .. } => {
            let weights = config.weight_matrix(*agents)?;
            let solver_cfg = &config.solver;
            let episode_solver = EpisodeSolver::Cdcg {
                weights,
                rounds: solver_cfg.rounds,
                evaluator: solver_cfg.evaluator_kind(),
                rounding_target: solver_cfg.rounding_target,
                rounding_mode: solver_cfg.rounding_mode,
            };
            let runs: Vec<Result<(EpisodeTrace, EpisodeTrace)>> = (0..*trials)
                .into_par_iter()
                .map(|trial| {
                    let world = config.initial_world(trial)?;
                    let trial_seed =
                        subseed(config.solver.seed, &[Purpose::Trial as u64, trial as u64]);
                    let cdcg = run_episode(&world, &episode_solver, *steps, trial_seed)?;
                    let sga = run_episode(&world, &EpisodeSolver::Sga, *steps, trial_seed)?;
                    Ok((cdcg, sga))
                })
                .collect();
            let episodes: Vec<(EpisodeTrace, EpisodeTrace)> =
                runs.into_iter().collect::<Result<_>>()?;

            let per_trial: Vec<TrialSummary> = episodes
                .iter()
                .enumerate()
                .map(|(trial, (cdcg, sga))| TrialSummary {
                    trial,
                    cdcg_final_coverage: cdcg.final_coverage(),
                    sga_final_coverage: sga.final_coverage(),
                    cdcg_series: cdcg.coverage_series(),
                    sga_series: sga.coverage_series(),
                })
                .collect();
            let cdcg_finals: Vec<f64> =
                per_trial.iter().map(|t| t.cdcg_final_coverage as f64).collect();
            let sga_finals: Vec<f64> =
                per_trial.iter().map(|t| t.sga_final_coverage as f64).collect();
            let (cdcg_mean, cdcg_std) = mean_std(&cdcg_finals);
            let (sga_mean, sga_std) = mean_std(&sga_finals);

            let summary = RunSummary::Coverage {
                seed: config.solver.seed,
                agents: *agents,
                width: *width,
                height: *height,
                radius: *radius,
                steps: *steps,
                trials: *trials,
                rounds: config.solver.rounds,
                per_trial,
                cdcg_mean_final_coverage: cdcg_mean,
                cdcg_std_final_coverage: cdcg_std,
                sga_mean_final_coverage: sga_mean,
                sga_std_final_coverage: sga_std,
                cdcg_final_exceeds_sga: cdcg_mean > sga_mean,
            };
            let trace = episodes.first().and_then(|(c, _)| c.first_solver_trace.clone());
            (summary, trace, Some(episodes))
        }
        ScenarioConfig::Instance { .. } => {
            let (f, matroid) = config.static_instance()?;
            let weights = config.weight_matrix(matroid.n_blocks())?;
            let trials = 1usize;
            let sga = sga_run(f.as_ref(), &matroid, None)?;
            let mut cdcg_per_trial = Vec::new();
            let mut trace = None;
            let mut best = f64::NEG_INFINITY;
            for trial in 0..trials {
                let trial_seed =
                    subseed(config.solver.seed, &[Purpose::Trial as u64, trial as u64]);
                let (solution, t) =
                    cdcg_run(f.clone(), &matroid, &weights, &config.solver.cdcg_config(trial_seed))?;
                best = best.max(solution.value);
                cdcg_per_trial.push(SolutionSummary::from(&solution));
                if trace.is_none() {
                    trace = Some(t);
                }
            }
            let brute = match brute_force(f.as_ref(), &matroid) {
                Ok(b) => Some(SolutionSummary::from(&b)),
                Err(Error::BruteForceTooLarge { .. }) => None,
                Err(e) => return Err(e),
            };
            let summary = RunSummary::Instance {
                seed: config.solver.seed,
                trials,
                sga: SolutionSummary::from(&sga),
                cdcg_per_trial,
                cdcg_best_value: best,
                brute,
            };
            (summary, trace, None)
        }
    };

    let summary_path = out.join("summary.json");
    let mut summary_bytes = serde_json::to_vec_pretty(&summary).expect("summary serializes");
    summary_bytes.push(b'\n');
    write_file(&summary_path, &summary_bytes)?;

    let trace_path = out.join("trace.csv");
    let trace_body = trace.as_ref().map(trace_csv).unwrap_or_else(|| {
        String::from("round,node,F_mean,consensus_residual,mean_drift,feasible,clamps\n")
    });
    write_file(&trace_path, trace_body.as_bytes())?;

    let positions_path = out.join("positions.csv");
    let positions_body = episodes
        .as_deref()
        .map(positions_csv)
        .unwrap_or_else(|| String::from("trial,solver,step,agent,x,y\n"));
    write_file(&positions_path, positions_body.as_bytes())?;

    Ok(RunArtifacts { summary, summary_path, trace_path, positions_path })
}

/// Runs the exact-mode verification pipeline: CDCG with an exact evaluator,
/// brute-force optimum, measured constants, and every bound check. Writes
/// `bound_report.json` under the output directory.
pub fn cmd_verify(config: &ExperimentConfig, out_flag: Option<&Path>) -> Result<BoundReport> {
    let (f, matroid) = config.static_instance()?;
    let weights = config.weight_matrix(matroid.n_blocks())?;
    let evaluator = ExtensionEvaluator::exact(f.clone())?;
    let constants = evaluator.estimate_constants(&matroid)?;
    let opt = brute_force(f.as_ref(), &matroid)?;

    let mut cdcg_cfg = config.solver.cdcg_config(config.solver.seed);
    cdcg_cfg.evaluator = EvaluatorKind::Exact;
    cdcg_cfg.check_invariants = true;
    let (_, trace) = cdcg_run(f, &matroid, &weights, &cdcg_cfg)?;
    let report = check_bounds(&trace, &constants, &matroid, &weights, opt.value)?;

    let out = config.output_dir(out_flag);
    let mut bytes = serde_json::to_vec_pretty(&report).expect("report serializes");
    bytes.push(b'\n');
    write_file(&out.join("bound_report.json"), &bytes)?;
    Ok(report)
}

/// Loads an edge-list graph and builds its Metropolis weights.
pub fn cmd_weights(graph_path: &Path) -> Result<WeightMatrix> {
    let text = read_file(graph_path)?;
    let graph = CommGraph::from_edge_list(&text)?;
    WeightMatrix::metropolis(&graph)
}

/// Brute-force solve of the configured static instance.
pub fn cmd_brute(config: &ExperimentConfig) -> Result<(DiscreteSolution, u128)> {
    let (f, matroid) = config.static_instance()?;
    let solution = brute_force(f.as_ref(), &matroid)?;
    Ok((solution, matroid.enumeration_count()))
}

/// Exit code for an error: 2 for configuration problems, 3 for capability
/// refusals, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::Json { .. } => 2,
        Error::ExactCapExceeded { .. }
        | Error::CheckCapExceeded { .. }
        | Error::BruteForceTooLarge { .. }
        | Error::ConstantsNeedExact => 3,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
        let path = dir.join(name);
        std::fs::write(&path, body).unwrap();
        path
    }

    #[test]
    fn coverage_config_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(
            dir.path(),
            "c.json",
            r#"{
              "scenario": {"type": "coverage", "agents": 2, "width": 6, "height": 6,
                           "radius": 1, "steps": 2, "trials": 1, "start": "center"},
              "solver": {"rounds": 5, "evaluator": "exact", "seed": 3},
              "graph": "complete"
            }"#,
        );
        let config = ExperimentConfig::load(&path).unwrap();
        assert_eq!(config.solver.rounds, 5);
        assert!(matches!(config.scenario, ScenarioConfig::Coverage { agents: 2, .. }));
    }

    #[test]
    fn invalid_fields_are_reported_with_their_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(
            dir.path(),
            "bad.json",
            r#"{
              "scenario": {"type": "coverage", "agents": 2, "width": 6, "height": 6,
                           "radius": 1, "steps": 0},
              "solver": {"rounds": 5, "evaluator": "exact", "seed": 3}
            }"#,
        );
        match ExperimentConfig::load(&path) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "scenario.steps"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn missing_seed_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(
            dir.path(),
            "noseed.json",
            r#"{
              "scenario": {"type": "instance", "path": "i.json"},
              "solver": {"rounds": 5, "evaluator": "exact"}
            }"#,
        );
        let err = ExperimentConfig::load(&path).unwrap_err();
        assert!(matches!(err, Error::Json { .. }));
        assert_eq!(exit_code(&err), 2);
    }

    #[test]
    fn instance_files_build_functions_and_matroids() {
        let instance: InstanceFile = serde_json::from_str(
            r#"{
              "ground": 3,
              "blocks": [[0, 1], [2]],
              "function": {"type": "coverage", "universe": 2,
                           "sets": [[0], [1], [0]], "weights": null}
            }"#,
        )
        .unwrap();
        let (f, matroid) = instance.build().unwrap();
        assert_eq!(f.ground_size(), 3);
        assert_eq!(matroid.n_blocks(), 2);
    }

    #[test]
    fn exit_codes_follow_error_categories() {
        assert_eq!(exit_code(&Error::Config { field: "x".into(), reason: "r".into() }), 2);
        assert_eq!(exit_code(&Error::ExactCapExceeded { size: 50, cap: 20 }), 3);
        assert_eq!(exit_code(&Error::BruteForceTooLarge { combinations: 1, cap: 0 }), 3);
        assert_eq!(exit_code(&Error::InvalidWeights("w".into())), 1);
    }
}
