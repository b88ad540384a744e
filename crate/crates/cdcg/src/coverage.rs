//! Multi-agent grid coverage benchmark.
//!
//! Agents live on an integer grid and each observes the square of cells
//! within Chebyshev distance `radius` of its position (side length
//! `2 radius + 1`, clipped at the boundary). At every world step each agent
//! picks one of five controls — up, down, left, right, stay — and the joint
//! objective is the number of distinct cells covered at the post-move
//! positions. That objective is a unit-weight coverage function over the
//! `5 n` (agent, control) pairs, with one matroid block of five controls
//! per agent, which is exactly the shape the solvers in this crate expect.
//!
//! [`run_episode`] is the receding-horizon loop: solve the one-step
//! problem, apply the chosen controls (agents without a chosen element
//! stay put), clip to the grid, and re-plan from the new state. The
//! recorded coverage series is cumulative over visited footprints, so it
//! is nondecreasing in time.

use serde::Serialize;

use crate::matroid::{PartitionMatroid, RoundingMode};
use crate::multilinear::EvaluatorKind;
use crate::network::WeightMatrix;
use crate::objective::WeightedCoverage;
use crate::rng::{subseed, substream, Purpose};
use crate::solvers::{cdcg_run, sga_run, CdcgConfig, RoundingTarget, SolverTrace};
use crate::{Error, Result};

/// Admissible controls, in element order: up, down, left, right, stay.
pub const CONTROLS: [(i64, i64); 5] = [(0, 1), (0, -1), (-1, 0), (1, 0), (0, 0)];

/// Index of the stay control in [`CONTROLS`].
pub const STAY: usize = 4;

/// Grid world state: dimensions, sensing radius, and agent positions.
#[derive(Debug, Clone, Serialize)]
pub struct CoverageWorld {
    width: usize,
    height: usize,
    radius: u32,
    positions: Vec<(i64, i64)>,
}

impl CoverageWorld {
    pub fn new(
        width: usize,
        height: usize,
        radius: u32,
        positions: Vec<(i64, i64)>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Config {
                field: "grid".into(),
                reason: "width and height must be positive".into(),
            });
        }
        if positions.is_empty() {
            return Err(Error::Config {
                field: "positions".into(),
                reason: "at least one agent required".into(),
            });
        }
        for &(x, y) in &positions {
            if x < 0 || y < 0 || x >= width as i64 || y >= height as i64 {
                return Err(Error::OutsideGrid { x, y, width, height });
            }
        }
        Ok(Self { width, height, radius, positions })
    }

    /// Uniformly random agent positions (collisions allowed).
    pub fn random(width: usize, height: usize, radius: u32, n: usize, seed: u64) -> Result<Self> {
        use rand::Rng;
        let mut rng = substream(seed, &[Purpose::WorldInit as u64]);
        let positions = (0..n)
            .map(|_| {
                (rng.random_range(0..width as i64), rng.random_range(0..height as i64))
            })
            .collect();
        Self::new(width, height, radius, positions)
    }

    /// Every agent at the grid center.
    pub fn center(width: usize, height: usize, radius: u32, n: usize) -> Result<Self> {
        let c = (width as i64 / 2, height as i64 / 2);
        Self::new(width, height, radius, vec![c; n])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn n_agents(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[(i64, i64)] {
        &self.positions
    }

    pub fn n_cells(&self) -> usize {
        self.width * self.height
    }

    /// Clamps a (possibly out-of-grid) position onto the nearest cell.
    pub fn clip(&self, pos: (i64, i64)) -> (i64, i64) {
        (pos.0.clamp(0, self.width as i64 - 1), pos.1.clamp(0, self.height as i64 - 1))
    }

    /// Cell ids within Chebyshev distance `radius` of `pos`, intersected
    /// with the grid. Cell id is `y * width + x`.
    pub fn covered_cells(&self, pos: (i64, i64)) -> Vec<usize> {
        let r = self.radius as i64;
        let (x0, x1) = ((pos.0 - r).max(0), (pos.0 + r).min(self.width as i64 - 1));
        let (y0, y1) = ((pos.1 - r).max(0), (pos.1 + r).min(self.height as i64 - 1));
        let mut cells = Vec::with_capacity(((x1 - x0 + 1) * (y1 - y0 + 1)).max(0) as usize);
        for y in y0..=y1 {
            for x in x0..=x1 {
                cells.push(y as usize * self.width + x as usize);
            }
        }
        cells
    }

    /// Ground-set element of an (agent, control) pair.
    pub fn element_of(agent: usize, control: usize) -> usize {
        agent * CONTROLS.len() + control
    }

    /// One-step objective: distinct cells covered at the post-move
    /// positions of the (agent, control) pairs in the argument set. Extra
    /// same-agent elements union naturally, keeping the function submodular
    /// on the whole power set.
    pub fn coverage_objective(&self) -> WeightedCoverage {
        let covers = self
            .positions
            .iter()
            .flat_map(|&p| {
                CONTROLS.iter().map(move |&(dx, dy)| {
                    self.covered_cells(self.clip((p.0 + dx, p.1 + dy)))
                })
            })
            .collect();
        WeightedCoverage::new(self.n_cells(), covers).expect("cells are in range")
    }

    /// One five-control block per agent.
    pub fn action_matroid(&self) -> PartitionMatroid {
        PartitionMatroid::uniform(self.n_agents(), CONTROLS.len())
            .expect("uniform blocks are a valid partition")
    }

    /// Moves every agent by its control, clipping at the boundary.
    pub fn apply_controls(&mut self, controls: &[usize]) {
        debug_assert_eq!(controls.len(), self.positions.len());
        let (w, h) = (self.width as i64, self.height as i64);
        for (pos, &c) in self.positions.iter_mut().zip(controls) {
            let (dx, dy) = CONTROLS[c];
            *pos = ((pos.0 + dx).clamp(0, w - 1), (pos.1 + dy).clamp(0, h - 1));
        }
    }
}

/// Which solver drives an episode.
#[derive(Debug, Clone)]
pub enum EpisodeSolver {
    Sga,
    Cdcg {
        weights: WeightMatrix,
        rounds: usize,
        evaluator: EvaluatorKind,
        rounding_target: RoundingTarget,
        rounding_mode: RoundingMode,
    },
}

/// One world step of an episode.
#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub positions: Vec<(i64, i64)>,
    /// Applied control per agent ([`STAY`] when the solver chose nothing).
    pub controls: Vec<usize>,
    /// Solver's objective value for the step (coverage at post-move
    /// positions).
    pub solver_value: f64,
    /// Distinct cells covered at the current positions.
    pub step_coverage: usize,
    /// Distinct cells covered at any position visited so far.
    pub cumulative_coverage: usize,
}

/// Episode history; `records[0]` is the initial state before any solve.
#[derive(Debug, Clone)]
pub struct EpisodeTrace {
    pub records: Vec<StepRecord>,
    /// Solver trace of the first planning step (representative; one per
    /// episode keeps artifact sizes bounded).
    pub first_solver_trace: Option<SolverTrace>,
}

impl EpisodeTrace {
    pub fn final_coverage(&self) -> usize {
        self.records.last().map_or(0, |r| r.cumulative_coverage)
    }

    pub fn coverage_series(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.cumulative_coverage).collect()
    }
}

struct CellAccumulator {
    words: Vec<u64>,
    count: usize,
}

impl CellAccumulator {
    fn new(cells: usize) -> Self {
        Self { words: vec![0; cells.div_ceil(64)], count: 0 }
    }

    fn insert_all(&mut self, cells: &[usize]) {
        for &c in cells {
            let (w, b) = (c / 64, c % 64);
            if self.words[w] >> b & 1 == 0 {
                self.words[w] |= 1 << b;
                self.count += 1;
            }
        }
    }
}

fn current_coverage(world: &CoverageWorld) -> usize {
    let mut acc = CellAccumulator::new(world.n_cells());
    for &p in world.positions() {
        acc.insert_all(&world.covered_cells(p));
    }
    acc.count
}

/// Receding-horizon episode: `steps` rounds of solve / move / re-plan from
/// the given initial world. All randomness derives from `seed` through
/// per-step substreams.
pub fn run_episode(
    world: &CoverageWorld,
    solver: &EpisodeSolver,
    steps: usize,
    seed: u64,
) -> Result<EpisodeTrace> {
    if steps == 0 {
        return Err(Error::Config { field: "steps".into(), reason: "must be at least 1".into() });
    }
    let mut world = world.clone();
    let mut cumulative = CellAccumulator::new(world.n_cells());
    for &p in world.positions() {
        cumulative.insert_all(&world.covered_cells(p));
    }
    let mut records = vec![StepRecord {
        positions: world.positions().to_vec(),
        controls: vec![STAY; world.n_agents()],
        solver_value: 0.0,
        step_coverage: current_coverage(&world),
        cumulative_coverage: cumulative.count,
    }];
    let mut first_solver_trace = None;

    for step in 1..=steps {
        let objective = std::sync::Arc::new(world.coverage_objective());
        let matroid = world.action_matroid();
        let solution = match solver {
            EpisodeSolver::Sga => sga_run(objective.as_ref(), &matroid, None)?,
            EpisodeSolver::Cdcg { weights, rounds, evaluator, rounding_target, rounding_mode } => {
                let config = CdcgConfig {
                    rounds: *rounds,
                    evaluator: *evaluator,
                    seed: subseed(seed, &[Purpose::Step as u64, step as u64]),
                    rounding_target: *rounding_target,
                    rounding_mode: *rounding_mode,
                    check_invariants: false,
                };
                let (solution, trace) = cdcg_run(objective.clone(), &matroid, weights, &config)?;
                if first_solver_trace.is_none() {
                    first_solver_trace = Some(trace);
                }
                solution
            }
        };
        let controls: Vec<usize> = solution
            .chosen
            .iter()
            .map(|c| c.map_or(STAY, |e| e % CONTROLS.len()))
            .collect();
        world.apply_controls(&controls);
        for &p in world.positions() {
            cumulative.insert_all(&world.covered_cells(p));
        }
        records.push(StepRecord {
            positions: world.positions().to_vec(),
            controls,
            solver_value: solution.value,
            step_coverage: current_coverage(&world),
            cumulative_coverage: cumulative.count,
        });
    }
    Ok(EpisodeTrace { records, first_solver_trace })
}
