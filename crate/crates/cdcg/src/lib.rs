//! Decentralized maximization of monotone submodular set functions under a
//! distributed partition matroid constraint.
//!
//! The ground set is split into disjoint per-agent blocks and each agent may
//! contribute at most one element to the solution. Agents communicate over a
//! connected graph through a doubly-stochastic weight matrix. The crate
//! provides:
//!
//! - [`objective`]: the monotone submodular set-function contract, concrete
//!   objectives, and exhaustive submodularity/monotonicity checkers.
//! - [`multilinear`]: exact and Monte-Carlo evaluation of the multilinear
//!   extension and its gradient, plus estimation of the problem constants
//!   used by the convergence bound checks.
//! - [`matroid`]: partition matroid structure, the associated polytope, the
//!   per-block linear maximization oracle, and randomized swap rounding.
//! - [`network`]: communication graphs, Metropolis weight matrices, spectral
//!   gap computation, and the synchronous exchange step.
//! - [`solvers`]: the consensus continuous-greedy solver, the sequential
//!   greedy baseline, a brute-force oracle, and bound verification.
//! - [`coverage`]: a multi-agent grid coverage benchmark with a
//!   receding-horizon episode loop.
//! - [`cli`]: configuration loading and the experiment commands backing the
//!   `cdcg` binary.

pub mod cli;
pub mod coverage;
pub mod matroid;
pub mod multilinear;
pub mod network;
pub mod objective;
pub mod rng;
pub mod solvers;

use std::path::PathBuf;

/// Crate-wide error type.
///
/// Refusal variants ([`Error::ExactCapExceeded`], [`Error::CheckCapExceeded`],
/// [`Error::BruteForceTooLarge`], [`Error::ConstantsNeedExact`]) indicate the
/// requested computation is outside the configured capability limits rather
/// than a runtime failure; the CLI maps them to a distinct exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("element {element} out of range for ground set of size {size}")]
    InvalidElement { element: usize, size: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("ground set must contain at least one element")]
    EmptyGround,

    #[error("{0}")]
    InvalidFunction(String),

    #[error("blocks do not partition the ground set: {0}")]
    InvalidPartition(String),

    #[error("block {block} is empty")]
    EmptyBlock { block: usize },

    #[error("block {block} has capacity {capacity}; this operation supports capacity 1 only")]
    CapacityUnsupported { block: usize, capacity: u32 },

    #[error(
        "point is outside the matroid polytope (max violation {residual:.3e} in block {block})"
    )]
    OutsidePolytope { residual: f64, block: usize },

    #[error("ground set of size {size} exceeds the exact-evaluation cap of {cap}")]
    ExactCapExceeded { size: usize, cap: usize },

    #[error("ground set of size {size} exceeds the exhaustive-check cap of {cap}")]
    CheckCapExceeded { size: usize, cap: usize },

    #[error("instance admits {combinations} candidate solutions, above the cap of {cap}")]
    BruteForceTooLarge { combinations: u128, cap: u128 },

    #[error("constants estimation requires an exact-mode evaluator")]
    ConstantsNeedExact,

    #[error("weight matrix validation failed: {0}")]
    InvalidWeights(String),

    #[error("graph is disconnected; component reachable from node 0: {0:?}")]
    Disconnected(Vec<usize>),

    #[error("failed to parse graph (line {line}): {reason}")]
    GraphParse { line: usize, reason: String },

    #[error("invalid configuration at `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("solver invariant violated at round {round}: {detail}")]
    InvariantViolated { round: usize, detail: String },

    #[error("position ({x}, {y}) lies outside the {width}x{height} grid")]
    OutsideGrid { x: i64, y: i64, width: usize, height: usize },

    #[error("failed to read `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse JSON in `{path}`: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

pub use matroid::{DiscreteSolution, PartitionMatroid, RoundingMode};
pub use multilinear::{ConstantsReport, EvaluatorKind, ExtensionEvaluator, FractionalPoint};
pub use network::{CommGraph, WeightMatrix};
pub use objective::{GroundSet, Modular, SetFunction, Subset, WeightedCoverage};
pub use solvers::{BoundReport, CdcgConfig, RoundingTarget, SolverTrace};
