//! C ABI for the grid-coverage solvers.
//!
//! The surface is handle-based: construct an opaque world, run one-step
//! solves or whole receding-horizon episodes against it, and free it when
//! done. Every fallible call returns a [`CdcgStatus`]; on failure the
//! thread-local message retrieved by [`cdcg_last_error_message`] explains
//! what went wrong. The generated header lands in `include/cdcg.h`.
//!
//! Consensus runs use a complete communication graph, matching the
//! benchmark setup; richer topologies are available through the Rust API.

use std::cell::RefCell;
use std::ffi::CString;
use std::sync::Arc;

use libc::{c_char, size_t};

use cdcg::coverage::{run_episode, CoverageWorld, EpisodeSolver, CONTROLS, STAY};
use cdcg::matroid::RoundingMode;
use cdcg::multilinear::EvaluatorKind;
use cdcg::network::{CommGraph, WeightMatrix};
use cdcg::solvers::{cdcg_run, sga_run, CdcgConfig, RoundingTarget};

/// Status codes for every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdcgStatus {
    Ok = 0,
    /// Solver or validation failure; see `cdcg_last_error_message`.
    RuntimeError = 1,
    /// Invalid argument values.
    InvalidArgument = 2,
    /// The request exceeds a configured capability limit.
    CapabilityRefused = 3,
    /// A required pointer was null.
    NullPointer = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &cdcg::Error) -> CdcgStatus {
    set_error(&err.to_string());
    match cdcg::cli::exit_code(err) {
        2 => CdcgStatus::InvalidArgument,
        3 => CdcgStatus::CapabilityRefused,
        _ => CdcgStatus::RuntimeError,
    }
}

/// Copies the last error message of this thread into `buffer` (NUL
/// terminated, truncated to `length` bytes) and returns the full message
/// length in bytes excluding the terminator. Passing a null buffer just
/// queries the length.
///
/// # Safety
/// `buffer`, when non-null, must point to `length` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cdcg_last_error_message(buffer: *mut c_char, length: size_t) -> size_t {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buffer.is_null() && length > 0 {
            let n = bytes.len().min(length - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buffer, n);
            *buffer.add(n) = 0;
        }
        bytes.len()
    })
}

/// Crate version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cdcg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Opaque grid world handle.
pub struct CdcgWorld {
    inner: CoverageWorld,
}

fn world_out(result: cdcg::Result<CoverageWorld>) -> *mut CdcgWorld {
    match result {
        Ok(inner) => Box::into_raw(Box::new(CdcgWorld { inner })),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Creates a world with explicit agent positions. Returns null on failure
/// (query `cdcg_last_error_message`).
///
/// # Safety
/// `xs` and `ys` must point to `n_agents` readable values each.
#[no_mangle]
pub unsafe extern "C" fn cdcg_world_new(
    width: size_t,
    height: size_t,
    radius: u32,
    xs: *const i64,
    ys: *const i64,
    n_agents: size_t,
) -> *mut CdcgWorld {
    if xs.is_null() || ys.is_null() {
        set_error("position arrays must not be null");
        return std::ptr::null_mut();
    }
    let xs = std::slice::from_raw_parts(xs, n_agents);
    let ys = std::slice::from_raw_parts(ys, n_agents);
    let positions = xs.iter().copied().zip(ys.iter().copied()).collect();
    world_out(CoverageWorld::new(width, height, radius, positions))
}

/// Creates a world with every agent at the grid center.
#[no_mangle]
pub extern "C" fn cdcg_world_center(
    width: size_t,
    height: size_t,
    radius: u32,
    n_agents: size_t,
) -> *mut CdcgWorld {
    world_out(CoverageWorld::center(width, height, radius, n_agents))
}

/// Creates a world with uniformly random agent positions drawn from `seed`.
#[no_mangle]
pub extern "C" fn cdcg_world_random(
    width: size_t,
    height: size_t,
    radius: u32,
    n_agents: size_t,
    seed: u64,
) -> *mut CdcgWorld {
    world_out(CoverageWorld::random(width, height, radius, n_agents, seed))
}

/// Releases a world handle. Null is a no-op.
///
/// # Safety
/// `world` must be a pointer returned by one of the constructors, not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn cdcg_world_free(world: *mut CdcgWorld) {
    if !world.is_null() {
        drop(Box::from_raw(world));
    }
}

/// Number of agents in the world; zero for a null handle.
///
/// # Safety
/// `world`, when non-null, must be a live world handle.
#[no_mangle]
pub unsafe extern "C" fn cdcg_world_agents(world: *const CdcgWorld) -> size_t {
    if world.is_null() {
        return 0;
    }
    (*world).inner.n_agents()
}

/// Copies current agent positions into `xs`/`ys`.
///
/// # Safety
/// `world` must be a live handle; `xs` and `ys` must hold one value per
/// agent.
#[no_mangle]
pub unsafe extern "C" fn cdcg_world_positions(
    world: *const CdcgWorld,
    xs: *mut i64,
    ys: *mut i64,
) -> CdcgStatus {
    if world.is_null() || xs.is_null() || ys.is_null() {
        set_error("null pointer");
        return CdcgStatus::NullPointer;
    }
    for (i, &(x, y)) in (*world).inner.positions().iter().enumerate() {
        *xs.add(i) = x;
        *ys.add(i) = y;
    }
    CdcgStatus::Ok
}

/// Applies one control per agent (0 up, 1 down, 2 left, 3 right, 4 stay),
/// clipping at the grid boundary.
///
/// # Safety
/// `world` must be a live handle; `controls` must hold one value per agent.
#[no_mangle]
pub unsafe extern "C" fn cdcg_world_apply(
    world: *mut CdcgWorld,
    controls: *const u8,
    n_controls: size_t,
) -> CdcgStatus {
    if world.is_null() || controls.is_null() {
        set_error("null pointer");
        return CdcgStatus::NullPointer;
    }
    let world = &mut (*world).inner;
    if n_controls != world.n_agents() {
        set_error("one control per agent required");
        return CdcgStatus::InvalidArgument;
    }
    let controls = std::slice::from_raw_parts(controls, n_controls);
    if controls.iter().any(|&c| c as usize >= CONTROLS.len()) {
        set_error("controls must be in 0..5");
        return CdcgStatus::InvalidArgument;
    }
    let controls: Vec<usize> = controls.iter().map(|&c| c as usize).collect();
    world.apply_controls(&controls);
    CdcgStatus::Ok
}

unsafe fn write_solution(
    solution: &cdcg::DiscreteSolution,
    out_controls: *mut u8,
    out_value: *mut f64,
) {
    for (agent, choice) in solution.chosen.iter().enumerate() {
        *out_controls.add(agent) = choice.map_or(STAY, |e| e % CONTROLS.len()) as u8;
    }
    if !out_value.is_null() {
        *out_value = solution.value;
    }
}

/// Solves the one-step problem with the consensus continuous-greedy solver
/// over a complete communication graph. `samples == 0` requests the exact
/// evaluator (refused above 20 ground elements). Writes one control per
/// agent and, when non-null, the objective value.
///
/// # Safety
/// `world` must be a live handle; `out_controls` must hold one byte per
/// agent.
#[no_mangle]
pub unsafe extern "C" fn cdcg_world_solve_cdcg(
    world: *const CdcgWorld,
    rounds: size_t,
    samples: u32,
    seed: u64,
    out_controls: *mut u8,
    out_value: *mut f64,
) -> CdcgStatus {
    if world.is_null() || out_controls.is_null() {
        set_error("null pointer");
        return CdcgStatus::NullPointer;
    }
    let world = &(*world).inner;
    let weights = match CommGraph::complete(world.n_agents()).and_then(|g| WeightMatrix::metropolis(&g)) {
        Ok(w) => w,
        Err(e) => return status_of(&e),
    };
    let config = CdcgConfig {
        rounds,
        evaluator: if samples == 0 {
            EvaluatorKind::Exact
        } else {
            EvaluatorKind::MonteCarlo { samples }
        },
        seed,
        rounding_target: RoundingTarget::ConsensusMean,
        rounding_mode: RoundingMode::Unbiased,
        check_invariants: false,
    };
    let objective = Arc::new(world.coverage_objective());
    match cdcg_run(objective, &world.action_matroid(), &weights, &config) {
        Ok((solution, _)) => {
            write_solution(&solution, out_controls, out_value);
            CdcgStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Solves the one-step problem with the sequential greedy baseline.
///
/// # Safety
/// As [`cdcg_world_solve_cdcg`].
#[no_mangle]
pub unsafe extern "C" fn cdcg_world_solve_sga(
    world: *const CdcgWorld,
    out_controls: *mut u8,
    out_value: *mut f64,
) -> CdcgStatus {
    if world.is_null() || out_controls.is_null() {
        set_error("null pointer");
        return CdcgStatus::NullPointer;
    }
    let world = &(*world).inner;
    let objective = world.coverage_objective();
    match sga_run(&objective, &world.action_matroid(), None) {
        Ok(solution) => {
            write_solution(&solution, out_controls, out_value);
            CdcgStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Runs a receding-horizon episode without mutating the input world and
/// writes the cumulative coverage series (`steps + 1` entries, starting
/// from the initial configuration). `use_cdcg == 0` runs the sequential
/// greedy baseline; otherwise the consensus solver with the given rounds
/// and samples (`samples == 0` for exact mode).
///
/// # Safety
/// `world` must be a live handle; `out_series` must hold `steps + 1`
/// values.
#[no_mangle]
pub unsafe extern "C" fn cdcg_world_run_episode(
    world: *const CdcgWorld,
    use_cdcg: u8,
    steps: size_t,
    rounds: size_t,
    samples: u32,
    seed: u64,
    out_series: *mut u64,
) -> CdcgStatus {
    if world.is_null() || out_series.is_null() {
        set_error("null pointer");
        return CdcgStatus::NullPointer;
    }
    let world = &(*world).inner;
    let solver = if use_cdcg == 0 {
        EpisodeSolver::Sga
    } else {
        let weights =
            match CommGraph::complete(world.n_agents()).and_then(|g| WeightMatrix::metropolis(&g)) {
                Ok(w) => w,
                Err(e) => return status_of(&e),
            };
        EpisodeSolver::Cdcg {
            weights,
            rounds,
            evaluator: if samples == 0 {
                EvaluatorKind::Exact
            } else {
                EvaluatorKind::MonteCarlo { samples }
            },
            rounding_target: RoundingTarget::ConsensusMean,
            rounding_mode: RoundingMode::Unbiased,
        }
    };
    match run_episode(world, &solver, steps, seed) {
        Ok(trace) => {
            for (i, v) in trace.coverage_series().into_iter().enumerate() {
                *out_series.add(i) = v as u64;
            }
            CdcgStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Builds Metropolis weights for an undirected edge list over `n` nodes and
/// writes the spectral gap parameter beta. Rejects disconnected graphs.
///
/// # Safety
/// `edges_from` and `edges_to` must hold `n_edges` values each; `out_beta`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn cdcg_metropolis_beta(
    n_nodes: size_t,
    edges_from: *const size_t,
    edges_to: *const size_t,
    n_edges: size_t,
    out_beta: *mut f64,
) -> CdcgStatus {
    if out_beta.is_null() || (n_edges > 0 && (edges_from.is_null() || edges_to.is_null())) {
        set_error("null pointer");
        return CdcgStatus::NullPointer;
    }
    let from = if n_edges == 0 { &[][..] } else { std::slice::from_raw_parts(edges_from, n_edges) };
    let to = if n_edges == 0 { &[][..] } else { std::slice::from_raw_parts(edges_to, n_edges) };
    let edges = from.iter().copied().zip(to.iter().copied()).collect();
    match CommGraph::new(n_nodes, edges).and_then(|g| WeightMatrix::metropolis(&g)) {
        Ok(w) => {
            *out_beta = w.beta();
            CdcgStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}
