#ifndef CDCG_H
#define CDCG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes for every fallible call.
 */
typedef enum CdcgStatus {
  CdcgStatus_Ok = 0,
  /**
   * Solver or validation failure; see `cdcg_last_error_message`.
   */
  CdcgStatus_RuntimeError = 1,
  /**
   * Invalid argument values.
   */
  CdcgStatus_InvalidArgument = 2,
  /**
   * The request exceeds a configured capability limit.
   */
  CdcgStatus_CapabilityRefused = 3,
  /**
   * A required pointer was null.
   */
  CdcgStatus_NullPointer = 4,
} CdcgStatus;

/**
 * Opaque grid world handle.
 */
typedef struct CdcgWorld CdcgWorld;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buffer` (NUL
 * terminated, truncated to `length` bytes) and returns the full message
 * length in bytes excluding the terminator. Passing a null buffer just
 * queries the length.
 *
 * # Safety
 * `buffer`, when non-null, must point to `length` writable bytes.
 */
size_t cdcg_last_error_message(char *buffer, size_t length);

/**
 * Crate version as a static NUL-terminated string.
 */
const char *cdcg_version(void);

/**
 * Creates a world with explicit agent positions. Returns null on failure
 * (query `cdcg_last_error_message`).
 *
 * # Safety
 * `xs` and `ys` must point to `n_agents` readable values each.
 */
struct CdcgWorld *cdcg_world_new(size_t width,
                                 size_t height,
                                 uint32_t radius,
                                 const int64_t *xs,
                                 const int64_t *ys,
                                 size_t n_agents);

/**
 * Creates a world with every agent at the grid center.
 */
struct CdcgWorld *cdcg_world_center(size_t width, size_t height, uint32_t radius, size_t n_agents);

/**
 * Creates a world with uniformly random agent positions drawn from `seed`.
 */
struct CdcgWorld *cdcg_world_random(size_t width,
                                    size_t height,
                                    uint32_t radius,
                                    size_t n_agents,
                                    uint64_t seed);

/**
 * Releases a world handle. Null is a no-op.
 *
 * # Safety
 * `world` must be a pointer returned by one of the constructors, not yet
 * freed.
 */
void cdcg_world_free(struct CdcgWorld *world);

/**
 * Number of agents in the world; zero for a null handle.
 *
 * # Safety
 * `world`, when non-null, must be a live world handle.
 */
size_t cdcg_world_agents(const struct CdcgWorld *world);

/**
 * Copies current agent positions into `xs`/`ys`.
 *
 * # Safety
 * `world` must be a live handle; `xs` and `ys` must hold one value per
 * agent.
 */
enum CdcgStatus cdcg_world_positions(const struct CdcgWorld *world, int64_t *xs, int64_t *ys);

/**
 * Applies one control per agent (0 up, 1 down, 2 left, 3 right, 4 stay),
 * clipping at the grid boundary.
 *
 * # Safety
 * `world` must be a live handle; `controls` must hold one value per agent.
 */
enum CdcgStatus cdcg_world_apply(struct CdcgWorld *world,
                                 const uint8_t *controls,
                                 size_t n_controls);

/**
 * Solves the one-step problem with the consensus continuous-greedy solver
 * over a complete communication graph. `samples == 0` requests the exact
 * evaluator (refused above 20 ground elements). Writes one control per
 * agent and, when non-null, the objective value.
 *
 * # Safety
 * `world` must be a live handle; `out_controls` must hold one byte per
 * agent.
 */
enum CdcgStatus cdcg_world_solve_cdcg(const struct CdcgWorld *world,
                                      size_t rounds,
                                      uint32_t samples,
                                      uint64_t seed,
                                      uint8_t *out_controls,
                                      double *out_value);

/**
 * Solves the one-step problem with the sequential greedy baseline.
 *
 * # Safety
 * As [`cdcg_world_solve_cdcg`].
 */
enum CdcgStatus cdcg_world_solve_sga(const struct CdcgWorld *world,
                                     uint8_t *out_controls,
                                     double *out_value);

/**
 * Runs a receding-horizon episode without mutating the input world and
 * writes the cumulative coverage series (`steps + 1` entries, starting
 * from the initial configuration). `use_cdcg == 0` runs the sequential
 * greedy baseline; otherwise the consensus solver with the given rounds
 * and samples (`samples == 0` for exact mode).
 *
 * # Safety
 * `world` must be a live handle; `out_series` must hold `steps + 1`
 * values.
 */
enum CdcgStatus cdcg_world_run_episode(const struct CdcgWorld *world,
                                       uint8_t use_cdcg,
                                       size_t steps,
                                       size_t rounds,
                                       uint32_t samples,
                                       uint64_t seed,
                                       uint64_t *out_series);

/**
 * Builds Metropolis weights for an undirected edge list over `n` nodes and
 * writes the spectral gap parameter beta. Rejects disconnected graphs.
 *
 * # Safety
 * `edges_from` and `edges_to` must hold `n_edges` values each; `out_beta`
 * must be writable.
 */
enum CdcgStatus cdcg_metropolis_beta(size_t n_nodes,
                                     const size_t *edges_from,
                                     const size_t *edges_to,
                                     size_t n_edges,
                                     double *out_beta);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CDCG_H */
