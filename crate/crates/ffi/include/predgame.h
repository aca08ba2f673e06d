#ifndef PREDGAME_H
#define PREDGAME_H

/* Generated by cbindgen; run cargo build in crates/ffi to refresh. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status of a C API call.
 */
typedef enum {
  PG_OK = 0,
  PG_CONFIG_ERROR = 1,
  PG_INPUT_ERROR = 2,
  PG_UNSUPPORTED = 3,
  PG_RESOURCE_ERROR = 4,
  PG_INTERNAL_ERROR = 5,
  PG_NULL_ARGUMENT = 6,
  PG_INVALID_UTF8 = 7,
} PgStatus;

/**
 * Opaque handle to an empirical game.
 */
typedef struct PgGame PgGame;

/**
 * Opaque handle to a loaded sample.
 */
typedef struct PgSample PgSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; do not free.
 */
const char *pg_version(void);

/**
 * Message describing the calling thread's most recent failure; valid until
 * the next failing call on this thread. Do not free.
 */
const char *pg_last_error_message(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `ptr` must come from a `*_json` out-parameter of this library and must
 * not have been freed already.
 */
void pg_string_free(char *ptr);

/**
 * Read a sample from a CSV file with header `x1,...,xn,y,t`.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string; `out` must be a valid
 * pointer.
 */
PgStatus pg_sample_read_csv(const char *path, PgSample **out);

/**
 * Parse a sample from its JSON descriptor.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` must be valid.
 */
PgStatus pg_sample_from_json(const char *json, PgSample **out);

/**
 * Draw a seeded sample from a distribution descriptor (JSON).
 *
 * # Safety
 * `dist_json` must be a valid NUL-terminated string; `out` must be valid.
 */
PgStatus pg_sample_draw(const char *dist_json, uintptr_t m, uint64_t seed, PgSample **out);

/**
 * Number of points in the sample; zero for a null handle.
 *
 * # Safety
 * `sample` must be null or a live handle from this library.
 */
uintptr_t pg_sample_len(const PgSample *sample);

/**
 * # Safety
 * `sample` must come from this library and not be freed twice.
 */
void pg_sample_free(PgSample *sample);

/**
 * Parse an empirical game from its JSON descriptor.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` must be valid.
 */
PgStatus pg_game_from_json(const char *json, PgGame **out);

/**
 * Number of players; zero for a null handle.
 *
 * # Safety
 * `game` must be null or a live handle from this library.
 */
uintptr_t pg_game_players(const PgGame *game);

/**
 * # Safety
 * `game` must come from this library and not be freed twice.
 */
void pg_game_free(PgGame *game);

/**
 * Minimal sample size for the accuracy/confidence pair.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
PgStatus pg_required_sample_size(double epsilon,
                                 double delta,
                                 uint64_t d,
                                 uint64_t players,
                                 uint64_t *out);

/**
 * Uniform-convergence tail bound at sample size `m`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
PgStatus pg_uniform_convergence_bound(uint64_t m,
                                      double epsilon,
                                      uint64_t d,
                                      uint64_t players,
                                      double *out);

/**
 * Frequency of fair-coin runs of length `m` whose mean lies strictly
 * between one half and three quarters.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
PgStatus pg_simulate_claim_a6(uint64_t trials, uint64_t m, uint64_t seed, double *out);

/**
 * Per-player empirical payoffs of a profile (JSON array of numbers).
 *
 * # Safety
 * Pointer arguments must be valid; `profile_json` NUL-terminated.
 */
PgStatus pg_empirical_payoffs_json(const PgGame *game, const char *profile_json, char **out_json);

/**
 * Run better-response dynamics from the default (or given) starting
 * profile with a round-robin schedule. `initial_json` may be null;
 * `max_iterations` of zero means unlimited. The result JSON carries the
 * final profile, step count, termination flag, payoffs, and potential.
 *
 * # Safety
 * Pointer arguments must be valid; strings NUL-terminated.
 */
PgStatus pg_run_dynamics_json(const PgGame *game,
                              const char *initial_json,
                              double epsilon,
                              uint64_t max_iterations,
                              char **out_json);

/**
 * Check a profile for approximate-equilibrium violations. The result JSON
 * carries the verdict and, on violation, the player, gain, and witness.
 *
 * # Safety
 * Pointer arguments must be valid; `profile_json` NUL-terminated.
 */
PgStatus pg_verify_epsilon_pne_json(const PgGame *game,
                                    const char *profile_json,
                                    double epsilon,
                                    char **out_json);

/**
 * Enumerate all exact pure equilibria of a finite game (budget on the
 * profile count). The result JSON carries the count and the profiles.
 *
 * # Safety
 * Pointer arguments must be valid.
 */
PgStatus pg_enumerate_pne_json(const PgGame *game, uint64_t budget, char **out_json);

/**
 * Best linear response to an opponent profile (JSON, may be null for an
 * empty market) on a sample. The result JSON carries the hypothesis, its
 * payoff, and the chosen region labels.
 *
 * # Safety
 * Pointer arguments must be valid; strings NUL-terminated.
 */
PgStatus pg_best_linear_response_json(const PgSample *sample,
                                      const char *opponents_json,
                                      char **out_json);

/**
 * Monte Carlo population payoffs of a profile under a distribution
 * descriptor. The result JSON carries payoff estimates and standard
 * errors.
 *
 * # Safety
 * Pointer arguments must be valid; strings NUL-terminated.
 */
PgStatus pg_monte_carlo_payoffs_json(const char *dist_json,
                                     const char *profile_json,
                                     uint64_t draws,
                                     uint64_t seed,
                                     char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PREDGAME_H */
