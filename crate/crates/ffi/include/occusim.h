#ifndef OCCUSIM_H
#define OCCUSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OccusimStatus {
  OCCUSIM_STATUS_OK = 0,
  OCCUSIM_STATUS_NULL_POINTER = 1,
  OCCUSIM_STATUS_INVALID_UTF8 = 2,
  OCCUSIM_STATUS_IO = 3,
  OCCUSIM_STATUS_PARSE = 4,
  OCCUSIM_STATUS_VALIDATION = 5,
  OCCUSIM_STATUS_ZERO_EVIDENCE = 6,
  OCCUSIM_STATUS_INVALID_ARGUMENT = 7,
  OCCUSIM_STATUS_BUFFER_TOO_SMALL = 8,
  OCCUSIM_STATUS_PANIC = 9,
} OccusimStatus;

/**
 * Per-slot statistics of a Monte Carlo ensemble.
 */
typedef struct OccusimAggregate OccusimAggregate;

/**
 * A validated scenario.
 */
typedef struct OccusimScenario OccusimScenario;

typedef struct OccusimCo2Stats {
  double mean;
  double min;
  double max;
  double q10;
  double q50;
  double q90;
} OccusimCo2Stats;

typedef struct OccusimFlows {
  double q_in;
  double q_out;
} OccusimFlows;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static string.
 */
const char *occusim_version(void);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library on the same thread.
 */
const char *occusim_last_error_message(void);

/**
 * Load and validate a scenario file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum OccusimStatus occusim_scenario_load(const char *path, struct OccusimScenario **out);

/**
 * Parse and validate a scenario from JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum OccusimStatus occusim_scenario_load_str(const char *json, struct OccusimScenario **out);

/**
 * # Safety
 * `scenario` must come from a load function and not be used afterwards.
 * Null is ignored.
 */
void occusim_scenario_free(struct OccusimScenario *scenario);

/**
 * # Safety
 * `scenario` must be a live handle and `out` a writable pointer.
 */
enum OccusimStatus occusim_scenario_node_count(const struct OccusimScenario *scenario, size_t *out);

/**
 * # Safety
 * `scenario` must be a live handle and `out` a writable pointer.
 */
enum OccusimStatus occusim_scenario_slot_count(const struct OccusimScenario *scenario, size_t *out);

/**
 * Exact single-slice posterior of `node`. Evidence is given as two
 * parallel arrays of `evidence_len` node names and labels. The
 * distribution, in the node's state order, is written to `probabilities`
 * and its length to `out_len`. If `capacity` is too small only `out_len`
 * is written and `BufferTooSmall` is returned.
 *
 * # Safety
 * String arguments must be NUL-terminated; the evidence arrays must hold
 * `evidence_len` entries; `probabilities` must hold `capacity` doubles.
 */
enum OccusimStatus occusim_query(const struct OccusimScenario *scenario,
                                 const char *node,
                                 const char *const *evidence_nodes,
                                 const char *const *evidence_labels,
                                 size_t evidence_len,
                                 double *probabilities,
                                 size_t capacity,
                                 size_t *out_len);

/**
 * Run `runs` co-simulated days seeded from `seed` and aggregate them.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a writable pointer.
 */
enum OccusimStatus occusim_monte_carlo(const struct OccusimScenario *scenario,
                                       size_t runs,
                                       uint64_t seed,
                                       struct OccusimAggregate **out);

/**
 * # Safety
 * `aggregate` must come from [`occusim_monte_carlo`] and not be used
 * afterwards. Null is ignored.
 */
void occusim_aggregate_free(struct OccusimAggregate *aggregate);

/**
 * # Safety
 * `aggregate` must be a live handle and `out` a writable pointer.
 */
enum OccusimStatus occusim_aggregate_slot_count(const struct OccusimAggregate *aggregate,
                                                size_t *out);

/**
 * Hour of slot `slot`.
 *
 * # Safety
 * `aggregate` must be a live handle and `out` a writable pointer.
 */
enum OccusimStatus occusim_aggregate_slot_hour(const struct OccusimAggregate *aggregate,
                                               size_t slot,
                                               uint32_t *out);

/**
 * End-of-slot CO2 statistics across runs, ppm.
 *
 * # Safety
 * `aggregate` must be a live handle and `out` a writable pointer.
 */
enum OccusimStatus occusim_aggregate_co2_stats(const struct OccusimAggregate *aggregate,
                                               size_t slot,
                                               struct OccusimCo2Stats *out);

/**
 * Number of runs in which tracked `node` took `label` at slot `slot`.
 *
 * # Safety
 * `aggregate` must be a live handle, `node` and `label` NUL-terminated and
 * `out` a writable pointer.
 */
enum OccusimStatus occusim_aggregate_histogram_count(const struct OccusimAggregate *aggregate,
                                                     size_t slot,
                                                     const char *node,
                                                     const char *label,
                                                     uint64_t *out);

/**
 * Write the aggregate as JSON.
 *
 * # Safety
 * `aggregate` must be a live handle and `path` NUL-terminated.
 */
enum OccusimStatus occusim_aggregate_write_json(const struct OccusimAggregate *aggregate,
                                                const char *path);

/**
 * Write the aggregate as CSV, one row per slot.
 *
 * # Safety
 * `aggregate` must be a live handle and `path` NUL-terminated.
 */
enum OccusimStatus occusim_aggregate_write_csv(const struct OccusimAggregate *aggregate,
                                               const char *path);

/**
 * One exact zone CO2 step over `dt` seconds. Flows in m3/s, generation in
 * m3/s of CO2, concentrations in ppm, volume in m3.
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum OccusimStatus occusim_co2_step(double c_k,
                                    double q_in,
                                    double q_out,
                                    double generation,
                                    double c_supply,
                                    double dt,
                                    double volume,
                                    double *out);

/**
 * Stack-effect flows through one opening. A NaN `neutral_plane` means
 * mid-height.
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum OccusimStatus occusim_stack_airflow(double height,
                                         double width,
                                         double discharge_coefficient,
                                         double neutral_plane,
                                         double t_in,
                                         double t_out,
                                         double opening_ratio,
                                         struct OccusimFlows *out);

/**
 * CO2 level with the default thresholds: 0 low (< 1000 ppm), 1 medium
 * (< 1700 ppm), 2 high.
 */
uint32_t occusim_discretize_co2(double concentration);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OCCUSIM_H */
