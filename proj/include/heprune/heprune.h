#ifndef HEPRUNE_H
#define HEPRUNE_H

/* C interface to the packed-convolution emulator: rotation-exact convolution
 * in the SIMD slot domain, closed-form rotation cost laws, group-Lasso
 * training, structured pruning, and accuracy-vs-rotation sweeps.
 *
 * Every fallible call returns hp_status; on failure hp_last_error() holds a
 * thread-local message describing what went wrong. Strings handed back
 * through char** out parameters are heap-allocated and must be released with
 * hp_string_free(). */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hp_status {
  HP_OK = 0,
  HP_ERR_INVALID_ARGUMENT = 1,
  HP_ERR_IO = 2,
  HP_ERR_RUNTIME = 3
} hp_status;

/* Semantic library version, e.g. "0.1.0". Static storage; do not free. */
const char* hp_version(void);

/* Message of the most recent failing call on this thread, "" after a
 * successful one. Static storage; do not free. */
const char* hp_last_error(void);

/* Releases a string returned via a char** out parameter. NULL is a no-op. */
void hp_string_free(char* str);

/* ---------------------------------------------------------------- ledger */

/* Exact count of slot rotations executed by packed convolutions: tau
 * (intra-channel shifts) and pi (channel-block shifts), with a per-layer
 * breakdown. */
typedef struct hp_ledger hp_ledger;

hp_status hp_ledger_create(hp_ledger** out_ledger);
void hp_ledger_free(hp_ledger* ledger);
hp_status hp_ledger_reset(hp_ledger* ledger);
hp_status hp_ledger_counts(const hp_ledger* ledger, uint64_t* out_tau, uint64_t* out_pi,
                           uint64_t* out_total);
/* Per-layer breakdown as a JSON array (tau, pi, totals, estimator values). */
hp_status hp_ledger_json(const hp_ledger* ledger, char** out_json);

/* --------------------------------------------------- packed convolution */

/* Stride-1 same-padding convolution evaluated in the packed slot domain with
 * every rotation recorded in `ledger`. The result equals a plain convolution
 * with mask-zeroed weights.
 *   x                c_in*height*width doubles, row major
 *   weights          c_out*c_in*f*f doubles; bias c_out doubles or NULL
 *   c_n              channels per ciphertext; divides c_in and c_out
 *   positional_mask  f*f entries in {0,1}, or NULL for all active
 *   diagonal_mask    (c_in/c_n)*(c_out/c_n)*c_n entries in {0,1}, indexed
 *                    (block_in*blocks_out + block_out)*c_n + j, or NULL
 *   layer_id         name for the ledger breakdown; NULL for "conv"
 *   out              c_out*height*width doubles, written on success */
hp_status hp_packed_conv(const double* x, int32_t c_in, int32_t height, int32_t width,
                         const double* weights, const double* bias, int32_t c_out, int32_t f,
                         int32_t c_n, const uint8_t* positional_mask,
                         const uint8_t* diagonal_mask, hp_ledger* ledger, const char* layer_id,
                         double* out);

/* ------------------------------------------------------------ cost model */

/* Closed-form rotation count of one unpruned layer. */
hp_status hp_rotations_unpruned(int32_t c_in, int32_t c_out, int32_t f, int32_t c_n,
                                uint64_t* out_rotations);

/* Closed-form count with retained fractions alpha (positional groups) and
 * beta (nonzero diagonal groups), both in [0,1]. */
hp_status hp_rotations_pruned(int32_t c_in, int32_t c_out, int32_t f, int32_t c_n, double alpha,
                              double beta, double* out_rotations);

/* Network report from a layer-spec document: a JSON array (or {"layers":[...]})
 * of {"name","c_in","c_out","f","c_n"} with optional "alpha"/"beta". Returns
 * per-layer and total counts as JSON or as a rendered text table. */
hp_status hp_cost_report_json(const char* specs_json, char** out_json);
hp_status hp_cost_report_table(const char* specs_json, char** out_table);

/* ---------------------------------------------------- experiment drivers */

/* Trains a model from scratch on the synthetic task.
 * config_json: {"task":{},"model":{},"train":{},"reg":{}}, every section and
 * field optional. Writes a checkpoint when checkpoint_path is non-NULL and
 * returns the per-epoch history CSV when out_history_csv is non-NULL. */
hp_status hp_train_run(const char* config_json, const char* checkpoint_path,
                       char** out_history_csv);

/* Runs the iterative prune + finetune loop on a checkpointed model.
 * config_json: {"task":{},"schedule":{},"channel":false}; the task must match
 * the checkpoint's input shape, and "channel" selects the per-channel
 * baseline arm instead of positional/diagonal pruning. Writes the pruned
 * model when pruned_checkpoint_path is non-NULL and returns the trajectory
 * CSV when out_trajectory_csv is non-NULL. */
hp_status hp_prune_run(const char* checkpoint_path, const char* config_json,
                       const char* pruned_checkpoint_path, char** out_trajectory_csv);

/* Runs the full train -> prune grid sweep described by spec_json (mode,
 * lambda grids, seeds, task/model/train/schedule sections). Writes per-run
 * trajectory and history CSVs plus sweep.json into out_dir and returns the
 * summary JSON when out_summary_json is non-NULL. */
hp_status hp_sweep_run(const char* spec_json, const char* out_dir, char** out_summary_json);

/* Loads a sweep results directory and extracts the Pareto frontier over
 * (accuracy, reduction). Either output may be NULL. */
hp_status hp_pareto_extract(const char* results_dir, char** out_frontier_csv,
                            char** out_frontier_json);

/* Ratio of frontier A's max reduction to frontier B's at the accuracy floor
 * (best accuracy across both frontiers minus accuracy_drop, all in [0,1]
 * units). Inputs are frontier JSON documents from hp_pareto_extract. Returns
 * 1 when neither frontier reaches the floor with positive reduction and +inf
 * when only A does. */
hp_status hp_compare_frontiers(const char* frontier_a_json, const char* frontier_b_json,
                               double accuracy_drop, double* out_ratio);

/* Runs the built-in self-check: packed convolutions against an independently
 * coded direct convolution, ledger totals against the closed-form count laws,
 * and the training gradient against finite differences. *out_ok is 1 when
 * every check passed; the report has one line per check. */
hp_status hp_verify_run(uint64_t seed, int32_t* out_ok, char** out_report);

#ifdef __cplusplus
}
#endif

#endif
