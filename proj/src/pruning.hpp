#ifndef HEPRUNE_PRUNING_HPP
#define HEPRUNE_PRUNING_HPP

#include <cstdint>
#include <vector>

#include "dataset.hpp"
#include "mask.hpp"
#include "model.hpp"
#include "tensor.hpp"

namespace heprune {

// L2 norm of every weight at kernel position (u, v) across the whole layer.
double positional_group_norm(const Tensor& weights, int u, int v);

// L2 norm of the c_n kernels on generalized diagonal j of block pair (bi, bo).
double diagonal_group_norm(const Tensor& weights, int block_in, int block_out, int j, int c_n);

// L2 norm of one output channel's weights.
double channel_group_norm(const Tensor& weights, int o);

// Linear threshold ramp: threshold_t = start + t * step, separate ramps for
// positional and diagonal groups. Fine-tuning runs after every prune step
// with all regularization off.
struct PruneSchedule {
  int iterations = 100;
  double threshold_start = 0.0;
  double threshold_step_p = 0.0;
  double threshold_step_d = 0.0;
  int finetune_steps = 10;
  double finetune_lr = 1e-4;
  int batch_size = 16;
  double label_smoothing = 0.1;
  std::uint64_t seed = 1;
};

void validate_schedule(const PruneSchedule& schedule);

// One prune pass over every conv layer: any group whose norm is strictly
// below its threshold is marked pruned and its weights are zeroed. Masks only
// ever move active -> pruned.
void prune_step(ToyCnn& model, double threshold_p, double threshold_d);

// Channel variant used by the conventional-pruning baseline.
void channel_prune_step(ToyCnn& model, double threshold);

struct PruneRecord {
  int iteration = 0;
  double threshold_p = 0.0;
  double threshold_d = 0.0;
  double alpha = 1.0;
  double beta = 1.0;
  std::uint64_t tau = 0;
  std::uint64_t pi = 0;
  std::uint64_t rotations = 0;
  double rotations_reduction_pct = 0.0;
  double accuracy = 0.0;
};

struct PruneTrajectory {
  std::uint64_t unpruned_rotations = 0;
  std::vector<PruneRecord> records;
};

// Iterative prune-and-finetune: raise thresholds, prune, fine-tune with
// masked gradients, then record retained fractions, the exact rotation count
// under the new masks, and held-out accuracy. Row 0 is the state before any
// pruning. Deterministic given schedule.seed.
PruneTrajectory prune_with_finetune(ToyCnn& model, const PruneSchedule& schedule,
                                    const SyntheticTask& task);

struct ChannelPruneRecord {
  int iteration = 0;
  double threshold = 0.0;
  std::int64_t active_params = 0;
  double param_reduction_pct = 0.0;
  double accuracy = 0.0;
};

struct ChannelPruneTrajectory {
  std::int64_t unpruned_params = 0;
  std::vector<ChannelPruneRecord> records;
};

// Same loop with per-output-channel groups; progress is measured in retained
// conv parameters because channel pruning does not remove rotations by itself.
ChannelPruneTrajectory channel_prune_baseline(ToyCnn& model, const PruneSchedule& schedule,
                                              const SyntheticTask& task);

}  // namespace heprune

#endif
