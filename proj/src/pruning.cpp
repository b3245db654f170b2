#include "pruning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "costmodel.hpp"
#include "training.hpp"

namespace heprune {

double positional_group_norm(const Tensor& weights, int u, int v) {
  if (weights.rank() != 4) throw std::invalid_argument("weights must be (c_out, c_in, f, f)");
  const int f = weights.dim(2);
  if (u < 0 || u >= f || v < 0 || v >= weights.dim(3))
    throw std::invalid_argument("kernel position out of range");
  double sq = 0.0;
  for (int o = 0; o < weights.dim(0); ++o)
    for (int i = 0; i < weights.dim(1); ++i) {
      const double w = weights.at(o, i, u, v);
      sq += w * w;
    }
  return std::sqrt(sq);
}

double diagonal_group_norm(const Tensor& weights, int block_in, int block_out, int j, int c_n) {
  if (weights.rank() != 4) throw std::invalid_argument("weights must be (c_out, c_in, f, f)");
  const int c_out = weights.dim(0), c_in = weights.dim(1), f = weights.dim(2);
  if (c_n < 1 || c_in % c_n != 0 || c_out % c_n != 0)
    throw std::invalid_argument("channel counts must be multiples of c_n");
  if (block_in < 0 || block_in >= c_in / c_n || block_out < 0 || block_out >= c_out / c_n)
    throw std::invalid_argument("block index out of range");
  if (j < 0 || j >= c_n) throw std::invalid_argument("diagonal index out of range");
  double sq = 0.0;
  for (int ic = 0; ic < c_n; ++ic) {
    const int i = block_in * c_n + ic;
    const int o = block_out * c_n + (ic + j) % c_n;
    for (int u = 0; u < f; ++u)
      for (int v = 0; v < f; ++v) {
        const double w = weights.at(o, i, u, v);
        sq += w * w;
      }
  }
  return std::sqrt(sq);
}

double channel_group_norm(const Tensor& weights, int o) {
  if (weights.rank() != 4) throw std::invalid_argument("weights must be (c_out, c_in, f, f)");
  if (o < 0 || o >= weights.dim(0)) throw std::invalid_argument("output channel out of range");
  double sq = 0.0;
  for (int i = 0; i < weights.dim(1); ++i)
    for (int u = 0; u < weights.dim(2); ++u)
      for (int v = 0; v < weights.dim(3); ++v) {
        const double w = weights.at(o, i, u, v);
        sq += w * w;
      }
  return std::sqrt(sq);
}

void validate_schedule(const PruneSchedule& schedule) {
  if (schedule.iterations < 1) throw std::invalid_argument("schedule needs >= 1 iteration");
  if (schedule.threshold_start < 0.0 || schedule.threshold_step_p < 0.0 ||
      schedule.threshold_step_d < 0.0)
    throw std::invalid_argument("thresholds must be non-negative");
  if (schedule.finetune_steps < 0) throw std::invalid_argument("finetune_steps must be >= 0");
  if (schedule.finetune_lr < 0.0) throw std::invalid_argument("finetune_lr must be >= 0");
  if (schedule.batch_size < 1) throw std::invalid_argument("batch_size must be positive");
}

void prune_step(ToyCnn& model, double threshold_p, double threshold_d) {
  for (std::size_t l = 0; l < model.convs.size(); ++l) {
    Tensor& weights = model.convs[l].weights;
    LayerMask& mask = model.masks[l];
    for (int u = 0; u < mask.f; ++u)
      for (int v = 0; v < mask.f; ++v) {
        std::uint8_t& flag = mask.positional[static_cast<std::size_t>(u) * mask.f + v];
        if (flag && positional_group_norm(weights, u, v) < threshold_p) flag = 0;
      }
    for (int bi = 0; bi < mask.blocks_in; ++bi)
      for (int bo = 0; bo < mask.blocks_out; ++bo)
        for (int j = 0; j < mask.c_n; ++j) {
          std::uint8_t& flag = mask.diagonal_at(bi, bo, j);
          if (flag && diagonal_group_norm(weights, bi, bo, j, mask.c_n) < threshold_d) flag = 0;
        }
    apply_mask(weights, mask);
  }
}

void channel_prune_step(ToyCnn& model, double threshold) {
  for (std::size_t l = 0; l < model.convs.size(); ++l) {
    Tensor& weights = model.convs[l].weights;
    LayerMask& mask = model.masks[l];
    if (mask.channel.empty()) mask.channel.assign(static_cast<std::size_t>(mask.c_out()), 1);
    for (int o = 0; o < mask.c_out(); ++o) {
      std::uint8_t& flag = mask.channel[static_cast<std::size_t>(o)];
      if (flag && channel_group_norm(weights, o) < threshold) flag = 0;
    }
    apply_mask(weights, mask);
  }
}

namespace {

// Fine-tune with all regularization off and fixed lr; pruned groups stay
// frozen because sgd_step masks their gradients and velocity.
void finetune(ToyCnn& model, const Dataset& train, const PruneSchedule& schedule,
              std::mt19937_64& rng, SgdState& state) {
  if (schedule.finetune_steps == 0 || schedule.finetune_lr == 0.0) return;
  const RegFactors no_reg{};
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;
  for (int step = 0; step < schedule.finetune_steps; ++step) {
    std::vector<std::size_t> batch;
    for (int b = 0; b < schedule.batch_size; ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch.push_back(order[cursor++]);
    }
    sgd_step(model, train.images, train.labels, batch, schedule.finetune_lr, 0.9,
             schedule.label_smoothing, no_reg, state);
  }
}

std::uint64_t dense_rotation_total(const ToyCnn& model) {
  std::uint64_t total = 0;
  for (const LayerMask& mask : model.masks)
    total += rotations_unpruned(
        {"", mask.c_in(), mask.c_out(), mask.f, mask.c_n, 1.0, 1.0});
  return total;
}

double mean_mask_alpha(const ToyCnn& model) {
  double sum = 0.0;
  for (const LayerMask& mask : model.masks) sum += mask.alpha();
  return sum / double(model.masks.size());
}

double mean_mask_beta(const ToyCnn& model) {
  double sum = 0.0;
  for (const LayerMask& mask : model.masks) sum += mask.beta();
  return sum / double(model.masks.size());
}

}  // namespace

PruneTrajectory prune_with_finetune(ToyCnn& model, const PruneSchedule& schedule,
                                    const SyntheticTask& task) {
  validate_schedule(schedule);
  if (task.train.size() == 0 || task.eval.size() == 0)
    throw std::invalid_argument("pruning needs non-empty train and eval splits");

  PruneTrajectory traj;
  traj.unpruned_rotations = dense_rotation_total(model);

  std::mt19937_64 rng(schedule.seed);
  SgdState state = make_sgd_state(model);

  const auto record = [&](int iteration, double t_p, double t_d) {
    PruneRecord r;
    r.iteration = iteration;
    r.threshold_p = t_p;
    r.threshold_d = t_d;
    r.alpha = mean_mask_alpha(model);
    r.beta = mean_mask_beta(model);
    const MaskRotationCounts counts = model_rotation_counts(model);
    r.tau = counts.tau;
    r.pi = counts.pi;
    r.rotations = counts.total;
    r.rotations_reduction_pct =
        100.0 * (double(traj.unpruned_rotations) - double(r.rotations)) /
        double(traj.unpruned_rotations);
    r.accuracy = evaluate_accuracy(model, task.eval.images, task.eval.labels);
    traj.records.push_back(r);
  };

  record(0, 0.0, 0.0);
  for (int t = 1; t <= schedule.iterations; ++t) {
    const double t_p = schedule.threshold_start + t * schedule.threshold_step_p;
    const double t_d = schedule.threshold_start + t * schedule.threshold_step_d;
    prune_step(model, t_p, t_d);
    finetune(model, task.train, schedule, rng, state);
    record(t, t_p, t_d);
  }
  return traj;
}

ChannelPruneTrajectory channel_prune_baseline(ToyCnn& model, const PruneSchedule& schedule,
                                              const SyntheticTask& task) {
  validate_schedule(schedule);
  if (task.train.size() == 0 || task.eval.size() == 0)
    throw std::invalid_argument("pruning needs non-empty train and eval splits");

  ChannelPruneTrajectory traj;
  for (std::size_t l = 0; l < model.convs.size(); ++l)
    traj.unpruned_params += shape_size(model.convs[l].weights.shape);

  std::mt19937_64 rng(schedule.seed);
  SgdState state = make_sgd_state(model);

  const auto active_params = [&] {
    std::int64_t total = 0;
    for (std::size_t l = 0; l < model.convs.size(); ++l)
      total += model.masks[l].active_weight_count(model.masks[l].c_in(), model.masks[l].c_out());
    return total;
  };

  const auto record = [&](int iteration, double threshold) {
    ChannelPruneRecord r;
    r.iteration = iteration;
    r.threshold = threshold;
    r.active_params = active_params();
    r.param_reduction_pct = 100.0 * (double(traj.unpruned_params) - double(r.active_params)) /
                            double(traj.unpruned_params);
    r.accuracy = evaluate_accuracy(model, task.eval.images, task.eval.labels);
    traj.records.push_back(r);
  };

  record(0, 0.0);
  for (int t = 1; t <= schedule.iterations; ++t) {
    // The channel ramp reuses the positional step.
    const double threshold = schedule.threshold_start + t * schedule.threshold_step_p;
    channel_prune_step(model, threshold);
    finetune(model, task.train, schedule, rng, state);
    record(t, threshold);
  }
  return traj;
}

}  // namespace heprune
