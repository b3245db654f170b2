#ifndef HEPRUNE_TRAINING_HPP
#define HEPRUNE_TRAINING_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "dataset.hpp"
#include "model.hpp"
#include "tensor.hpp"

namespace heprune {

// Regularization strengths: unstructured L2 plus positional and diagonal
// group Lasso. All terms act on conv weights only.
struct RegFactors {
  double lambda = 0.0;
  double lambda_p = 0.0;
  double lambda_d = 0.0;
};

void validate_reg(const RegFactors& reg);

// Sum over kernel positions of the positional group norms.
double lasso_position(const Tensor& weights);

// Sum over block pairs and diagonal indices of the diagonal group norms.
double lasso_diagonal(const Tensor& weights, int c_n);

// Subgradient of lambda_p * lasso_position + lambda_d * lasso_diagonal: each
// weight receives lambda * w / ||group|| from every group containing it, and
// zero from groups whose norm is below 1e-12.
Tensor lasso_subgradient(const Tensor& weights, int c_n, double lambda_p, double lambda_d);

// Regularization value alone: lambda * sum w^2 + lambda_p * sum R_p +
// lambda_d * sum R_d over the conv layers.
double reg_loss(const ToyCnn& model, const RegFactors& reg);

// Mean data loss over the batch plus the regularization terms.
double total_loss(const ToyCnn& model, const std::vector<Tensor>& images,
                  const std::vector<int>& labels, double label_smoothing, const RegFactors& reg);

enum class LrSchedule { cosine, multistep };

struct TrainConfig {
  double lr_init = 0.01;
  double momentum = 0.9;
  LrSchedule schedule = LrSchedule::cosine;
  std::vector<int> lr_drop_epochs = {50, 100, 130, 160};
  double lr_drop_factor = 5.0;
  int batch_size = 16;
  int epochs = 30;
  double label_smoothing = 0.1;
  std::uint64_t seed = 1;
};

void validate_train_config(const TrainConfig& config);

double learning_rate_at(const TrainConfig& config, int epoch);

struct SgdState {
  ModelGrads velocity;
};

SgdState make_sgd_state(const ToyCnn& model);

// One SGD-momentum step on the mean total loss of the given batch. Gradients
// and velocity entries of pruned weights are zeroed so masks freeze them.
// Returns the batch loss before the step; throws on non-finite loss.
double sgd_step(ToyCnn& model, const std::vector<Tensor>& images, const std::vector<int>& labels,
                std::span<const std::size_t> batch, double lr, double momentum,
                double label_smoothing, const RegFactors& reg, SgdState& state);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double eval_accuracy = 0.0;
  double mean_positional_norm = 0.0;
  double mean_diagonal_norm = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

// Full training loop: shuffled minibatches, SGD with momentum, per-epoch
// history. Deterministic given config.seed on a single thread.
TrainHistory train(ToyCnn& model, const SyntheticTask& task, const TrainConfig& config,
                   const RegFactors& reg);

double mean_positional_norm(const ToyCnn& model);
double mean_diagonal_norm(const ToyCnn& model);

}  // namespace heprune

#endif
