#include "training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "pruning.hpp"

namespace heprune {

namespace {
constexpr double kNormEps = 1e-12;  // groups below this get a zero subgradient
}

void validate_reg(const RegFactors& reg) {
  if (reg.lambda < 0.0 || reg.lambda_p < 0.0 || reg.lambda_d < 0.0)
    throw std::invalid_argument("regularization factors must be non-negative");
}

double lasso_position(const Tensor& weights) {
  const int f = weights.dim(2);
  double sum = 0.0;
  for (int u = 0; u < f; ++u)
    for (int v = 0; v < weights.dim(3); ++v) sum += positional_group_norm(weights, u, v);
  return sum;
}

double lasso_diagonal(const Tensor& weights, int c_n) {
  const int blocks_out = weights.dim(0) / c_n;
  const int blocks_in = weights.dim(1) / c_n;
  double sum = 0.0;
  for (int bi = 0; bi < blocks_in; ++bi)
    for (int bo = 0; bo < blocks_out; ++bo)
      for (int j = 0; j < c_n; ++j) sum += diagonal_group_norm(weights, bi, bo, j, c_n);
  return sum;
}

Tensor lasso_subgradient(const Tensor& weights, int c_n, double lambda_p, double lambda_d) {
  const int c_out = weights.dim(0), c_in = weights.dim(1), f = weights.dim(2);
  Tensor grad(weights.shape);

  if (lambda_p != 0.0) {
    for (int u = 0; u < f; ++u)
      for (int v = 0; v < f; ++v) {
        const double norm = positional_group_norm(weights, u, v);
        if (norm <= kNormEps) continue;
        const double scale = lambda_p / norm;
        for (int o = 0; o < c_out; ++o)
          for (int i = 0; i < c_in; ++i) grad.at(o, i, u, v) += scale * weights.at(o, i, u, v);
      }
  }

  if (lambda_d != 0.0) {
    for (int bi = 0; bi < c_in / c_n; ++bi)
      for (int bo = 0; bo < c_out / c_n; ++bo)
        for (int j = 0; j < c_n; ++j) {
          const double norm = diagonal_group_norm(weights, bi, bo, j, c_n);
          if (norm <= kNormEps) continue;
          const double scale = lambda_d / norm;
          for (int ic = 0; ic < c_n; ++ic) {
            const int i = bi * c_n + ic;
            const int o = bo * c_n + (ic + j) % c_n;
            for (int u = 0; u < f; ++u)
              for (int v = 0; v < f; ++v) grad.at(o, i, u, v) += scale * weights.at(o, i, u, v);
          }
        }
  }
  return grad;
}

double reg_loss(const ToyCnn& model, const RegFactors& reg) {
  validate_reg(reg);
  double loss = 0.0;
  for (const ConvLayerParams& conv : model.convs) {
    if (reg.lambda != 0.0) {
      double sq = 0.0;
      for (double w : conv.weights.data) sq += w * w;
      loss += reg.lambda * sq;
    }
    if (reg.lambda_p != 0.0) loss += reg.lambda_p * lasso_position(conv.weights);
    if (reg.lambda_d != 0.0) loss += reg.lambda_d * lasso_diagonal(conv.weights, model.config.c_n);
  }
  return loss;
}

double total_loss(const ToyCnn& model, const std::vector<Tensor>& images,
                  const std::vector<int>& labels, double label_smoothing, const RegFactors& reg) {
  if (images.empty() || images.size() != labels.size())
    throw std::invalid_argument("loss needs matching non-empty images and labels");
  double data = 0.0;
  for (std::size_t n = 0; n < images.size(); ++n) {
    const Tensor logits = forward_plain(model, images[n]);
    data += softmax_xent_loss(logits, labels[n], label_smoothing);
  }
  return data / double(images.size()) + reg_loss(model, reg);
}

void validate_train_config(const TrainConfig& config) {
  if (config.lr_init <= 0.0) throw std::invalid_argument("lr_init must be positive");
  if (config.momentum < 0.0 || config.momentum >= 1.0)
    throw std::invalid_argument("momentum must lie in [0, 1)");
  if (config.batch_size < 1) throw std::invalid_argument("batch_size must be positive");
  if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (config.label_smoothing < 0.0 || config.label_smoothing >= 1.0)
    throw std::invalid_argument("label_smoothing must lie in [0, 1)");
  if (config.lr_drop_factor <= 0.0) throw std::invalid_argument("lr_drop_factor must be positive");
}

double learning_rate_at(const TrainConfig& config, int epoch) {
  if (config.schedule == LrSchedule::cosine) {
    const double phase = double(epoch) / double(config.epochs);
    return config.lr_init * 0.5 * (1.0 + std::cos(phase * 3.14159265358979323846));
  }
  double lr = config.lr_init;
  for (int drop : config.lr_drop_epochs)
    if (epoch >= drop) lr /= config.lr_drop_factor;
  return lr;
}

SgdState make_sgd_state(const ToyCnn& model) { return SgdState{zero_grads(model)}; }

namespace {

// Zeroes entries belonging to pruned groups so frozen weights stay at zero.
void mask_out(const ToyCnn& model, ModelGrads& grads) {
  for (std::size_t l = 0; l < model.convs.size(); ++l) {
    const LayerMask& mask = model.masks[l];
    Tensor& gw = grads.conv_w[l];
    for (int o = 0; o < gw.dim(0); ++o)
      for (int i = 0; i < gw.dim(1); ++i)
        for (int u = 0; u < gw.dim(2); ++u)
          for (int v = 0; v < gw.dim(3); ++v)
            if (!mask.weight_active(o, i, u, v)) gw.at(o, i, u, v) = 0.0;
  }
}

}  // namespace

double sgd_step(ToyCnn& model, const std::vector<Tensor>& images, const std::vector<int>& labels,
                std::span<const std::size_t> batch, double lr, double momentum,
                double label_smoothing, const RegFactors& reg, SgdState& state) {
  if (batch.empty()) throw std::invalid_argument("sgd_step needs a non-empty batch");
  validate_reg(reg);

  ModelGrads grads = zero_grads(model);
  double data_loss = 0.0;
  ForwardCache cache;
  for (std::size_t idx : batch) {
    forward_plain(model, images[idx], &cache);
    const auto [loss, grad_logits] =
        softmax_xent_with_grad(cache.logits, labels[idx], label_smoothing);
    data_loss += loss;
    ModelGrads g = backward(model, cache, grad_logits);
    grads.add(g);
  }
  grads.scale(1.0 / double(batch.size()));
  data_loss /= double(batch.size());

  const double batch_loss = data_loss + reg_loss(model, reg);
  if (!std::isfinite(batch_loss)) {
    std::ostringstream msg;
    msg << "training diverged: non-finite batch loss " << batch_loss;
    throw std::runtime_error(msg.str());
  }

  // Regularization acts once per step, on conv weights only.
  for (std::size_t l = 0; l < model.convs.size(); ++l) {
    const Tensor& w = model.convs[l].weights;
    Tensor& gw = grads.conv_w[l];
    if (reg.lambda != 0.0)
      for (std::size_t i = 0; i < w.size(); ++i) gw.data[i] += 2.0 * reg.lambda * w.data[i];
    if (reg.lambda_p != 0.0 || reg.lambda_d != 0.0) {
      const Tensor sub = lasso_subgradient(w, model.config.c_n, reg.lambda_p, reg.lambda_d);
      for (std::size_t i = 0; i < w.size(); ++i) gw.data[i] += sub.data[i];
    }
  }

  mask_out(model, grads);

  // v <- momentum v + g; w <- w - lr v
  const auto update = [&](Tensor& param, Tensor& vel, const Tensor& grad) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      vel.data[i] = momentum * vel.data[i] + grad.data[i];
      param.data[i] -= lr * vel.data[i];
    }
  };
  for (std::size_t l = 0; l < model.convs.size(); ++l) {
    update(model.convs[l].weights, state.velocity.conv_w[l], grads.conv_w[l]);
    update(model.convs[l].bias, state.velocity.conv_b[l], grads.conv_b[l]);
  }
  update(model.head.weights, state.velocity.head_w, grads.head_w);
  update(model.head.bias, state.velocity.head_b, grads.head_b);

  // Masked weights must remain exactly zero after the update.
  for (std::size_t l = 0; l < model.convs.size(); ++l)
    apply_mask(model.convs[l].weights, model.masks[l]);

  return batch_loss;
}

double mean_positional_norm(const ToyCnn& model) {
  double sum = 0.0;
  int count = 0;
  for (const ConvLayerParams& conv : model.convs) {
    const int f = conv.weights.dim(2);
    for (int u = 0; u < f; ++u)
      for (int v = 0; v < f; ++v) {
        sum += positional_group_norm(conv.weights, u, v);
        ++count;
      }
  }
  return count ? sum / count : 0.0;
}

double mean_diagonal_norm(const ToyCnn& model) {
  double sum = 0.0;
  int count = 0;
  const int c_n = model.config.c_n;
  for (const ConvLayerParams& conv : model.convs) {
    const int blocks_out = conv.weights.dim(0) / c_n;
    const int blocks_in = conv.weights.dim(1) / c_n;
    for (int bi = 0; bi < blocks_in; ++bi)
      for (int bo = 0; bo < blocks_out; ++bo)
        for (int j = 0; j < c_n; ++j) {
          sum += diagonal_group_norm(conv.weights, bi, bo, j, c_n);
          ++count;
        }
  }
  return count ? sum / count : 0.0;
}

TrainHistory train(ToyCnn& model, const SyntheticTask& task, const TrainConfig& config,
                   const RegFactors& reg) {
  validate_train_config(config);
  validate_reg(reg);
  if (task.train.size() == 0 || task.eval.size() == 0)
    throw std::invalid_argument("training needs non-empty train and eval splits");

  std::mt19937_64 rng(config.seed);
  SgdState state = make_sgd_state(model);
  std::vector<std::size_t> order(task.train.size());
  std::iota(order.begin(), order.end(), 0);

  TrainHistory history;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = learning_rate_at(config, epoch);
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const std::span<const std::size_t> batch(order.data() + begin, end - begin);
      loss_sum += sgd_step(model, task.train.images, task.train.labels, batch, lr, config.momentum,
                           config.label_smoothing, reg, state);
      ++batches;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = loss_sum / double(batches);
    rec.eval_accuracy = evaluate_accuracy(model, task.eval.images, task.eval.labels);
    rec.mean_positional_norm = mean_positional_norm(model);
    rec.mean_diagonal_norm = mean_diagonal_norm(model);
    history.epochs.push_back(rec);
  }
  return history;
}

}  // namespace heprune
