#ifndef HEPRUNE_MODEL_HPP
#define HEPRUNE_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "costmodel.hpp"
#include "ledger.hpp"
#include "mask.hpp"
#include "nn.hpp"

namespace heprune {

// Small fixed-topology CNN: a stack of same-padding conv+ReLU blocks with a
// shared packing width, then global average pooling and a dense classifier.
struct ModelConfig {
  int in_channels = 4;
  int height = 6;
  int width = 6;
  int num_classes = 8;
  std::vector<int> conv_widths = {8, 8, 8};
  int f = 3;
  int c_n = 4;
  std::uint64_t seed = 1;
};

struct ToyCnn {
  ModelConfig config;
  std::vector<ConvLayerParams> convs;
  std::vector<LayerMask> masks;  // pruning state, one per conv
  DenseParams head;
};

void validate_model_config(const ModelConfig& config);

// Fan-balanced uniform init for conv and dense weights, zero biases, all
// masks active. Deterministic given config.seed.
ToyCnn init_model(const ModelConfig& config);

// Everything the backward pass needs from one forward evaluation.
struct ForwardCache {
  std::vector<Tensor> conv_in;   // input of each conv
  std::vector<Tensor> conv_out;  // pre-activation output of each conv
  Tensor pooled;
  Tensor logits;
};

Tensor forward_plain(const ToyCnn& model, const Tensor& x, ForwardCache* cache = nullptr);

// Same network with every conv evaluated in the packed domain under the
// layer's mask; rotations land in the ledger. Activations, pooling and the
// dense head run on decoded values.
Tensor forward_packed(const ToyCnn& model, const Tensor& x, RotationLedger& ledger);

struct ModelGrads {
  std::vector<Tensor> conv_w;
  std::vector<Tensor> conv_b;
  Tensor head_w;
  Tensor head_b;

  void add(const ModelGrads& other);
  void scale(double s);
};

ModelGrads zero_grads(const ToyCnn& model);

// Backprop of d(loss)/d(logits) through the cached forward pass.
ModelGrads backward(const ToyCnn& model, const ForwardCache& cache, const Tensor& grad_logits);

double evaluate_accuracy(const ToyCnn& model, const std::vector<Tensor>& images,
                         const std::vector<int>& labels);

// Closed-form cost inputs for each conv layer under its current mask.
std::vector<LayerCostSpec> model_cost_specs(const ToyCnn& model);

// Exact rotation count of one packed forward pass under the current masks.
MaskRotationCounts model_rotation_counts(const ToyCnn& model);

}  // namespace heprune

#endif
