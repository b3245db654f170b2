#include "model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "heconv.hpp"
#include "packing.hpp"

namespace heprune {

void validate_model_config(const ModelConfig& config) {
  if (config.in_channels < 1 || config.height < 1 || config.width < 1)
    throw std::invalid_argument("model input shape must be positive");
  if (config.num_classes < 2) throw std::invalid_argument("model needs >= 2 classes");
  if (config.conv_widths.empty()) throw std::invalid_argument("model needs >= 1 conv layer");
  if (config.f < 1 || config.f % 2 == 0) throw std::invalid_argument("kernel size must be odd");
  if (config.c_n < 1) throw std::invalid_argument("c_n must be positive");
  if (config.f / 2 >= config.height || config.f / 2 >= config.width)
    throw std::invalid_argument("kernel half-extent exceeds the image");
  if (config.in_channels % config.c_n != 0)
    throw std::invalid_argument("in_channels must be a multiple of c_n");
  for (int width : config.conv_widths)
    if (width < 1 || width % config.c_n != 0)
      throw std::invalid_argument("conv widths must be positive multiples of c_n");
}

ToyCnn init_model(const ModelConfig& config) {
  validate_model_config(config);
  ToyCnn model;
  model.config = config;
  std::mt19937_64 rng(config.seed);

  const auto xavier = [&rng](Tensor& t, int fan_in, int fan_out) {
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : t.data) v = dist(rng);
  };

  int c_in = config.in_channels;
  for (int c_out : config.conv_widths) {
    ConvLayerParams layer;
    layer.weights = Tensor({c_out, c_in, config.f, config.f});
    layer.bias = Tensor::zeros({c_out});
    xavier(layer.weights, c_in * config.f * config.f, c_out * config.f * config.f);
    model.convs.push_back(std::move(layer));
    model.masks.push_back(LayerMask::all_active(c_in, c_out, config.f, config.c_n));
    c_in = c_out;
  }

  DenseParams head;
  head.weights = Tensor({config.num_classes, c_in});
  head.bias = Tensor::zeros({config.num_classes});
  xavier(head.weights, c_in, config.num_classes);
  model.head = std::move(head);
  return model;
}

Tensor forward_plain(const ToyCnn& model, const Tensor& x, ForwardCache* cache) {
  check_shape(x, {model.config.in_channels, model.config.height, model.config.width}, "input");
  if (cache) {
    cache->conv_in.clear();
    cache->conv_out.clear();
  }

  Tensor activ = x;
  for (std::size_t l = 0; l < model.convs.size(); ++l) {
    Tensor z = conv2d_forward(activ, model.convs[l]);
    if (cache) {
      cache->conv_in.push_back(std::move(activ));
      cache->conv_out.push_back(z);
    }
    activ = relu_forward(z);
  }
  Tensor pooled = global_avg_pool_forward(activ);
  Tensor logits = dense_forward(pooled, model.head);
  if (cache) {
    cache->pooled = std::move(pooled);
    cache->logits = logits;
  }
  return logits;
}

Tensor forward_packed(const ToyCnn& model, const Tensor& x, RotationLedger& ledger) {
  check_shape(x, {model.config.in_channels, model.config.height, model.config.width}, "input");
  Tensor activ = x;
  for (std::size_t l = 0; l < model.convs.size(); ++l) {
    const PackedTensor packed = pack(activ, model.config.c_n);
    const PackedTensor z =
        mimo_conv(packed, model.convs[l], model.masks[l], ledger, "conv" + std::to_string(l + 1));
    activ = relu_forward(unpack(z));
  }
  return dense_forward(global_avg_pool_forward(activ), model.head);
}

void ModelGrads::add(const ModelGrads& other) {
  for (std::size_t l = 0; l < conv_w.size(); ++l) {
    for (std::size_t i = 0; i < conv_w[l].size(); ++i) conv_w[l].data[i] += other.conv_w[l].data[i];
    for (std::size_t i = 0; i < conv_b[l].size(); ++i) conv_b[l].data[i] += other.conv_b[l].data[i];
  }
  for (std::size_t i = 0; i < head_w.size(); ++i) head_w.data[i] += other.head_w.data[i];
  for (std::size_t i = 0; i < head_b.size(); ++i) head_b.data[i] += other.head_b.data[i];
}

void ModelGrads::scale(double s) {
  for (auto& t : conv_w)
    for (double& v : t.data) v *= s;
  for (auto& t : conv_b)
    for (double& v : t.data) v *= s;
  for (double& v : head_w.data) v *= s;
  for (double& v : head_b.data) v *= s;
}

ModelGrads zero_grads(const ToyCnn& model) {
  ModelGrads g;
  for (const auto& conv : model.convs) {
    g.conv_w.push_back(Tensor(conv.weights.shape));
    g.conv_b.push_back(Tensor(conv.bias.shape));
  }
  g.head_w = Tensor(model.head.weights.shape);
  g.head_b = Tensor(model.head.bias.shape);
  return g;
}

ModelGrads backward(const ToyCnn& model, const ForwardCache& cache, const Tensor& grad_logits) {
  ModelGrads g = zero_grads(model);
  const std::size_t layers = model.convs.size();
  if (cache.conv_in.size() != layers || cache.conv_out.size() != layers)
    throw std::invalid_argument("forward cache does not match the model");

  const DenseGrads head = dense_backward(cache.pooled, model.head, grad_logits);
  g.head_w = head.grad_w;
  g.head_b = head.grad_b;

  // Last activation feeding the pool is relu(conv_out[last]).
  const Tensor last_act = relu_forward(cache.conv_out[layers - 1]);
  Tensor grad_act = global_avg_pool_backward(last_act.shape, head.grad_x);

  for (std::size_t l = layers; l-- > 0;) {
    const Tensor grad_z = relu_backward(cache.conv_out[l], grad_act);
    ConvGrads cg = conv2d_backward(cache.conv_in[l], model.convs[l], grad_z);
    g.conv_w[l] = std::move(cg.grad_w);
    g.conv_b[l] = std::move(cg.grad_b);
    grad_act = std::move(cg.grad_x);
  }
  return g;
}

double evaluate_accuracy(const ToyCnn& model, const std::vector<Tensor>& images,
                         const std::vector<int>& labels) {
  if (images.empty() || images.size() != labels.size())
    throw std::invalid_argument("evaluation needs matching non-empty images and labels");
  std::size_t correct = 0;
  for (std::size_t n = 0; n < images.size(); ++n) {
    const Tensor logits = forward_plain(model, images[n]);
    int best = 0;
    for (int k = 1; k < logits.dim(0); ++k)
      if (logits.at(k) > logits.at(best)) best = k;
    if (best == labels[n]) ++correct;
  }
  return double(correct) / double(images.size());
}

std::vector<LayerCostSpec> model_cost_specs(const ToyCnn& model) {
  std::vector<LayerCostSpec> specs;
  specs.reserve(model.convs.size());
  for (std::size_t l = 0; l < model.convs.size(); ++l) {
    const LayerMask& mask = model.masks[l];
    specs.push_back({"conv" + std::to_string(l + 1), mask.c_in(), mask.c_out(), mask.f, mask.c_n,
                     mask.alpha(), mask.beta()});
  }
  return specs;
}

MaskRotationCounts model_rotation_counts(const ToyCnn& model) {
  MaskRotationCounts totals;
  for (const LayerMask& mask : model.masks) {
    const MaskRotationCounts c = exact_rotation_counts(mask);
    totals.tau += c.tau;
    totals.pi += c.pi;
  }
  totals.total = totals.tau + totals.pi;
  return totals;
}

}  // namespace heprune
