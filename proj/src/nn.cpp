#include "nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace heprune {

void validate_conv_params(const ConvLayerParams& p) {
  if (p.weights.rank() != 4) throw std::invalid_argument("conv weights must be 4-D");
  if (p.weights.dim(2) != p.weights.dim(3))
    throw std::invalid_argument("conv kernel must be square");
  if (p.weights.dim(2) % 2 == 0) throw std::invalid_argument("conv kernel size must be odd");
  check_shape(p.bias, {p.weights.dim(0)}, "conv bias");
}

Tensor conv2d_forward(const Tensor& x, const ConvLayerParams& p) {
  validate_conv_params(p);
  if (x.rank() != 3) throw std::invalid_argument("conv input must be (c,h,w)");
  const int c_in = p.c_in();
  const int c_out = p.c_out();
  const int f = p.kernel();
  const int half = f / 2;
  if (x.dim(0) != c_in) throw std::invalid_argument("conv input channel mismatch");
  const int h = x.dim(1);
  const int w = x.dim(2);

  Tensor y({c_out, h, w});
  for (int o = 0; o < c_out; ++o) {
    const double b = p.bias.at(o);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) y.at(o, r, c) = b;
    for (int i = 0; i < c_in; ++i) {
      for (int u = 0; u < f; ++u) {
        const int dy = u - half;
        const int r0 = std::max(0, -dy);
        const int r1 = std::min(h, h - dy);
        for (int v = 0; v < f; ++v) {
          const double wt = p.weights.at(o, i, u, v);
          if (wt == 0.0) continue;
          const int dx = v - half;
          const int c0 = std::max(0, -dx);
          const int c1 = std::min(w, w - dx);
          for (int r = r0; r < r1; ++r) {
            const double* xin = &x.data[(static_cast<std::size_t>(i) * h + (r + dy)) * w];
            double* yout = &y.data[(static_cast<std::size_t>(o) * h + r) * w];
            for (int c = c0; c < c1; ++c) yout[c] += wt * xin[c + dx];
          }
        }
      }
    }
  }
  return y;
}

ConvGrads conv2d_backward(const Tensor& x, const ConvLayerParams& p, const Tensor& grad_out) {
  validate_conv_params(p);
  const int c_in = p.c_in();
  const int c_out = p.c_out();
  const int f = p.kernel();
  const int half = f / 2;
  if (x.rank() != 3 || x.dim(0) != c_in) throw std::invalid_argument("conv input shape mismatch");
  const int h = x.dim(1);
  const int w = x.dim(2);
  check_shape(grad_out, {c_out, h, w}, "conv grad_out");

  ConvGrads g{Tensor({c_in, h, w}), Tensor({c_out, c_in, f, f}), Tensor({c_out})};
  for (int o = 0; o < c_out; ++o) {
    double gb = 0.0;
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) gb += grad_out.at(o, r, c);
    g.grad_b.at(o) = gb;

    for (int i = 0; i < c_in; ++i) {
      for (int u = 0; u < f; ++u) {
        const int dy = u - half;
        const int r0 = std::max(0, -dy);
        const int r1 = std::min(h, h - dy);
        for (int v = 0; v < f; ++v) {
          const int dx = v - half;
          const int c0 = std::max(0, -dx);
          const int c1 = std::min(w, w - dx);
          const double wt = p.weights.at(o, i, u, v);
          double gw = 0.0;
          for (int r = r0; r < r1; ++r) {
            const double* gout = &grad_out.data[(static_cast<std::size_t>(o) * h + r) * w];
            const double* xin = &x.data[(static_cast<std::size_t>(i) * h + (r + dy)) * w];
            double* gx = &g.grad_x.data[(static_cast<std::size_t>(i) * h + (r + dy)) * w];
            for (int c = c0; c < c1; ++c) {
              gw += gout[c] * xin[c + dx];
              gx[c + dx] += gout[c] * wt;
            }
          }
          g.grad_w.at(o, i, u, v) = gw;
        }
      }
    }
  }
  return g;
}

Tensor relu_forward(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& x, const Tensor& grad_out) {
  if (!x.same_shape(grad_out)) throw std::invalid_argument("relu grad shape mismatch");
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.data.size(); ++i)
    if (x.data[i] <= 0.0) g.data[i] = 0.0;
  return g;
}

Tensor global_avg_pool_forward(const Tensor& x) {
  if (x.rank() != 3) throw std::invalid_argument("pool input must be (c,h,w)");
  const int c = x.dim(0);
  const std::int64_t hw = static_cast<std::int64_t>(x.dim(1)) * x.dim(2);
  Tensor y({c});
  for (int i = 0; i < c; ++i) {
    double acc = 0.0;
    const double* base = &x.data[static_cast<std::size_t>(i) * hw];
    for (std::int64_t k = 0; k < hw; ++k) acc += base[k];
    y.at(i) = acc / static_cast<double>(hw);
  }
  return y;
}

Tensor global_avg_pool_backward(const std::vector<int>& input_shape, const Tensor& grad_out) {
  if (input_shape.size() != 3) throw std::invalid_argument("pool input shape must be (c,h,w)");
  check_shape(grad_out, {input_shape[0]}, "pool grad_out");
  Tensor g(input_shape);
  const std::int64_t hw = static_cast<std::int64_t>(input_shape[1]) * input_shape[2];
  for (int i = 0; i < input_shape[0]; ++i) {
    const double v = grad_out.at(i) / static_cast<double>(hw);
    double* base = &g.data[static_cast<std::size_t>(i) * hw];
    for (std::int64_t k = 0; k < hw; ++k) base[k] = v;
  }
  return g;
}

Tensor dense_forward(const Tensor& x, const DenseParams& p) {
  if (p.weights.rank() != 2) throw std::invalid_argument("dense weights must be 2-D");
  const int out = p.weights.dim(0);
  const int in = p.weights.dim(1);
  check_shape(x, {in}, "dense input");
  check_shape(p.bias, {out}, "dense bias");
  Tensor y({out});
  for (int o = 0; o < out; ++o) {
    double acc = p.bias.at(o);
    for (int i = 0; i < in; ++i) acc += p.weights.at(o, i) * x.at(i);
    y.at(o) = acc;
  }
  return y;
}

DenseGrads dense_backward(const Tensor& x, const DenseParams& p, const Tensor& grad_out) {
  const int out = p.weights.dim(0);
  const int in = p.weights.dim(1);
  check_shape(x, {in}, "dense input");
  check_shape(grad_out, {out}, "dense grad_out");
  DenseGrads g{Tensor({in}), Tensor({out, in}), Tensor({out})};
  for (int o = 0; o < out; ++o) {
    const double go = grad_out.at(o);
    g.grad_b.at(o) = go;
    for (int i = 0; i < in; ++i) {
      g.grad_w.at(o, i) = go * x.at(i);
      g.grad_x.at(i) += go * p.weights.at(o, i);
    }
  }
  return g;
}

namespace {

void check_xent_args(const Tensor& logits, int label, double smoothing) {
  if (logits.rank() != 1) throw std::invalid_argument("logits must be 1-D");
  if (label < 0 || label >= logits.dim(0)) throw std::invalid_argument("label out of range");
  if (smoothing < 0.0 || smoothing >= 1.0)
    throw std::invalid_argument("label smoothing must lie in [0,1)");
}

}  // namespace

double softmax_xent_loss(const Tensor& logits, int label, double smoothing) {
  check_xent_args(logits, label, smoothing);
  const int k = logits.dim(0);
  double max_logit = logits.at(0);
  for (int i = 1; i < k; ++i) max_logit = std::max(max_logit, logits.at(i));
  double sum_exp = 0.0;
  for (int i = 0; i < k; ++i) sum_exp += std::exp(logits.at(i) - max_logit);
  const double log_z = max_logit + std::log(sum_exp);

  const double uniform = smoothing / static_cast<double>(k);
  double loss = 0.0;
  for (int i = 0; i < k; ++i) {
    const double q = uniform + (i == label ? 1.0 - smoothing : 0.0);
    if (q != 0.0) loss -= q * (logits.at(i) - log_z);
  }
  return loss;
}

XentResult softmax_xent_with_grad(const Tensor& logits, int label, double smoothing) {
  check_xent_args(logits, label, smoothing);
  const int k = logits.dim(0);
  XentResult res;
  res.loss = softmax_xent_loss(logits, label, smoothing);
  res.grad_logits = Tensor({k});

  double max_logit = logits.at(0);
  for (int i = 1; i < k; ++i) max_logit = std::max(max_logit, logits.at(i));
  double sum_exp = 0.0;
  for (int i = 0; i < k; ++i) sum_exp += std::exp(logits.at(i) - max_logit);
  const double uniform = smoothing / static_cast<double>(k);
  for (int i = 0; i < k; ++i) {
    const double p = std::exp(logits.at(i) - max_logit) / sum_exp;
    const double q = uniform + (i == label ? 1.0 - smoothing : 0.0);
    res.grad_logits.at(i) = p - q;
  }
  return res;
}

}  // namespace heprune
