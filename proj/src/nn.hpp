#ifndef HEPRUNE_NN_HPP
#define HEPRUNE_NN_HPP

#include "tensor.hpp"

namespace heprune {

// Weights of one convolution layer. Stride is fixed at 1 with zero "same"
// padding and an odd kernel, so spatial dims are preserved.
struct ConvLayerParams {
  Tensor weights;  // (c_out, c_in, f, f)
  Tensor bias;     // (c_out)

  int c_out() const { return weights.dim(0); }
  int c_in() const { return weights.dim(1); }
  int kernel() const { return weights.dim(2); }
};

void validate_conv_params(const ConvLayerParams& p);

// y[o,r,c] = bias[o] + sum_{i,u,v} W[o,i,u,v] * x[i, r+u-f/2, c+v-f/2],
// zero outside bounds.
Tensor conv2d_forward(const Tensor& x, const ConvLayerParams& p);

struct ConvGrads {
  Tensor grad_x;  // (c_in, h, w)
  Tensor grad_w;  // (c_out, c_in, f, f)
  Tensor grad_b;  // (c_out)
};

ConvGrads conv2d_backward(const Tensor& x, const ConvLayerParams& p, const Tensor& grad_out);

Tensor relu_forward(const Tensor& x);
Tensor relu_backward(const Tensor& x, const Tensor& grad_out);

// (c, h, w) -> (c)
Tensor global_avg_pool_forward(const Tensor& x);
Tensor global_avg_pool_backward(const std::vector<int>& input_shape, const Tensor& grad_out);

struct DenseParams {
  Tensor weights;  // (out, in)
  Tensor bias;     // (out)
};

Tensor dense_forward(const Tensor& x, const DenseParams& p);

struct DenseGrads {
  Tensor grad_x;
  Tensor grad_w;
  Tensor grad_b;
};

DenseGrads dense_backward(const Tensor& x, const DenseParams& p, const Tensor& grad_out);

// Softmax cross-entropy against the smoothed target
// q = (1-s)*onehot(label) + s/num_classes.
struct XentResult {
  double loss = 0.0;
  Tensor grad_logits;
};

double softmax_xent_loss(const Tensor& logits, int label, double smoothing);
XentResult softmax_xent_with_grad(const Tensor& logits, int label, double smoothing);

}  // namespace heprune

#endif
