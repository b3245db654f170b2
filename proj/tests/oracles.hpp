#ifndef HEPRUNE_TESTS_ORACLES_HPP
#define HEPRUNE_TESTS_ORACLES_HPP

// Brute-force reference implementations used only by tests. These are written
// against the operation definitions directly and stay independent of the
// library code paths they check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "tensor.hpp"

namespace heprune::oracle {

// Direct convolution via an explicitly zero-padded input copy and a sliding
// dot product. Stride 1, odd kernel, same padding.
inline Tensor direct_conv2d(const Tensor& x, const Tensor& weights, const Tensor& bias) {
  const int c_in = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int c_out = weights.dim(0), f = weights.dim(2);
  const int half = f / 2;
  const int ph = h + 2 * half, pw = w + 2 * half;

  std::vector<double> padded(static_cast<std::size_t>(c_in) * ph * pw, 0.0);
  for (int i = 0; i < c_in; ++i)
    for (int y = 0; y < h; ++y)
      for (int xx = 0; xx < w; ++xx)
        padded[(static_cast<std::size_t>(i) * ph + y + half) * pw + (xx + half)] = x.at(i, y, xx);

  Tensor out({c_out, h, w});
  for (int o = 0; o < c_out; ++o)
    for (int y = 0; y < h; ++y)
      for (int xx = 0; xx < w; ++xx) {
        double acc = bias.size() ? bias.at(o) : 0.0;
        for (int i = 0; i < c_in; ++i)
          for (int u = 0; u < f; ++u)
            for (int v = 0; v < f; ++v)
              acc += weights.at(o, i, u, v) *
                     padded[(static_cast<std::size_t>(i) * ph + y + u) * pw + (xx + v)];
        out.at(o, y, xx) = acc;
      }
  return out;
}

// Central finite difference of a scalar function at one coordinate.
inline double finite_difference(const std::function<double()>& eval, double& param,
                                double eps = 1e-5) {
  const double saved = param;
  param = saved + eps;
  const double up = eval();
  param = saved - eps;
  const double down = eval();
  param = saved;
  return (up - down) / (2.0 * eps);
}

inline double rel_error(double a, double b) {
  const double denom = std::max({std::fabs(a), std::fabs(b), 1e-10});
  return std::fabs(a - b) / denom;
}

// L2 norm of all weights at kernel position (u, v), summed the slow way.
inline double positional_norm(const Tensor& weights, int u, int v) {
  double sq = 0.0;
  for (int o = 0; o < weights.dim(0); ++o)
    for (int i = 0; i < weights.dim(1); ++i) {
      const double val = weights.at(o, i, u, v);
      sq += val * val;
    }
  return std::sqrt(sq);
}

// L2 norm of the kernels on generalized diagonal j of a block pair.
inline double diagonal_norm(const Tensor& weights, int block_in, int block_out, int j, int c_n) {
  const int f = weights.dim(2);
  double sq = 0.0;
  for (int ic = 0; ic < c_n; ++ic) {
    const int i = block_in * c_n + ic;
    const int o = block_out * c_n + (ic + j) % c_n;
    for (int u = 0; u < f; ++u)
      for (int v = 0; v < f; ++v) {
        const double val = weights.at(o, i, u, v);
        sq += val * val;
      }
  }
  return std::sqrt(sq);
}

// -sum_k q_k log p_k computed from explicit softmax probabilities.
inline double xent_direct(const std::vector<double>& logits, int label, double smoothing) {
  const int k = static_cast<int>(logits.size());
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double z = 0.0;
  for (double v : logits) z += std::exp(v - mx);
  double loss = 0.0;
  for (int i = 0; i < k; ++i) {
    const double p = std::exp(logits[static_cast<std::size_t>(i)] - mx) / z;
    const double q = smoothing / k + (i == label ? 1.0 - smoothing : 0.0);
    loss -= q * std::log(p);
  }
  return loss;
}

// Pairwise O(n^2) dominance check: keep points for which no other point has
// >= accuracy and >= reduction with at least one strict.
struct Point2 {
  double accuracy;
  double reduction;
};

inline std::vector<bool> pareto_brute(const std::vector<Point2>& pts) {
  std::vector<bool> keep(pts.size(), true);
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = 0; b < pts.size(); ++b) {
      if (a == b) continue;
      const bool ge = pts[b].accuracy >= pts[a].accuracy && pts[b].reduction >= pts[a].reduction;
      const bool strict = pts[b].accuracy > pts[a].accuracy || pts[b].reduction > pts[a].reduction;
      if (ge && strict) {
        keep[a] = false;
        break;
      }
    }
  return keep;
}

inline Tensor random_tensor(std::vector<int> shape, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(lo, hi);
  for (double& v : t.data) v = dist(rng);
  return t;
}

}  // namespace heprune::oracle

#endif
