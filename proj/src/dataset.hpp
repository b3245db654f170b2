#ifndef HEPRUNE_DATASET_HPP
#define HEPRUNE_DATASET_HPP

#include <cstdint>
#include <vector>

#include "tensor.hpp"

namespace heprune {

struct Dataset {
  std::vector<Tensor> images;  // each (channels, height, width)
  std::vector<int> labels;
  int num_classes = 0;

  std::size_t size() const { return images.size(); }
};

// Synthetic classification task: one Gaussian prototype image per class,
// samples are prototype + noise. Balanced splits, deterministic given seed.
struct SyntheticSpec {
  int num_classes = 8;
  int channels = 4;
  int height = 6;
  int width = 6;
  int train_per_class = 24;
  int eval_per_class = 8;
  double noise = 0.5;
  std::uint64_t seed = 1;
};

struct SyntheticTask {
  Dataset train;
  Dataset eval;
};

SyntheticTask make_synthetic_task(const SyntheticSpec& spec);

}  // namespace heprune

#endif
