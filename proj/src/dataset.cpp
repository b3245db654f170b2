#include "dataset.hpp"

#include <random>
#include <stdexcept>

namespace heprune {

SyntheticTask make_synthetic_task(const SyntheticSpec& spec) {
  if (spec.num_classes < 2) throw std::invalid_argument("synthetic task needs >= 2 classes");
  if (spec.channels < 1 || spec.height < 1 || spec.width < 1)
    throw std::invalid_argument("synthetic task needs a positive image shape");
  if (spec.train_per_class < 1 || spec.eval_per_class < 1)
    throw std::invalid_argument("synthetic task needs samples in both splits");
  if (spec.noise < 0.0) throw std::invalid_argument("noise must be non-negative");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  std::vector<Tensor> prototypes;
  prototypes.reserve(static_cast<std::size_t>(spec.num_classes));
  for (int c = 0; c < spec.num_classes; ++c) {
    Tensor proto({spec.channels, spec.height, spec.width});
    for (double& v : proto.data) v = unit(rng);
    prototypes.push_back(std::move(proto));
  }

  const auto sample_split = [&](int per_class) {
    Dataset split;
    split.num_classes = spec.num_classes;
    for (int c = 0; c < spec.num_classes; ++c)
      for (int s = 0; s < per_class; ++s) {
        Tensor img = prototypes[static_cast<std::size_t>(c)];
        for (double& v : img.data) v += spec.noise * unit(rng);
        split.images.push_back(std::move(img));
        split.labels.push_back(c);
      }
    return split;
  };

  SyntheticTask task;
  task.train = sample_split(spec.train_per_class);
  task.eval = sample_split(spec.eval_per_class);
  return task;
}

}  // namespace heprune
