#ifndef HEPRUNE_COSTMODEL_HPP
#define HEPRUNE_COSTMODEL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace heprune {

// Rotation cost inputs of one convolution layer. alpha is the retained
// fraction of the f^2-1 non-center positional groups, beta the retained
// fraction of the j != 0 diagonal groups; the center tap and the j = 0
// diagonal never cost a rotation, so both ratios exclude them.
struct LayerCostSpec {
  std::string name;
  int c_in = 0;
  int c_out = 0;
  int f = 0;
  int c_n = 0;
  double alpha = 1.0;
  double beta = 1.0;
};

void validate_cost_spec(const LayerCostSpec& spec);

// ((f^2 - 1) + (c_n - 1) * c_out / c_n) * (c_in / c_n), exact.
std::uint64_t rotations_unpruned(const LayerCostSpec& spec);

// (alpha * (f^2 - 1) + beta * (c_n - 1) * c_out / c_n) * (c_in / c_n).
double rotations_pruned(const LayerCostSpec& spec);

// Rotations saved by pruning `fraction` of the positional groups versus the
// same fraction of the diagonal groups. The diagonal side wins whenever
// (c_n - 1) * c_out / c_n > f^2 - 1.
struct DominanceGap {
  double save_positional = 0.0;
  double save_diagonal = 0.0;
};

DominanceGap dominance_gap(const LayerCostSpec& spec, double fraction);

struct NetworkCost {
  std::uint64_t unpruned = 0;
  double pruned = 0.0;

  double reduction_pct() const {
    return unpruned == 0 ? 0.0 : 100.0 * (double(unpruned) - pruned) / double(unpruned);
  }
};

NetworkCost network_cost(std::span<const LayerCostSpec> specs);

}  // namespace heprune

#endif
