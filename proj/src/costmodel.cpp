#include "costmodel.hpp"

#include <stdexcept>

namespace heprune {

void validate_cost_spec(const LayerCostSpec& spec) {
  if (spec.c_in <= 0 || spec.c_out <= 0 || spec.c_n <= 0)
    throw std::invalid_argument("channel counts must be positive");
  if (spec.f <= 0 || spec.f % 2 == 0) throw std::invalid_argument("kernel size must be odd");
  if (spec.c_in % spec.c_n != 0 || spec.c_out % spec.c_n != 0)
    throw std::invalid_argument("c_n must divide c_in and c_out");
  if (spec.alpha < 0.0 || spec.alpha > 1.0 || spec.beta < 0.0 || spec.beta > 1.0)
    throw std::invalid_argument("alpha and beta must lie in [0,1]");
}

std::uint64_t rotations_unpruned(const LayerCostSpec& spec) {
  validate_cost_spec(spec);
  const std::uint64_t siso = static_cast<std::uint64_t>(spec.f) * spec.f - 1;
  const std::uint64_t ras =
      static_cast<std::uint64_t>(spec.c_n - 1) * (static_cast<std::uint64_t>(spec.c_out) / spec.c_n);
  return (siso + ras) * (static_cast<std::uint64_t>(spec.c_in) / spec.c_n);
}

double rotations_pruned(const LayerCostSpec& spec) {
  validate_cost_spec(spec);
  const double siso = spec.alpha * (static_cast<double>(spec.f) * spec.f - 1.0);
  const double ras = spec.beta * static_cast<double>(spec.c_n - 1) *
                     (static_cast<double>(spec.c_out) / spec.c_n);
  return (siso + ras) * (static_cast<double>(spec.c_in) / spec.c_n);
}

DominanceGap dominance_gap(const LayerCostSpec& spec, double fraction) {
  validate_cost_spec(spec);
  if (fraction < 0.0 || fraction > 1.0) throw std::invalid_argument("fraction must lie in [0,1]");
  LayerCostSpec full = spec;
  full.alpha = 1.0;
  full.beta = 1.0;
  const double base = rotations_pruned(full);

  LayerCostSpec pos = full;
  pos.alpha = 1.0 - fraction;
  LayerCostSpec diag = full;
  diag.beta = 1.0 - fraction;

  DominanceGap gap;
  gap.save_positional = base - rotations_pruned(pos);
  gap.save_diagonal = base - rotations_pruned(diag);
  return gap;
}

NetworkCost network_cost(std::span<const LayerCostSpec> specs) {
  NetworkCost total;
  for (const LayerCostSpec& spec : specs) {
    total.unpruned += rotations_unpruned(spec);
    total.pruned += rotations_pruned(spec);
  }
  return total;
}

}  // namespace heprune
