#include "mask.hpp"

#include <stdexcept>

namespace heprune {

LayerMask LayerMask::all_active(int c_in, int c_out, int f, int c_n, bool with_channel) {
  if (c_n <= 0 || c_in <= 0 || c_out <= 0) throw std::invalid_argument("mask dims must be positive");
  if (c_in % c_n != 0 || c_out % c_n != 0)
    throw std::invalid_argument("c_n must divide c_in and c_out");
  if (f <= 0 || f % 2 == 0) throw std::invalid_argument("kernel size must be odd");
  LayerMask m;
  m.f = f;
  m.c_n = c_n;
  m.blocks_in = c_in / c_n;
  m.blocks_out = c_out / c_n;
  m.positional.assign(static_cast<std::size_t>(f) * f, 1);
  m.diagonal.assign(static_cast<std::size_t>(m.blocks_in) * m.blocks_out * c_n, 1);
  if (with_channel) m.channel.assign(static_cast<std::size_t>(c_out), 1);
  return m;
}

bool LayerMask::weight_active(int o, int i, int u, int v) const {
  if (!positional_active(u, v)) return false;
  const int bi = i / c_n;
  const int bo = o / c_n;
  const int j = ((o % c_n) - (i % c_n) + c_n) % c_n;
  if (!diagonal_active(bi, bo, j)) return false;
  if (!channel.empty() && channel[static_cast<std::size_t>(o)] == 0) return false;
  return true;
}

double LayerMask::alpha() const {
  const int center = (f / 2) * f + (f / 2);
  const int groups = f * f - 1;
  if (groups == 0) return 1.0;
  int retained = 0;
  for (int k = 0; k < f * f; ++k)
    if (k != center && positional[static_cast<std::size_t>(k)]) ++retained;
  return static_cast<double>(retained) / groups;
}

double LayerMask::beta() const {
  const std::int64_t groups =
      static_cast<std::int64_t>(blocks_in) * blocks_out * (c_n - 1);
  if (groups == 0) return 1.0;
  std::int64_t retained = 0;
  for (int bi = 0; bi < blocks_in; ++bi)
    for (int bo = 0; bo < blocks_out; ++bo)
      for (int j = 1; j < c_n; ++j)
        if (diagonal_active(bi, bo, j)) ++retained;
  return static_cast<double>(retained) / static_cast<double>(groups);
}

int LayerMask::active_weight_count(int c_in, int c_out) const {
  int active = 0;
  for (int o = 0; o < c_out; ++o)
    for (int i = 0; i < c_in; ++i)
      for (int u = 0; u < f; ++u)
        for (int v = 0; v < f; ++v)
          if (weight_active(o, i, u, v)) ++active;
  return active;
}

void apply_mask(Tensor& weights, const LayerMask& mask) {
  if (weights.rank() != 4) throw std::invalid_argument("conv weights must be 4-D");
  const int c_out = weights.dim(0);
  const int c_in = weights.dim(1);
  const int f = weights.dim(2);
  if (f != mask.f || c_in != mask.c_in() || c_out != mask.c_out())
    throw std::invalid_argument("mask does not match weight dims");
  for (int o = 0; o < c_out; ++o)
    for (int i = 0; i < c_in; ++i)
      for (int u = 0; u < f; ++u)
        for (int v = 0; v < f; ++v)
          if (!mask.weight_active(o, i, u, v)) weights.at(o, i, u, v) = 0.0;
}

MaskRotationCounts exact_rotation_counts(const LayerMask& mask) {
  MaskRotationCounts counts;
  const int center = (mask.f / 2) * mask.f + (mask.f / 2);
  std::uint64_t retained_positions = 0;
  for (int k = 0; k < mask.f * mask.f; ++k)
    if (k != center && mask.positional[static_cast<std::size_t>(k)]) ++retained_positions;
  counts.tau = retained_positions * static_cast<std::uint64_t>(mask.blocks_in);

  for (int bi = 0; bi < mask.blocks_in; ++bi)
    for (int bo = 0; bo < mask.blocks_out; ++bo)
      for (int j = 1; j < mask.c_n; ++j)
        if (mask.diagonal_active(bi, bo, j)) ++counts.pi;

  counts.total = counts.tau + counts.pi;
  return counts;
}

}  // namespace heprune
