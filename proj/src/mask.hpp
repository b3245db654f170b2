#ifndef HEPRUNE_MASK_HPP
#define HEPRUNE_MASK_HPP

#include <cstdint>
#include <vector>

#include "tensor.hpp"

namespace heprune {

// Pruning state of one convolution layer. A weight W[o,i,u,v] is active iff
// every mask covering it is active:
//   - positional[u*f+v], one group per kernel position across the whole layer
//   - diagonal[(bi*blocks_out + bo)*c_n + j] with bi = i/c_n, bo = o/c_n and
//     j = (o - i) mod c_n inside the block pair
//   - channel[o] when the optional per-output-channel mask is present
// Mask entries only ever move from active (1) to pruned (0).
struct LayerMask {
  int f = 0;
  int c_n = 0;
  int blocks_in = 0;
  int blocks_out = 0;
  std::vector<std::uint8_t> positional;  // f*f
  std::vector<std::uint8_t> diagonal;    // blocks_in*blocks_out*c_n
  std::vector<std::uint8_t> channel;     // c_out or empty

  static LayerMask all_active(int c_in, int c_out, int f, int c_n, bool with_channel = false);

  int c_in() const { return blocks_in * c_n; }
  int c_out() const { return blocks_out * c_n; }

  bool positional_active(int u, int v) const { return positional[u * f + v] != 0; }
  bool diagonal_active(int bi, int bo, int j) const {
    return diagonal[(static_cast<std::size_t>(bi) * blocks_out + bo) * c_n + j] != 0;
  }
  std::uint8_t& diagonal_at(int bi, int bo, int j) {
    return diagonal[(static_cast<std::size_t>(bi) * blocks_out + bo) * c_n + j];
  }
  bool weight_active(int o, int i, int u, int v) const;

  // Retained fraction of the f^2-1 non-center positional groups.
  double alpha() const;
  // Retained fraction of the j != 0 diagonal groups over all block pairs.
  double beta() const;

  int active_weight_count(int c_in, int c_out) const;
};

// Zeroes every weight the mask marks pruned; bias is untouched.
void apply_mask(Tensor& weights, const LayerMask& mask);

// Exact rotation counts of a packed forward pass under this mask: one tau per
// input block for each retained non-center position, one pi per block pair for
// each retained j != 0 diagonal. Counts depend on the mask only, never on data.
struct MaskRotationCounts {
  std::uint64_t tau = 0;
  std::uint64_t pi = 0;
  std::uint64_t total = 0;
};

MaskRotationCounts exact_rotation_counts(const LayerMask& mask);

}  // namespace heprune

#endif
