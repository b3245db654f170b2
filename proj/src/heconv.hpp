#ifndef HEPRUNE_HECONV_HPP
#define HEPRUNE_HECONV_HPP

#include <span>
#include <string>

#include "ledger.hpp"
#include "mask.hpp"
#include "nn.hpp"
#include "packing.hpp"

namespace heprune {

// One generalized diagonal of the channel matrix restricted to a block pair:
// the c_n kernels W[o,i] with o = i + diag (mod c_n) inside blocks
// (block_in, block_out). kernels[ic] is the f*f kernel multiplying local
// input channel ic, already zeroed where the layer mask prunes it.
struct DiagonalSlice {
  int block_in = 0;
  int block_out = 0;
  int diag = 0;
  int c_n = 0;
  int f = 0;
  std::vector<double> kernels;  // c_n * f * f, [ic][u][v]

  double kernel_at(int ic, int u, int v) const {
    return kernels[(static_cast<std::size_t>(ic) * f + u) * f + v];
  }
};

DiagonalSlice extract_diagonal(const Tensor& weights, const LayerMask& mask, int block_in,
                               int block_out, int diag);

// Slot-aligned weight vector for kernel position (u, v): slot (ic, y, x) holds
// kernels[ic][u][v] when the source pixel (y+u-f/2, x+v-f/2) lies inside the
// image, and 0 on the padding boundary. The boundary zeros also swallow the
// cross-channel garbage that cyclic tau rotations drag in.
std::vector<double> arrange_gamma(const DiagonalSlice& slice, int u, int v,
                                  const SlotLayout& layout);

// Packed single-block convolution: sum over retained kernel positions of
// tau_i(x) ⊙ gamma_i(slice). `positional` has f*f entries, 1 = retained.
SlotVector siso_conv(const SlotVector& x, const DiagonalSlice& slice,
                     std::span<const std::uint8_t> positional, RotationLedger& ledger,
                     RotationLedger::LayerEntry* layer = nullptr);

// Blocked multi-channel convolution in the packed domain. Every retained
// non-center position costs one tau per input block (the rotated activations
// are computed once and reused across output blocks); every retained j != 0
// diagonal costs one pi per block pair. Bias is added after accumulation.
// Unpacked output equals conv2d_forward with mask-zeroed weights.
PackedTensor mimo_conv(const PackedTensor& x, const ConvLayerParams& p, const LayerMask& mask,
                       RotationLedger& ledger, const std::string& layer_id = "");

}  // namespace heprune

#endif
