#ifndef HEPRUNE_PACKING_HPP
#define HEPRUNE_PACKING_HPP

#include "ledger.hpp"
#include "tensor.hpp"

namespace heprune {

struct SlotLayout {
  int c_n = 0;  // channels packed per vector
  int h = 0;
  int w = 0;

  int channel_slots() const { return h * w; }
  int used_slots() const { return c_n * h * w; }
  bool operator==(const SlotLayout&) const = default;
};

// One virtual ciphertext: a flat slot array holding c_n channels in row-major
// spatial order, channel c at slots [c*h*w, (c+1)*h*w).
struct SlotVector {
  SlotLayout layout;
  int channel_base = 0;  // absolute index of the first packed channel
  std::vector<double> slots;
};

// Activation channels spread over ceil(c_in/c_n) slot vectors. Channels are
// zero-padded up to a multiple of c_n; `c_in` keeps the original count.
struct PackedTensor {
  int c_in = 0;
  int h = 0;
  int w = 0;
  int c_n = 0;
  std::vector<SlotVector> vectors;

  int num_blocks() const { return static_cast<int>(vectors.size()); }
};

// Largest power-of-two number of whole (h, w) channels that fit in n_slots.
// Throws if a single channel does not fit.
int channels_per_ciphertext(int n_slots, int h, int w);

// Lays x (c_in, h, w) out into slot vectors of exactly c_n*h*w slots each.
PackedTensor pack(const Tensor& x, int c_n);

// Inverse of pack; padded channels are dropped.
Tensor unpack(const PackedTensor& p);

// Cyclic left rotation of the whole slot array by dy*w + dx positions.
// Counts one tau rotation unless dy == dx == 0.
SlotVector rotate_tau(const SlotVector& v, int dy, int dx, RotationLedger& ledger,
                      RotationLedger::LayerEntry* layer = nullptr);

// Cyclic left rotation by j whole channels (j*h*w slots). Counts one pi
// rotation unless j == 0.
SlotVector rotate_pi(const SlotVector& v, int j, RotationLedger& ledger,
                     RotationLedger::LayerEntry* layer = nullptr);

}  // namespace heprune

#endif
