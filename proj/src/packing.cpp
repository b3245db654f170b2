#include "packing.hpp"

#include <stdexcept>

namespace heprune {

int channels_per_ciphertext(int n_slots, int h, int w) {
  if (n_slots <= 0 || h <= 0 || w <= 0)
    throw std::invalid_argument("slot capacity and channel dims must be positive");
  const std::int64_t channel = static_cast<std::int64_t>(h) * w;
  if (channel > n_slots)
    throw std::invalid_argument("channel larger than slot capacity");
  int fit = static_cast<int>(n_slots / channel);
  int pow2 = 1;
  while (pow2 * 2 <= fit) pow2 *= 2;
  return pow2;
}

PackedTensor pack(const Tensor& x, int c_n) {
  if (x.rank() != 3) throw std::invalid_argument("pack expects a (c,h,w) tensor");
  if (c_n <= 0) throw std::invalid_argument("c_n must be positive");
  PackedTensor p;
  p.c_in = x.dim(0);
  p.h = x.dim(1);
  p.w = x.dim(2);
  p.c_n = c_n;

  const int blocks = (p.c_in + c_n - 1) / c_n;
  const int hw = p.h * p.w;
  p.vectors.reserve(static_cast<std::size_t>(blocks));
  for (int b = 0; b < blocks; ++b) {
    SlotVector v;
    v.layout = SlotLayout{c_n, p.h, p.w};
    v.channel_base = b * c_n;
    v.slots.assign(static_cast<std::size_t>(c_n) * hw, 0.0);
    for (int c = 0; c < c_n; ++c) {
      const int chan = v.channel_base + c;
      if (chan >= p.c_in) break;  // zero-padded tail channels
      const double* src = &x.data[static_cast<std::size_t>(chan) * hw];
      double* dst = &v.slots[static_cast<std::size_t>(c) * hw];
      for (int k = 0; k < hw; ++k) dst[k] = src[k];
    }
    p.vectors.push_back(std::move(v));
  }
  return p;
}

Tensor unpack(const PackedTensor& p) {
  Tensor x({p.c_in, p.h, p.w});
  const int hw = p.h * p.w;
  for (const SlotVector& v : p.vectors) {
    for (int c = 0; c < v.layout.c_n; ++c) {
      const int chan = v.channel_base + c;
      if (chan >= p.c_in) break;
      const double* src = &v.slots[static_cast<std::size_t>(c) * hw];
      double* dst = &x.data[static_cast<std::size_t>(chan) * hw];
      for (int k = 0; k < hw; ++k) dst[k] = src[k];
    }
  }
  return x;
}

namespace {

SlotVector rotate_slots(const SlotVector& v, std::int64_t shift) {
  const std::int64_t n = static_cast<std::int64_t>(v.slots.size());
  std::int64_t r = shift % n;
  if (r < 0) r += n;
  SlotVector out;
  out.layout = v.layout;
  out.channel_base = v.channel_base;
  out.slots.resize(v.slots.size());
  for (std::int64_t k = 0; k < n; ++k)
    out.slots[static_cast<std::size_t>(k)] = v.slots[static_cast<std::size_t>((k + r) % n)];
  return out;
}

}  // namespace

SlotVector rotate_tau(const SlotVector& v, int dy, int dx, RotationLedger& ledger,
                      RotationLedger::LayerEntry* layer) {
  if (dy <= -v.layout.h || dy >= v.layout.h || dx <= -v.layout.w || dx >= v.layout.w)
    throw std::invalid_argument("tau shift out of range");
  if (dy == 0 && dx == 0) return v;  // trivial rotation, not counted
  ledger.add_tau(layer);
  return rotate_slots(v, static_cast<std::int64_t>(dy) * v.layout.w + dx);
}

SlotVector rotate_pi(const SlotVector& v, int j, RotationLedger& ledger,
                     RotationLedger::LayerEntry* layer) {
  if (j < 0 || j >= v.layout.c_n) throw std::invalid_argument("pi shift out of range");
  if (j == 0) return v;
  ledger.add_pi(layer);
  return rotate_slots(v, static_cast<std::int64_t>(j) * v.layout.channel_slots());
}

}  // namespace heprune
