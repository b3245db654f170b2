#include "heconv.hpp"

#include <algorithm>
#include <stdexcept>

#include "costmodel.hpp"

namespace heprune {

DiagonalSlice extract_diagonal(const Tensor& weights, const LayerMask& mask, int block_in,
                               int block_out, int diag) {
  if (weights.rank() != 4) throw std::invalid_argument("conv weights must be 4-D");
  const int c_n = mask.c_n;
  const int f = mask.f;
  if (block_in < 0 || block_in >= mask.blocks_in || block_out < 0 || block_out >= mask.blocks_out)
    throw std::invalid_argument("block index out of range");
  if (diag < 0 || diag >= c_n) throw std::invalid_argument("diagonal index out of range");

  DiagonalSlice s;
  s.block_in = block_in;
  s.block_out = block_out;
  s.diag = diag;
  s.c_n = c_n;
  s.f = f;
  s.kernels.assign(static_cast<std::size_t>(c_n) * f * f, 0.0);
  for (int ic = 0; ic < c_n; ++ic) {
    const int i = block_in * c_n + ic;
    const int o = block_out * c_n + (ic + diag) % c_n;
    for (int u = 0; u < f; ++u)
      for (int v = 0; v < f; ++v)
        if (mask.weight_active(o, i, u, v))
          s.kernels[(static_cast<std::size_t>(ic) * f + u) * f + v] = weights.at(o, i, u, v);
  }
  return s;
}

std::vector<double> arrange_gamma(const DiagonalSlice& slice, int u, int v,
                                  const SlotLayout& layout) {
  if (u < 0 || u >= slice.f || v < 0 || v >= slice.f)
    throw std::invalid_argument("kernel position out of range");
  if (layout.c_n != slice.c_n) throw std::invalid_argument("slice/layout channel mismatch");
  const int half = slice.f / 2;
  const int dy = u - half;
  const int dx = v - half;
  const int h = layout.h;
  const int w = layout.w;

  std::vector<double> gamma(static_cast<std::size_t>(layout.used_slots()), 0.0);
  for (int ic = 0; ic < slice.c_n; ++ic) {
    const double wt = slice.kernel_at(ic, u, v);
    if (wt == 0.0) continue;
    const int y0 = std::max(0, -dy);
    const int y1 = std::min(h, h - dy);
    const int x0 = std::max(0, -dx);
    const int x1 = std::min(w, w - dx);
    double* base = &gamma[static_cast<std::size_t>(ic) * h * w];
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) base[y * w + x] = wt;
  }
  return gamma;
}

namespace {

// Rotated copies of one input block, indexed by kernel position. Entry k is
// empty when the position is pruned; the center position aliases the input.
struct RotationCache {
  std::vector<SlotVector> rotated;  // f*f entries
  std::vector<bool> present;
};

RotationCache make_rotation_cache(const SlotVector& x, int f,
                                  std::span<const std::uint8_t> positional,
                                  RotationLedger& ledger, RotationLedger::LayerEntry* layer) {
  const int half = f / 2;
  RotationCache cache;
  cache.rotated.resize(static_cast<std::size_t>(f) * f);
  cache.present.assign(static_cast<std::size_t>(f) * f, false);
  for (int u = 0; u < f; ++u) {
    for (int v = 0; v < f; ++v) {
      const int k = u * f + v;
      if (!positional[static_cast<std::size_t>(k)]) continue;
      cache.rotated[static_cast<std::size_t>(k)] = rotate_tau(x, u - half, v - half, ledger, layer);
      cache.present[static_cast<std::size_t>(k)] = true;
    }
  }
  return cache;
}

// sum over retained positions (ascending index) of tau_i(x) ⊙ gamma_i(slice)
SlotVector combine_siso(const RotationCache& cache, const SlotVector& x,
                        const DiagonalSlice& slice) {
  SlotVector out;
  out.layout = x.layout;
  out.channel_base = x.channel_base;
  out.slots.assign(x.slots.size(), 0.0);
  for (int u = 0; u < slice.f; ++u) {
    for (int v = 0; v < slice.f; ++v) {
      const int k = u * slice.f + v;
      if (!cache.present[static_cast<std::size_t>(k)]) continue;
      const std::vector<double> gamma = arrange_gamma(slice, u, v, x.layout);
      const std::vector<double>& rot = cache.rotated[static_cast<std::size_t>(k)].slots;
      for (std::size_t s = 0; s < out.slots.size(); ++s) out.slots[s] += rot[s] * gamma[s];
    }
  }
  return out;
}

}  // namespace

SlotVector siso_conv(const SlotVector& x, const DiagonalSlice& slice,
                     std::span<const std::uint8_t> positional, RotationLedger& ledger,
                     RotationLedger::LayerEntry* layer) {
  if (x.layout.c_n != slice.c_n) throw std::invalid_argument("slice does not match slot layout");
  if (positional.size() != static_cast<std::size_t>(slice.f) * slice.f)
    throw std::invalid_argument("positional mask size mismatch");
  if (slice.f / 2 >= x.layout.h || slice.f / 2 >= x.layout.w)
    throw std::invalid_argument("kernel too large for spatial dims");
  if (static_cast<int>(x.slots.size()) != x.layout.used_slots())
    throw std::invalid_argument("slot vector must be exactly filled");
  const RotationCache cache = make_rotation_cache(x, slice.f, positional, ledger, layer);
  return combine_siso(cache, x, slice);
}

PackedTensor mimo_conv(const PackedTensor& x, const ConvLayerParams& p, const LayerMask& mask,
                       RotationLedger& ledger, const std::string& layer_id) {
  validate_conv_params(p);
  const int c_n = x.c_n;
  const int f = p.kernel();
  if (p.c_in() != x.c_in) throw std::invalid_argument("input channel mismatch");
  if (x.c_in % c_n != 0 || p.c_out() % c_n != 0)
    throw std::invalid_argument("c_in and c_out must be multiples of c_n");
  if (mask.c_n != c_n || mask.f != f || mask.blocks_in != x.num_blocks() ||
      mask.blocks_out != p.c_out() / c_n)
    throw std::invalid_argument("mask does not match layer dims");
  if (f / 2 >= x.h || f / 2 >= x.w)
    throw std::invalid_argument("kernel too large for spatial dims");

  RotationLedger::LayerEntry* entry = nullptr;
  if (!layer_id.empty()) entry = &ledger.layer(layer_id);

  const int blocks_in = x.num_blocks();
  const int blocks_out = p.c_out() / c_n;
  const int hw = x.h * x.w;

  PackedTensor out;
  out.c_in = p.c_out();
  out.h = x.h;
  out.w = x.w;
  out.c_n = c_n;
  out.vectors.resize(static_cast<std::size_t>(blocks_out));
  for (int bo = 0; bo < blocks_out; ++bo) {
    SlotVector& v = out.vectors[static_cast<std::size_t>(bo)];
    v.layout = SlotLayout{c_n, x.h, x.w};
    v.channel_base = bo * c_n;
    v.slots.assign(static_cast<std::size_t>(c_n) * hw, 0.0);
  }

  for (int bi = 0; bi < blocks_in; ++bi) {
    const SlotVector& xin = x.vectors[static_cast<std::size_t>(bi)];
    // One rotation per retained position, shared by every consumer of this
    // input block.
    const RotationCache cache = make_rotation_cache(xin, f, mask.positional, ledger, entry);
    for (int bo = 0; bo < blocks_out; ++bo) {
      SlotVector& acc = out.vectors[static_cast<std::size_t>(bo)];
      for (int j = 0; j < c_n; ++j) {
        if (!mask.diagonal_active(bi, bo, j)) continue;
        const DiagonalSlice slice = extract_diagonal(p.weights, mask, bi, bo, j);
        SlotVector partial = combine_siso(cache, xin, slice);
        // The partial for output channel o sits at channel slot (o - j) mod
        // c_n; a left rotation by (c_n - j) mod c_n channels aligns it.
        partial = rotate_pi(partial, (c_n - j) % c_n, ledger, entry);
        for (std::size_t s = 0; s < acc.slots.size(); ++s) acc.slots[s] += partial.slots[s];
      }
    }
  }

  for (int bo = 0; bo < blocks_out; ++bo) {
    SlotVector& v = out.vectors[static_cast<std::size_t>(bo)];
    for (int c = 0; c < c_n; ++c) {
      const double b = p.bias.at(bo * c_n + c);
      if (b == 0.0) continue;
      double* base = &v.slots[static_cast<std::size_t>(c) * hw];
      for (int k = 0; k < hw; ++k) base[k] += b;
    }
  }

  if (entry) {
    entry->alpha = mask.alpha();
    entry->beta = mask.beta();
    LayerCostSpec spec;
    spec.name = layer_id;
    spec.c_in = x.c_in;
    spec.c_out = p.c_out();
    spec.f = f;
    spec.c_n = c_n;
    spec.alpha = entry->alpha;
    spec.beta = entry->beta;
    entry->estimate_unpruned = static_cast<double>(rotations_unpruned(spec));
    entry->estimate_pruned = rotations_pruned(spec);
  }
  return out;
}

}  // namespace heprune
