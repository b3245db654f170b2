#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "ledger.hpp"
#include "oracles.hpp"
#include "packing.hpp"
#include "tensor.hpp"

using namespace heprune;

TEST_CASE("channels per ciphertext is the largest power of two that fits") {
  CHECK(channels_per_ciphertext(4096, 32, 32) == 4);
  CHECK(channels_per_ciphertext(4096, 30, 30) == 4);  // floor(4096/900)=4, already a power of two
  CHECK(channels_per_ciphertext(4096, 16, 16) == 16);
  CHECK(channels_per_ciphertext(4096, 33, 33) == 2);  // floor=3 rounds down to 2
  CHECK(channels_per_ciphertext(4096, 64, 64) == 1);
  CHECK(channels_per_ciphertext(8, 2, 2) == 2);
  CHECK_THROWS_AS(channels_per_ciphertext(8, 3, 3), std::invalid_argument);
  CHECK_THROWS_AS(channels_per_ciphertext(0, 3, 3), std::invalid_argument);
}

TEST_CASE("pack and unpack round trip") {
  std::mt19937_64 rng(21);
  for (const auto& [c_in, h, w, c_n] : {std::array<int, 4>{4, 3, 3, 2},
                                        std::array<int, 4>{8, 4, 5, 4},
                                        std::array<int, 4>{2, 6, 6, 2},
                                        std::array<int, 4>{3, 2, 2, 4}}) {
    const Tensor x = oracle::random_tensor({c_in, h, w}, rng);
    const PackedTensor p = pack(x, c_n);
    const int expect_vectors = (c_in + c_n - 1) / c_n;
    CHECK(static_cast<int>(p.vectors.size()) == expect_vectors);
    for (const SlotVector& v : p.vectors)
      CHECK(static_cast<int>(v.slots.size()) == c_n * h * w);
    const Tensor back = unpack(p);
    REQUIRE(back.same_shape(x));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(back.data[i] == x.data[i]);
  }
}

TEST_CASE("pack places channels contiguously and zero fills the tail") {
  Tensor x({3, 2, 2});
  for (std::size_t i = 0; i < x.size(); ++i) x.data[i] = double(i + 1);
  const PackedTensor p = pack(x, 2);
  REQUIRE(p.vectors.size() == 2);
  // First vector holds channels 0 and 1 back to back.
  CHECK(p.vectors[0].slots == std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8});
  // Second vector holds channel 2 then a zero tail channel.
  CHECK(p.vectors[1].slots == std::vector<double>{9, 10, 11, 12, 0, 0, 0, 0});
}

TEST_CASE("tau rotation shifts slots cyclically and is counted") {
  RotationLedger ledger;
  RotationLedger::LayerEntry* layer = &ledger.layer("l0");
  SlotVector v;
  v.layout = {1, 2, 2};
  v.channel_base = 0;
  v.slots = {1, 2, 3, 4};

  const SlotVector right1 = rotate_tau(v, 0, 1, ledger, layer);
  CHECK(right1.slots == std::vector<double>{2, 3, 4, 1});
  const SlotVector down1 = rotate_tau(v, 1, 0, ledger, layer);
  CHECK(down1.slots == std::vector<double>{3, 4, 1, 2});
  const SlotVector up1 = rotate_tau(v, -1, 0, ledger, layer);
  CHECK(up1.slots == std::vector<double>{3, 4, 1, 2});  // cyclic: -2 == +2 mod 4
  CHECK(ledger.counts().tau == 3);
  CHECK(ledger.counts().pi == 0);

  // Identity rotation costs nothing.
  const SlotVector same = rotate_tau(v, 0, 0, ledger, layer);
  CHECK(same.slots == v.slots);
  CHECK(ledger.counts().tau == 3);
}

TEST_CASE("tau rotations compose additively") {
  std::mt19937_64 rng(22);
  RotationLedger ledger;
  RotationLedger::LayerEntry* layer = &ledger.layer("l0");
  SlotVector v;
  v.layout = {2, 3, 4};
  v.channel_base = 0;
  v.slots.resize(24);
  std::uniform_real_distribution<double> dist(-1, 1);
  for (double& s : v.slots) s = dist(rng);

  const SlotVector a = rotate_tau(rotate_tau(v, 1, 0, ledger, layer), 0, 2, ledger, layer);
  const SlotVector b = rotate_tau(v, 1, 2, ledger, layer);
  CHECK(a.slots == b.slots);

  // Rotation permutes slots, so the multiset of values is preserved.
  std::vector<double> sa = a.slots, sv = v.slots;
  std::sort(sa.begin(), sa.end());
  std::sort(sv.begin(), sv.end());
  CHECK(sa == sv);
}

TEST_CASE("tau rejects shifts outside the spatial extent") {
  RotationLedger ledger;
  RotationLedger::LayerEntry* layer = &ledger.layer("l0");
  SlotVector v;
  v.layout = {1, 2, 2};
  v.slots = {1, 2, 3, 4};
  CHECK_THROWS_AS(rotate_tau(v, 2, 0, ledger, layer), std::invalid_argument);
  CHECK_THROWS_AS(rotate_tau(v, 0, -2, ledger, layer), std::invalid_argument);
}

TEST_CASE("pi rotation moves whole channel regions") {
  RotationLedger ledger;
  RotationLedger::LayerEntry* layer = &ledger.layer("l0");
  SlotVector v;
  v.layout = {2, 2, 2};
  v.channel_base = 0;
  v.slots = {1, 2, 3, 4, 10, 20, 30, 40};

  const SlotVector shifted = rotate_pi(v, 1, ledger, layer);
  CHECK(shifted.slots == std::vector<double>{10, 20, 30, 40, 1, 2, 3, 4});
  CHECK(ledger.counts().pi == 1);
  CHECK(ledger.counts().tau == 0);

  const SlotVector same = rotate_pi(v, 0, ledger, layer);
  CHECK(same.slots == v.slots);
  CHECK(ledger.counts().pi == 1);

  CHECK_THROWS_AS(rotate_pi(v, 2, ledger, layer), std::invalid_argument);
  CHECK_THROWS_AS(rotate_pi(v, -1, ledger, layer), std::invalid_argument);
}

TEST_CASE("pi rotations compose modulo the channel count") {
  RotationLedger ledger;
  RotationLedger::LayerEntry* layer = &ledger.layer("l0");
  SlotVector v;
  v.layout = {4, 1, 2};
  v.channel_base = 0;
  v.slots = {1, 2, 3, 4, 5, 6, 7, 8};
  SlotVector r = rotate_pi(rotate_pi(v, 3, ledger, layer), 1, ledger, layer);
  CHECK(r.slots == v.slots);  // 3 + 1 == 4 == c_n
}

TEST_CASE("ledger tracks per layer and totals") {
  RotationLedger ledger;
  RotationLedger::LayerEntry* a = &ledger.layer("conv1");
  RotationLedger::LayerEntry* b = &ledger.layer("conv2");
  CHECK(&ledger.layer("conv1") == a);  // get-or-create returns the same entry

  ledger.add_tau(a);
  ledger.add_tau(a);
  ledger.add_pi(b);
  const RotationCounts counts = ledger.counts();
  CHECK(counts.tau == 2);
  CHECK(counts.pi == 1);
  CHECK(counts.total == 3);
  CHECK(count_rotations(ledger).total == 3);
  CHECK(a->tau.load() == 2);
  CHECK(b->pi.load() == 1);

  ledger.reset();
  CHECK(ledger.counts().total == 0);
  CHECK(ledger.layers().empty());
}
