#ifndef HEPRUNE_LEDGER_HPP
#define HEPRUNE_LEDGER_HPP

#include <atomic>
#include <cstdint>
#include <deque>
#include <mutex>
#include <string>
#include <vector>

namespace heprune {

struct RotationCounts {
  std::uint64_t tau = 0;
  std::uint64_t pi = 0;
  std::uint64_t total = 0;
};

// Exact count of slot rotations executed during packed-domain passes.
// Counters are atomic so forward passes over distinct output blocks may run
// concurrently; per-layer entries have stable addresses for the lifetime of
// the ledger.
class RotationLedger {
 public:
  struct LayerEntry {
    std::string layer_id;
    std::atomic<std::uint64_t> tau{0};
    std::atomic<std::uint64_t> pi{0};
    double alpha = 1.0;
    double beta = 1.0;
    double estimate_unpruned = 0.0;
    double estimate_pruned = 0.0;

    explicit LayerEntry(std::string id) : layer_id(std::move(id)) {}
  };

  RotationLedger() = default;
  RotationLedger(const RotationLedger&) = delete;
  RotationLedger& operator=(const RotationLedger&) = delete;

  void add_tau(LayerEntry* layer = nullptr) {
    tau_.fetch_add(1, std::memory_order_relaxed);
    if (layer) layer->tau.fetch_add(1, std::memory_order_relaxed);
  }
  void add_pi(LayerEntry* layer = nullptr) {
    pi_.fetch_add(1, std::memory_order_relaxed);
    if (layer) layer->pi.fetch_add(1, std::memory_order_relaxed);
  }

  // Get-or-create the per-layer breakdown entry for `id`.
  LayerEntry& layer(const std::string& id);

  std::uint64_t tau_count() const { return tau_.load(std::memory_order_relaxed); }
  std::uint64_t pi_count() const { return pi_.load(std::memory_order_relaxed); }
  RotationCounts counts() const {
    RotationCounts c;
    c.tau = tau_count();
    c.pi = pi_count();
    c.total = c.tau + c.pi;
    return c;
  }

  std::vector<const LayerEntry*> layers() const;

  void reset();

 private:
  std::atomic<std::uint64_t> tau_{0};
  std::atomic<std::uint64_t> pi_{0};
  mutable std::mutex mu_;
  std::deque<LayerEntry> entries_;
};

inline RotationCounts count_rotations(const RotationLedger& ledger) { return ledger.counts(); }

// Per-layer breakdown rendered as JSON text:
// [{"layer_id":..., "tau":..., "pi":..., "total":..., "alpha":..., "beta":...,
//   "estimate_unpruned":..., "estimate_pruned":...}, ...]
std::string ledger_to_json(const RotationLedger& ledger);

}  // namespace heprune

#endif
