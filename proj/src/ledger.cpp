#include "ledger.hpp"

#include <json.hpp>

namespace heprune {

RotationLedger::LayerEntry& RotationLedger::layer(const std::string& id) {
  std::lock_guard<std::mutex> lock(mu_);
  for (auto& e : entries_)
    if (e.layer_id == id) return e;
  entries_.emplace_back(id);
  return entries_.back();
}

std::vector<const RotationLedger::LayerEntry*> RotationLedger::layers() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<const LayerEntry*> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(&e);
  return out;
}

void RotationLedger::reset() {
  std::lock_guard<std::mutex> lock(mu_);
  tau_.store(0, std::memory_order_relaxed);
  pi_.store(0, std::memory_order_relaxed);
  entries_.clear();
}

std::string ledger_to_json(const RotationLedger& ledger) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto* e : ledger.layers()) {
    const std::uint64_t tau = e->tau.load(std::memory_order_relaxed);
    const std::uint64_t pi = e->pi.load(std::memory_order_relaxed);
    layers.push_back({{"layer_id", e->layer_id},
                      {"tau", tau},
                      {"pi", pi},
                      {"total", tau + pi},
                      {"alpha", e->alpha},
                      {"beta", e->beta},
                      {"estimate_unpruned", e->estimate_unpruned},
                      {"estimate_pruned", e->estimate_pruned}});
  }
  const RotationCounts totals = ledger.counts();
  nlohmann::json doc = {
      {"tau", totals.tau}, {"pi", totals.pi}, {"total", totals.total}, {"layers", layers}};
  return doc.dump(2);
}

}  // namespace heprune
