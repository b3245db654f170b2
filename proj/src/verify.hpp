#ifndef HEPRUNE_VERIFY_HPP
#define HEPRUNE_VERIFY_HPP

#include <cstdint>
#include <string>

namespace heprune {

struct VerifyReport {
  bool ok = true;
  std::string text;  // one line per check, "ok:" or "FAIL:" prefixed
};

// Desk-scale self-check: packed convolutions against an independently coded
// direct convolution, ledger totals against the closed-form count laws, and
// the training gradient against finite differences.
VerifyReport run_verification(std::uint64_t seed);

}  // namespace heprune

#endif
